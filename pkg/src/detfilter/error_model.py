"""Static forward-error analysis for b-bit rounded expression DAGs.

The evaluator being modelled computes a determinant-like quantity with every
intermediate result rounded to b significant bits (round-to-nearest, ties to
even).  For each node we carry a pair P{M, m}:

    M  -- an a-priori bound on the magnitude of the exact value, and
    m  -- a bound on the accumulated absolute error of the rounded value,

both exact dyadic rationals.  The composition rules are

    add:  P{M1, m1} + P{M2, m2}
              -> P{M1+M2,  u * pow2_ceil(M1+M2) + m1 + m2}
    mul:  P{M1, m1} * P{M2, m2}
              -> P{M1*M2,  u * pow2_ceil(M1*M2) + m1*M2 + m2*M1}
    cap:  replace M by an independently known tighter bound (error unchanged)

with u = 2**(-b-1) (one half-ulp at magnitude one).  A cap supplied together
with an addition tightens the magnitude *before* the rounding charge, because
the rounding error of the add is bounded by half an ulp of the representable
value actually produced, which the tighter bound already dominates.

Folding the canned determinant DAGs with these rules yields, per dimension,
the certified threshold: any rounded result with magnitude >= m has the sign
of the exact value.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import factorial, isqrt

from .dyadic import Dyadic, pow2_ceil, round_to_bits  # noqa: F401  (re-exported)

__all__ = [
    "PrecisionConfig",
    "RoundedBound",
    "Leaf",
    "Mul",
    "Add",
    "EvalScheme",
    "ThresholdRow",
    "pow2_ceil",
    "rb_add",
    "rb_mul",
    "rb_cap",
    "hadamard_cap",
    "hadamard_cap_info",
    "det_expansion_scheme",
    "insphere_expansion_scheme",
    "analyze",
    "analyze_inexact_inputs",
    "op_count",
    "threshold_table",
    "thresholds_to_csv",
    "thresholds_to_json",
]

MIN_DIMENSION = 2
MAX_DIMENSION = 8
MAX_INSPHERE_DIMENSION = 6


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision: b significant bits, round-to-nearest-even."""

    bits: int

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 2:
            raise ValueError(f"bits must be an integer >= 2, got {self.bits!r}")

    @property
    def half_ulp(self) -> Dyadic:
        """Rounding unit u = 2**(-bits-1): half an ulp at magnitude one."""
        return Dyadic(1, -self.bits - 1)


@dataclass(frozen=True)
class RoundedBound:
    """P{M, m}: magnitude bound M and accumulated-error bound m."""

    M: Dyadic
    m: Dyadic

    def __post_init__(self):
        M = Dyadic.coerce(self.M)
        m = Dyadic.coerce(self.m)
        if M < 0 or m < 0:
            raise ValueError("bounds must be non-negative")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "m", m)

    @classmethod
    def exact(cls, M) -> "RoundedBound":
        return cls(Dyadic.coerce(M), Dyadic(0))

    def error_coefficient(self, cfg: PrecisionConfig) -> Dyadic:
        """m expressed in units of 2**-bits."""
        return self.m * Dyadic(1, cfg.bits)

    def __str__(self):
        return f"P{{{self.M}, {self.m}}}"


def rb_add(a: RoundedBound, b: RoundedBound, cfg: PrecisionConfig,
           cap: Dyadic | int | None = None) -> RoundedBound:
    """Bound for a rounded addition; optional simultaneous magnitude cap.

    With a cap, the sum's magnitude is known independently to stay within
    `cap`, so both the propagated bound and the new rounding charge use
    min(M1 + M2, cap).
    """
    M = a.M + b.M
    if cap is not None:
        c = Dyadic.coerce(cap)
        if c < M:
            M = c
    rounding = cfg.half_ulp * pow2_ceil(M) if M > 0 else Dyadic(0)
    return RoundedBound(M, rounding + a.m + b.m)


def rb_mul(a: RoundedBound, b: RoundedBound, cfg: PrecisionConfig) -> RoundedBound:
    """Bound for a rounded multiplication."""
    M = a.M * b.M
    rounding = cfg.half_ulp * pow2_ceil(M) if M > 0 else Dyadic(0)
    return RoundedBound(M, rounding + a.m * b.M + b.m * a.M)


def rb_cap(a: RoundedBound, tighter_M: Dyadic | int | float) -> RoundedBound:
    """Replace the magnitude bound by an independently known tighter one."""
    c = Dyadic.coerce(tighter_M)
    return RoundedBound(c, a.m) if c < a.M else a


# ---------------------------------------------------------------------------
# Expression DAG


class Leaf:
    """An input slot; its P{M, m} comes from the scheme's leaf assignment."""

    __slots__ = ("slot",)

    def __init__(self, slot):
        self.slot = slot

    def __repr__(self):
        return f"Leaf({self.slot!r})"


class Mul:
    """Rounded product left*right, carrying an exact sign of +-1.

    Sign flips are exact (they commute with rounding), so they never enter
    the error bounds; they are recorded so evaluators produce the true
    cofactor signs.
    """

    __slots__ = ("left", "right", "sign", "cap")

    def __init__(self, left, right, sign: int = 1, cap=None):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.left, self.right, self.sign, self.cap = left, right, sign, cap


class Add:
    """Rounded sum left+right; `cap` is an optional magnitude cap."""

    __slots__ = ("left", "right", "cap")

    def __init__(self, left, right, cap=None):
        self.left, self.right, self.cap = left, right, cap


Node = Leaf | Mul | Add


@dataclass
class EvalScheme:
    """A shared expression DAG plus leaf bounds and light metadata."""

    root: Node
    leaf_bounds: dict = field(default_factory=dict)
    dimension: int = 0
    kind: str = "whichside"

    def walk(self):
        """Yield each distinct node once, children before parents."""
        seen = set()
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded or isinstance(node, Leaf):
                seen.add(id(node))
                yield node
            else:
                stack.append((node, True))
                stack.append((node.right, False))
                stack.append((node.left, False))

    def operation_count(self) -> int:
        """Distinct rounded operations (adds + muls) in the shared DAG."""
        return sum(1 for n in self.walk() if not isinstance(n, Leaf))

    def leaf_slots(self) -> list:
        return [n.slot for n in self.walk() if isinstance(n, Leaf)]


# Fixed balanced bracketing used to sum k cofactor terms.  Index tuples are
# nested pairs over term positions 0..k-1; the bracketing is part of the
# scheme definition (the frozen thresholds in the tests depend on it).
_SUM_SHAPES = {
    1: 0,
    2: (0, 1),
    3: ((0, 1), 2),
    4: ((0, 1), (2, 3)),
    5: (((0, 1), 2), (3, 4)),
    6: (((0, 1), (2, 3)), (4, 5)),
    7: (((0, 1), (2, 3)), ((4, 5), 6)),
    8: (((0, 1), (2, 3)), ((4, 5), (6, 7))),
}

# Hadamard bounds for k x k determinants with entries in [-1, 1]: the best
# integer-free bound is sqrt(k)**k, but for small k the lattice-optimal
# values below are much tighter and are what the capped schemes use.
_HADAMARD_TABLE = {1: 1, 2: 2, 3: 4, 4: 16, 5: 48, 6: 160, 7: 576, 8: 4096}


def hadamard_cap(k: int) -> Dyadic:
    """Magnitude cap for a k x k determinant with entries in [-1, 1]."""
    value, _ = hadamard_cap_info(k)
    return value


def hadamard_cap_info(k: int) -> tuple[Dyadic, bool]:
    """(cap, from_table): tabulated value for k <= 8, else ceil(sqrt(k)**k).

    The fallback is the generic Hadamard bound rounded up to an integer and
    is flagged `from_table=False` so callers can tell it is not one of the
    sharp tabulated values.
    """
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"dimension must be a positive integer, got {k!r}")
    if k in _HADAMARD_TABLE:
        return Dyadic(_HADAMARD_TABLE[k]), True
    # ceil(k**(k/2)) with integer arithmetic: for even k this is exact.
    if k % 2 == 0:
        return Dyadic(k ** (k // 2)), False
    sq = k ** k
    r = isqrt(sq)
    return Dyadic(r if r * r == sq else r + 1), False


def _fold_shape(shape, terms, cap_root=None):
    """Combine `terms` following a nested-pair shape; cap only the root add."""
    if isinstance(shape, int):
        return terms[shape]
    left = _fold_shape(shape[0], terms)
    right = _fold_shape(shape[1], terms)
    return Add(left, right, cap=cap_root)


_DEFAULT_LEAF = RoundedBound(Dyadic(1), Dyadic(0))


def _minor_node(rows: tuple[int, ...], cache: dict):
    """DAG node for the minor on `rows` x columns 0..len(rows)-1.

    Expansion is along the last column, so any two minors sharing a row set
    share the node; the cache makes the whole family a DAG rather than a
    tree, which is what keeps the operation count at (d-1)(2**d - 1).
    """
    if rows in cache:
        return cache[rows]
    k = len(rows)
    if k == 1:
        node = _leaf(cache, rows[0], 0)
    else:
        terms = []
        for t, r in enumerate(rows):
            rest = rows[:t] + rows[t + 1:]
            sign = -1 if (t + k - 1) % 2 else 1
            terms.append(Mul(_leaf(cache, r, k - 1), _minor_node(rest, cache), sign=sign))
        node = _fold_shape(_SUM_SHAPES[k], terms, cap_root=hadamard_cap(k))
    cache[rows] = node
    return node


def _leaf(cache: dict, row: int, col: int) -> Leaf:
    key = ("leaf", row, col)
    if key not in cache:
        cache[key] = Leaf((row, col))
    return cache[key]


def det_expansion_scheme(dimension: int,
                         leaf: RoundedBound = _DEFAULT_LEAF) -> EvalScheme:
    """Shared cofactor-expansion DAG for a dimension x dimension determinant.

    Every minor's root addition is capped by the Hadamard bound of its size.
    Leaf slots are (row, column) pairs; all leaves share the bound `leaf`
    (P{1, 0} by default: exact inputs of magnitude at most one).
    """
    if not isinstance(dimension, int) or not (MIN_DIMENSION <= dimension <= MAX_DIMENSION):
        raise ValueError(
            f"dimension must be an integer in [{MIN_DIMENSION}, {MAX_DIMENSION}], "
            f"got {dimension!r}")
    cache: dict = {}
    root = _minor_node(tuple(range(dimension)), cache)
    scheme = EvalScheme(root=root, dimension=dimension, kind="whichside")
    scheme.leaf_bounds = {slot: leaf for slot in scheme.leaf_slots()}
    return scheme


def _sum_of_squares_node(row: int, dimension: int, cache: dict):
    """DAG for x_row,0**2 + ... + x_row,d-1**2, folded like a cofactor sum."""
    key = ("sumsq", row)
    if key in cache:
        return cache[key]
    squares = []
    for c in range(dimension):
        lf = _leaf(cache, row, c)
        squares.append(Mul(lf, lf, sign=1))
    node = squares[0] if dimension == 1 else _fold_shape(
        _SUM_SHAPES[dimension], squares)
    cache[key] = node
    return node


def insphere_expansion_scheme(dimension: int,
                              leaf: RoundedBound = _DEFAULT_LEAF) -> EvalScheme:
    """Expansion DAG for the lifted (sphere-membership) determinant.

    The test takes dimension+1 points; each contributes a row of coordinates
    plus its sum of squares, and the matrix is reduced against the origin so
    it stays (dimension+1) x (dimension+1).  Expansion along the lifted
    column reuses the capped coordinate minors of `det_expansion_scheme`;
    the root addition carries no cap because the natural magnitude bound of
    the fold is already at least as tight as the lifted Hadamard bound for
    every supported dimension.
    """
    if not isinstance(dimension, int) or not (1 <= dimension <= MAX_INSPHERE_DIMENSION):
        raise ValueError(
            f"dimension must be an integer in [1, {MAX_INSPHERE_DIMENSION}], "
            f"got {dimension!r}")
    cache: dict = {}
    rows = tuple(range(dimension + 1))
    k = dimension + 1
    terms = []
    for t, r in enumerate(rows):
        rest = rows[:t] + rows[t + 1:]
        sign = -1 if (t + k - 1) % 2 else 1
        lift = _sum_of_squares_node(r, dimension, cache)
        terms.append(Mul(lift, _minor_node(rest, cache), sign=sign))
    root = _fold_shape(_SUM_SHAPES[k], terms, cap_root=None)
    scheme = EvalScheme(root=root, dimension=dimension, kind="insphere")
    scheme.leaf_bounds = {slot: leaf for slot in scheme.leaf_slots()}
    return scheme


# ---------------------------------------------------------------------------
# Folding


def analyze(scheme: EvalScheme, cfg: PrecisionConfig) -> RoundedBound:
    """Fold P{M, m} bounds over the DAG; the result's m is the threshold."""
    bounds: dict[int, RoundedBound] = {}
    for node in scheme.walk():
        if isinstance(node, Leaf):
            try:
                rb = scheme.leaf_bounds[node.slot]
            except KeyError:
                raise ValueError(f"no bound assigned to leaf slot {node.slot!r}") from None
        elif isinstance(node, Mul):
            rb = rb_mul(bounds[id(node.left)], bounds[id(node.right)], cfg)
            if node.cap is not None:
                rb = rb_cap(rb, node.cap)
        else:
            rb = rb_add(bounds[id(node.left)], bounds[id(node.right)], cfg,
                        cap=node.cap)
        bounds[id(node)] = rb
    return bounds[id(scheme.root)]


def analyze_inexact_inputs(scheme: EvalScheme, eps_in: Dyadic | int | float,
                           cfg: PrecisionConfig) -> RoundedBound:
    """Threshold when each input is only known to within eps_in.

    For the multilinear determinant schemes an input perturbation of at most
    eps_in per entry moves the exact value by at most dimension! * eps_in
    (each of the dimension! products changes by eps_in to first order and
    the perturbations are too small to couple).  That linearisation is valid
    only while the perturbed magnitudes round to the same binade, which is
    checked node by node; if eps_in is too large for some node the analysis
    refuses rather than returning an unsound threshold.
    """
    eps = Dyadic.coerce(eps_in)
    if eps < 0:
        raise ValueError("eps_in must be non-negative")
    if scheme.kind != "whichside":
        raise ValueError(
            "inexact-input analysis applies to the multilinear whichside "
            "schemes only (lifted entries are quadratic in the inputs)")
    base = analyze(scheme, cfg)
    if eps == 0:
        return base
    # Binade check on the inflated system: at every node the perturbation
    # budget must stay below the magnitude, and for non-power-of-two
    # magnitudes must not push past the next power of two.
    inflated = EvalScheme(
        root=scheme.root,
        leaf_bounds={s: RoundedBound(rb.M, rb.m + eps)
                     for s, rb in scheme.leaf_bounds.items()},
        dimension=scheme.dimension,
        kind=scheme.kind,
    )
    bounds: dict[int, RoundedBound] = {}
    for node in inflated.walk():
        if isinstance(node, Leaf):
            rb = inflated.leaf_bounds[node.slot]
        elif isinstance(node, Mul):
            rb = rb_mul(bounds[id(node.left)], bounds[id(node.right)], cfg)
            if node.cap is not None:
                rb = rb_cap(rb, node.cap)
        else:
            rb = rb_add(bounds[id(node.left)], bounds[id(node.right)], cfg,
                        cap=node.cap)
        if rb.m > rb.M:
            raise ValueError(
                "eps_in too large: perturbation bound exceeds the magnitude "
                f"bound at an internal node ({rb})")
        if not rb.M.is_power_of_two and rb.M + rb.m > pow2_ceil(rb.M):
            raise ValueError(
                "eps_in too large: perturbed magnitude crosses a binade "
                f"boundary at an internal node ({rb})")
        bounds[id(node)] = rb
    return RoundedBound(base.M, base.m + factorial(scheme.dimension) * eps)


def op_count(dimension: int) -> int:
    """Distinct adds+muls of the shared expansion DAG: (d-1)(2**d - 1)."""
    if not isinstance(dimension, int) or dimension < 1:
        raise ValueError(f"dimension must be a positive integer, got {dimension!r}")
    return (dimension - 1) * (2 ** dimension - 1)


# ---------------------------------------------------------------------------
# Threshold table and export


@dataclass(frozen=True)
class ThresholdRow:
    """One certified-threshold table row for a given dimension."""

    dimension: int
    magnitude_bound: Dyadic          # G: worst-case exact magnitude
    epsilon_coefficient: Dyadic      # epsilon expressed in units of 2**-bits
    epsilon: Dyadic                  # the threshold itself at `bits`
    bits: int
    ops: int
    kind: str = "whichside"


def threshold_table(dimensions, cfg: PrecisionConfig,
                    kind: str = "whichside") -> list[ThresholdRow]:
    """Certified thresholds for each requested dimension at precision cfg."""
    rows = []
    for d in dimensions:
        if kind == "whichside":
            scheme = det_expansion_scheme(d)
        elif kind == "insphere":
            scheme = insphere_expansion_scheme(d)
        else:
            raise ValueError(f"unknown predicate kind {kind!r}")
        rb = analyze(scheme, cfg)
        rows.append(ThresholdRow(
            dimension=d,
            magnitude_bound=rb.M,
            epsilon_coefficient=rb.error_coefficient(cfg),
            epsilon=rb.m,
            bits=cfg.bits,
            ops=scheme.operation_count(),
            kind=kind,
        ))
    return rows


def _coeff_cell(row: ThresholdRow):
    c = row.epsilon_coefficient
    return c.as_int() if c.is_integer() else float(c)


def thresholds_to_csv(rows, file=None) -> str:
    """Write threshold rows as CSV; returns the text (also writes `file`)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "G", "epsilon_coefficient", "epsilon_at_b53", "ops"])
    for r in rows:
        eps53 = float(Dyadic.coerce(_coeff_cell(r)) * Dyadic(1, -53))
        w.writerow([r.dimension, r.magnitude_bound.as_int(), _coeff_cell(r),
                    repr(eps53), r.ops])
    text = buf.getvalue()
    if file is not None:
        if hasattr(file, "write"):
            file.write(text)
        else:
            with open(file, "w") as fh:
                fh.write(text)
    return text


def thresholds_to_json(rows, file=None) -> str:
    payload = [
        {
            "delta": r.dimension,
            "G": r.magnitude_bound.as_int(),
            "epsilon_coefficient": _coeff_cell(r),
            "epsilon_at_b53": float(Dyadic.coerce(_coeff_cell(r)) * Dyadic(1, -53)),
            "ops": r.ops,
        }
        for r in rows
    ]
    text = json.dumps(payload, indent=2)
    if file is not None:
        if hasattr(file, "write"):
            file.write(text)
        else:
            with open(file, "w") as fh:
                fh.write(text)
    return text
