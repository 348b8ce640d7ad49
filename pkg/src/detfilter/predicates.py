"""The two-stage sign filter: rounded evaluation, then exact fallback.

A predicate instance is a small set of grid points; the question is the
sign of a determinant built from their coordinates.  Stage one evaluates
the expansion DAG in b-bit rounded arithmetic and certifies the sign
whenever the magnitude clears the statically derived threshold; stage two
(rare) rescales the coordinates to integers and asks exact_core.  The
public predicates therefore always return the true sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import sqrt
from typing import Iterable, Optional, Sequence

from .dyadic import Dyadic, round_to_bits
from .error_model import (
    Add,
    EvalScheme,
    Leaf,
    Mul,
    PrecisionConfig,
    analyze,
    det_expansion_scheme,
    insphere_expansion_scheme,
    op_count,
)
from .exact import Sign, exact_det_sign, lift_insphere

__all__ = [
    "HARDWARE_BITS",
    "GridPoint",
    "FilterVerdict",
    "PredicateKind",
    "PredicateInstance",
    "grid_pitch",
    "scheme_for",
    "threshold_for",
    "eval_rounded",
    "certify",
    "whichside",
    "insphere",
    "filter_stats",
]

HARDWARE_BITS = 53  # native double significand: evaluate with plain floats


def grid_pitch(bits: int) -> Dyadic:
    """Pitch of the representable grid over [-1, 1]: eta = 2**(1-bits)."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    return Dyadic(1, 1 - bits)


@dataclass(frozen=True)
class GridPoint:
    """A point of the b-bit grid in [-1, 1]**delta.

    Coordinates are stored as signed integer indices j; the real coordinate
    is j * 2**(1-bits), exactly representable with `bits` significant bits.
    Indices range over [-2**(bits-1), 2**(bits-1)] so that both unit
    coordinates are admissible; the uniform *sampler* draws from the
    half-open convention [-2**(bits-1), 2**(bits-1) - 1], which has exactly
    2**bits lattice values per axis.
    """

    indices: tuple[int, ...]
    bits: int

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(j) for j in self.indices))
        if self.bits < 2:
            raise ValueError("bits must be >= 2")
        if not self.indices:
            raise ValueError("point needs at least one coordinate")
        half = 1 << (self.bits - 1)
        for j in self.indices:
            if not (-half <= j <= half):
                raise ValueError(
                    f"index {j} outside the {self.bits}-bit grid "
                    f"[-{half}, {half}]")

    @property
    def delta(self) -> int:
        return len(self.indices)

    @property
    def pitch(self) -> Dyadic:
        return grid_pitch(self.bits)

    def coord(self, i: int) -> Dyadic:
        return Dyadic(self.indices[i], 1 - self.bits)

    def coords_float(self) -> tuple[float, ...]:
        # Exact: |j| < 2**52 and the scale is a power of two.
        scale = 2.0 ** (1 - self.bits)
        return tuple(j * scale for j in self.indices)

    @classmethod
    def from_floats(cls, coords: Sequence[float], bits: int) -> "GridPoint":
        """Build from float coordinates that must lie exactly on the grid."""
        scale = 2.0 ** (bits - 1)
        indices = []
        for x in coords:
            j = x * scale
            if j != int(j):
                raise ValueError(f"coordinate {x!r} is not on the {bits}-bit grid")
            indices.append(int(j))
        return cls(tuple(indices), bits)


class PredicateKind(Enum):
    WHICHSIDE = "whichside"
    INSPHERE = "insphere"


@dataclass(frozen=True)
class PredicateInstance:
    """A predicate kind plus its point set (counts checked on construction)."""

    kind: PredicateKind
    points: tuple[GridPoint, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("instance needs points")
        d = pts[0].delta
        if any(p.delta != d for p in pts):
            raise ValueError("points have inconsistent dimensions")
        expected = d if self.kind is PredicateKind.WHICHSIDE else d + 1
        if len(pts) != expected:
            raise ValueError(
                f"{self.kind.value} in dimension {d} needs {expected} points, "
                f"got {len(pts)}")

    @property
    def delta(self) -> int:
        return self.points[0].delta

    @property
    def bits_in(self) -> int:
        return max(p.bits for p in self.points)


@dataclass(frozen=True)
class FilterVerdict:
    """Outcome of the rounded stage: a certified sign, or a declared miss."""

    certified: bool
    sign: Optional[Sign]
    value: float
    threshold: Dyadic

    def __post_init__(self):
        if self.certified:
            if self.sign is None:
                raise ValueError("certified verdict needs a sign")
            if Dyadic.from_float(abs(self.value)) < self.threshold:
                raise ValueError("certified verdict below threshold")


@lru_cache(maxsize=None)
def scheme_for(kind: PredicateKind, delta: int) -> EvalScheme:
    if kind is PredicateKind.WHICHSIDE:
        return det_expansion_scheme(delta)
    return insphere_expansion_scheme(delta)


@lru_cache(maxsize=None)
def threshold_for(kind: PredicateKind, delta: int, cfg: PrecisionConfig) -> Dyadic:
    """Certification threshold: the folded error bound of the scheme at cfg."""
    if kind is PredicateKind.WHICHSIDE and delta == 1:
        return Dyadic(0)  # a single coordinate involves no rounded operation
    return analyze(scheme_for(kind, delta), cfg).m


def eval_rounded(instance: PredicateInstance, cfg: PrecisionConfig) -> float:
    """Evaluate the instance's expansion DAG in b-bit rounded arithmetic.

    b = 53 runs directly on hardware doubles (same rounding rule); smaller b
    uses exact dyadic arithmetic with an explicit round-to-nearest-even step
    after every operation.  b > 53 is not supported: the result could not be
    returned as a float.
    """
    b = cfg.bits
    if b > HARDWARE_BITS:
        raise ValueError(
            f"bits={b} unsupported: the software-rounding layer covers "
            f"2..{HARDWARE_BITS}")
    if instance.bits_in > b:
        raise ValueError(
            f"inputs use {instance.bits_in}-bit coordinates, not representable "
            f"at bits={b}")
    if instance.kind is PredicateKind.WHICHSIDE and instance.delta == 1:
        return instance.points[0].coords_float()[0]
    scheme = scheme_for(instance.kind, instance.delta)
    if b == HARDWARE_BITS:
        values: dict[int, float] = {}
        for node in scheme.walk():
            if isinstance(node, Leaf):
                r, c = node.slot
                v = instance.points[r].coords_float()[c]
            elif isinstance(node, Mul):
                v = values[id(node.left)] * values[id(node.right)]
                if node.sign < 0:
                    v = -v
            else:
                v = values[id(node.left)] + values[id(node.right)]
            values[id(node)] = v
        return values[id(scheme.root)]
    dyads: dict[int, Dyadic] = {}
    for node in scheme.walk():
        if isinstance(node, Leaf):
            r, c = node.slot
            d = instance.points[r].coord(c)
        elif isinstance(node, Mul):
            d = round_to_bits(dyads[id(node.left)] * dyads[id(node.right)], b)
            if node.sign < 0:
                d = -d
        else:
            d = round_to_bits(dyads[id(node.left)] + dyads[id(node.right)], b)
        dyads[id(node)] = d
    return float(dyads[id(scheme.root)])


def certify(value: float, threshold) -> FilterVerdict:
    """Certify the sign iff |value| >= threshold (ties certify).

    The comparison is exact: both sides are dyadic rationals.
    """
    thr = Dyadic.coerce(threshold)
    if thr < 0:
        raise ValueError("threshold must be >= 0")
    if Dyadic.from_float(abs(value)) >= thr:
        return FilterVerdict(certified=True, sign=Sign.of(value),
                             value=value, threshold=thr)
    return FilterVerdict(certified=False, sign=None, value=value, threshold=thr)


def _exact_sign(instance: PredicateInstance) -> Sign:
    """Ground truth from integer arithmetic on the stored grid indices."""
    if instance.kind is PredicateKind.WHICHSIDE:
        return exact_det_sign([list(p.indices) for p in instance.points])
    scale = 1 << (instance.bits_in - 1)
    lifted = lift_insphere([p.indices for p in instance.points], scale)
    return exact_det_sign(lifted)


def _cascade(instance: PredicateInstance, cfg: PrecisionConfig) -> Sign:
    value = eval_rounded(instance, cfg)
    verdict = certify(value, threshold_for(instance.kind, instance.delta, cfg))
    if verdict.certified:
        return verdict.sign
    return _exact_sign(instance)


def whichside(points: Iterable[GridPoint], cfg: PrecisionConfig) -> Sign:
    """Orientation of delta grid points (sign of their coordinate det)."""
    inst = PredicateInstance(PredicateKind.WHICHSIDE, tuple(points))
    return _cascade(inst, cfg)


def insphere(points: Iterable[GridPoint], cfg: PrecisionConfig) -> Sign:
    """Sphere-membership sign for delta+1 grid points (origin implicit)."""
    inst = PredicateInstance(PredicateKind.INSPHERE, tuple(points))
    return _cascade(inst, cfg)


def filter_stats(instances: Iterable[PredicateInstance],
                 cfg: PrecisionConfig) -> dict:
    """Run the rounded stage over a stream and summarise filter efficacy.

    Returns trials, uncertain_count, failure_rate (with a 95% binomial
    confidence interval) and mean per-trial operation counts for the two
    stages; the whichside rounded-stage cost unit is op_count(delta), and
    the exact stage is charged the same unit times the failure rate.
    """
    trials = 0
    uncertain = 0
    rounded_ops = 0
    exact_ops = 0
    for inst in instances:
        value = eval_rounded(inst, cfg)
        verdict = certify(value, threshold_for(inst.kind, inst.delta, cfg))
        ops = (op_count(inst.delta) if inst.kind is PredicateKind.WHICHSIDE
               else scheme_for(inst.kind, inst.delta).operation_count())
        trials += 1
        rounded_ops += ops
        if not verdict.certified:
            uncertain += 1
            exact_ops += ops
    if trials == 0:
        raise ValueError("empty instance stream")
    rate = uncertain / trials
    half = 1.959963984540054 * sqrt(rate * (1.0 - rate) / trials)
    return {
        "trials": trials,
        "uncertain_count": uncertain,
        "failure_rate": rate,
        "failure_rate_ci": (max(0.0, rate - half), min(1.0, rate + half)),
        "mean_stage_costs": {
            "rounded": rounded_ops / trials,
            "exact": exact_ops / trials,
        },
    }
