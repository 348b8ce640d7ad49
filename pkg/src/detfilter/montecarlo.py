"""Monte Carlo validation: CDF estimates and filter failure rates.

Two experiment families:

* estimate_cdf -- sample point sets from a domain (ball, cube, or the b-bit
  grid in the cube), compute the exact |determinant| statistic for each, and
  report empirical P(stat <= V) next to the matching closed-form bound.
* estimate_failure_rate -- run the rounded filter stage on grid samples and
  report how often it fails to certify, next to the failure bound rho.

Counting is exact even though the bulk statistic uses float64: samples whose
fast statistic lands within a safety margin of a threshold are re-evaluated
in rational arithmetic, and grid statistics are compared in pure integer
arithmetic.  The margin (1e-10) exceeds the float64 evaluation error of the
small closed-form determinants by four orders of magnitude, and the expected
number of in-band samples is ~N*margin, i.e. ~10**-3 per million trials, so
exact re-evaluation costs nothing.

Reproducibility contract: trials are partitioned into fixed blocks of 2**16;
block i uses the generator seeded by (seed, i); workers process disjoint
blocks and results merge by integer addition.  Output is therefore byte
identical for any worker count or scheduling order.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Callable, Iterable, Optional

import numpy as np

from . import bounds
from .error_model import Leaf, Mul, PrecisionConfig
from .exact import det_cofactor
from .predicates import GridPoint, PredicateKind, scheme_for, threshold_for

__all__ = [
    "BLOCK_TRIALS",
    "ConfigError",
    "SampleDomain",
    "ExperimentConfig",
    "EstimateRow",
    "DominanceReport",
    "sample_ball",
    "sample_cube",
    "sample_grid",
    "measure_whichside",
    "measure_insphere",
    "estimate_cdf",
    "estimate_failure_rate",
    "dominance_report",
    "rows_to_csv",
    "rows_to_json",
    "parse_config",
    "CSV_COLUMNS",
]

BLOCK_TRIALS = 1 << 16
_BAND_MARGIN = 1e-10


class ConfigError(ValueError):
    """Malformed experiment configuration."""


# ---------------------------------------------------------------------------
# Experiment description


@dataclass(frozen=True)
class SampleDomain:
    """Ball(delta) | Cube(delta) | Grid(delta, eta_bits)."""

    kind: str
    delta: int
    eta_bits: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("ball", "cube", "grid"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not isinstance(self.delta, int) or self.delta < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.delta!r}")
        if self.kind == "grid":
            if not isinstance(self.eta_bits, int) or self.eta_bits < 2:
                raise ValueError("grid domain needs eta_bits >= 2")
        elif self.eta_bits is not None:
            raise ValueError(f"eta_bits only applies to grid domains")

    @classmethod
    def ball(cls, delta: int) -> "SampleDomain":
        return cls("ball", delta)

    @classmethod
    def cube(cls, delta: int) -> "SampleDomain":
        return cls("cube", delta)

    @classmethod
    def grid(cls, delta: int, eta_bits: int) -> "SampleDomain":
        return cls("grid", delta, eta_bits)

    @property
    def eta(self) -> float:
        """Grid pitch 2**(1 - eta_bits) (0 for continuous domains)."""
        return 0.0 if self.eta_bits is None else 2.0 ** (1 - self.eta_bits)


@dataclass(frozen=True)
class ExperimentConfig:
    domain: SampleDomain
    predicate: PredicateKind
    n_trials: int
    seed: int
    thresholds: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(v) for v in self.thresholds))
        if not isinstance(self.n_trials, int) or self.n_trials < 1:
            raise ValueError(f"n_trials must be a positive integer, got {self.n_trials!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        ts = self.thresholds
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("thresholds must be sorted ascending")
        if any(v < 0 for v in ts):
            raise ValueError("thresholds must be non-negative")

    @property
    def points_per_trial(self) -> int:
        d = self.domain.delta
        return d if self.predicate is PredicateKind.WHICHSIDE else d + 1


@dataclass(frozen=True)
class EstimateRow:
    """One (threshold, count) line of an experiment, with its bound."""

    delta: int
    domain: str
    predicate: str
    V: float
    n: int
    hits: int
    bound: float
    bound_note: str = ""

    @property
    def p_hat(self) -> float:
        return self.hits / self.n

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return sqrt(p * (1.0 - p) / self.n)

    @property
    def passed(self) -> bool:
        """Dominance verdict: bound >= p_hat - 3*stderr."""
        return self.bound >= self.p_hat - 3.0 * self.stderr


# ---------------------------------------------------------------------------
# Deterministic blocked RNG


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, block_index)))


def _run_blocked(n_trials: int, seed: int,
                 block_fn: Callable[[np.random.Generator, int], np.ndarray],
                 workers: int = 1) -> np.ndarray:
    """Sum block_fn over fixed trial blocks; result independent of workers."""
    blocks = []
    start = 0
    index = 0
    while start < n_trials:
        count = min(BLOCK_TRIALS, n_trials - start)
        blocks.append((index, count))
        start += count
        index += 1
    if workers <= 1:
        acc = None
        for i, count in blocks:
            part = block_fn(_block_rng(seed, i), count)
            acc = part if acc is None else acc + part
        return acc
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda b: block_fn(_block_rng(seed, b[0]), b[1]), blocks)
        acc = None
        for part in parts:
            acc = part if acc is None else acc + part
    return acc


# ---------------------------------------------------------------------------
# Samplers


def _ball_batch(delta: int, rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform in the unit ball: normal directions, radius U**(1/delta)."""
    g = rng.standard_normal((n, delta))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    radii = rng.random(n) ** (1.0 / delta)
    return g * (radii / norms)[:, None]

def _cube_batch(delta: int, rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(n, delta))

def _grid_batch(delta: int, eta_bits: int, rng: np.random.Generator,
                n: int) -> np.ndarray:
    half = 1 << (eta_bits - 1)
    return rng.integers(-half, half, size=(n, delta), dtype=np.int64)


def sample_ball(delta: int, rng: np.random.Generator) -> np.ndarray:
    """One point uniform in the unit delta-ball."""
    return _ball_batch(delta, rng, 1)[0]


def sample_cube(delta: int, rng: np.random.Generator) -> np.ndarray:
    """One point uniform in the cube [-1, 1]**delta."""
    return _cube_batch(delta, rng, 1)[0]


def sample_grid(delta: int, eta_bits: int, rng: np.random.Generator) -> GridPoint:
    """One uniform lattice point of the eta_bits grid in the cube."""
    js = _grid_batch(delta, eta_bits, rng, 1)[0]
    return GridPoint(tuple(int(j) for j in js), eta_bits)


# ---------------------------------------------------------------------------
# Exact statistics


def _exact_abs_det(rows) -> Fraction:
    mat = [[Fraction(x) for x in row] for row in rows]
    return abs(det_cofactor(mat))


def _exact_abs_lifted(rows) -> Fraction:
    mat = []
    for row in rows:
        r = [Fraction(x) for x in row]
        mat.append(r + [sum(c * c for c in r)])
    return abs(det_cofactor(mat))


def measure_whichside(points) -> float:
    """Exact |det| of delta points (rows); float conversion at the very end."""
    pts = _points_as_rows(points)
    return float(_exact_abs_det(pts))


def measure_insphere(points) -> float:
    """Exact |lifted det| of delta+1 points (origin implicit)."""
    pts = _points_as_rows(points)
    return float(_exact_abs_lifted(pts))


def _points_as_rows(points) -> list[list]:
    rows = []
    for p in points:
        if isinstance(p, GridPoint):
            pitch = Fraction(1, 1 << (p.bits - 1))
            rows.append([j * pitch for j in p.indices])
        else:
            rows.append(list(p))
    return rows


# ---------------------------------------------------------------------------
# Fast batched statistics (float64), exactness recovered via the margin band


def _det_batch(pts: np.ndarray) -> np.ndarray:
    """Determinants of an (n, d, d) stack; closed forms for d <= 4."""
    d = pts.shape[1]
    if d == 1:
        return pts[:, 0, 0].copy()
    if d == 2:
        return pts[:, 0, 0] * pts[:, 1, 1] - pts[:, 0, 1] * pts[:, 1, 0]
    if d == 3:
        return (pts[:, 0, 0] * (pts[:, 1, 1] * pts[:, 2, 2] - pts[:, 1, 2] * pts[:, 2, 1])
                - pts[:, 0, 1] * (pts[:, 1, 0] * pts[:, 2, 2] - pts[:, 1, 2] * pts[:, 2, 0])
                + pts[:, 0, 2] * (pts[:, 1, 0] * pts[:, 2, 1] - pts[:, 1, 1] * pts[:, 2, 0]))
    if d == 4:
        total = None
        for t in range(4):
            rows = [r for r in range(4) if r != t]
            minor = _det_batch(pts[:, rows, :3])
            term = pts[:, t, 3] * minor
            signed = term if (t + 3) % 2 == 0 else -term
            total = signed if total is None else total + signed
        return total
    return np.linalg.det(pts)


def _lifted_batch(pts: np.ndarray) -> np.ndarray:
    """Lifted determinants of an (n, d+1, d) stack of coordinates."""
    n, rows, d = pts.shape
    lifted = np.empty((n, rows, rows))
    lifted[:, :, :d] = pts
    lifted[:, :, d] = np.sum(pts * pts, axis=2)
    return _det_batch(lifted)


def _count_with_band(stats: np.ndarray, thresholds, exact_fn) -> np.ndarray:
    """Count stats <= V per threshold; re-check the margin band exactly.

    exact_fn(i) must return the sample's exact statistic as a Fraction.
    """
    hits = np.zeros(len(thresholds), dtype=np.int64)
    for k, V in enumerate(thresholds):
        below = stats <= V - _BAND_MARGIN
        band = np.abs(stats - V) <= _BAND_MARGIN
        n = int(np.count_nonzero(below))
        for i in np.nonzero(band)[0]:
            if exact_fn(int(i)) <= Fraction(V):
                n += 1
        hits[k] = n
    return hits


def _count_grid_exact(dets: np.ndarray, thresholds, delta: int,
                      eta_bits: int) -> np.ndarray:
    """Pure integer counting for grid statistics (no float involved)."""
    scale = 1 << (delta * (eta_bits - 1))
    hits = np.zeros(len(thresholds), dtype=np.int64)
    mags = np.abs(dets)
    for k, V in enumerate(thresholds):
        limit = Fraction(V) * scale
        bound_int = limit.numerator // limit.denominator  # floor; <= is kept
        hits[k] = int(np.count_nonzero(mags <= bound_int))
    return hits


def _int_det_overflow_risk(delta: int, eta_bits: int) -> bool:
    from .error_model import hadamard_cap
    worst = hadamard_cap(delta).as_int() * (1 << ((eta_bits - 1) * delta))
    return worst >= 2 ** 62


# ---------------------------------------------------------------------------
# Bound wiring


def _bound_fn(cfg: ExperimentConfig) -> Callable[[float], bounds.ProbBound]:
    d = cfg.domain.delta
    kind = cfg.domain.kind
    if cfg.predicate is PredicateKind.WHICHSIDE:
        if kind == "ball":
            return lambda V: bounds.whichside_ball_bound(d, V)
        if kind == "cube":
            return lambda V: bounds.whichside_cube_bound(d, V)
        eta = cfg.domain.eta
        return lambda V: bounds.whichside_grid_bound(d, V, eta)
    # insphere: derivation domain is the cube; grid adds the sqrt(eta) term
    if kind == "ball":
        raise ConfigError(
            "no insphere bound is defined on the ball domain; use cube or grid")
    shift = bounds.insphere_grid_term(d, cfg.domain.eta) if kind == "grid" else 0.0
    if d == 1:
        return lambda V: bounds.insphere1_bound(V + shift)
    if d == 2:
        return lambda V: bounds.insphere2_bound(V + shift)
    return lambda V: bounds.insphere_d_bound(d, V + shift)


# ---------------------------------------------------------------------------
# CDF estimation


def estimate_cdf(cfg: ExperimentConfig, workers: int = 1) -> list[EstimateRow]:
    """Empirical CDF of the predicate statistic at each threshold, with bounds.

    Single pass over n_trials samples; returns one row per threshold.
    """
    if not cfg.thresholds:
        raise ConfigError("estimate_cdf needs at least one threshold")
    bound_fn = _bound_fn(cfg)
    bound_values = [bound_fn(V) for V in cfg.thresholds]  # may raise on bad V
    d = cfg.domain.delta
    npts = cfg.points_per_trial
    is_insphere = cfg.predicate is PredicateKind.INSPHERE
    kind = cfg.domain.kind

    if kind == "grid":
        eta_bits = cfg.domain.eta_bits
        if is_insphere:
            block = _grid_insphere_block(d, eta_bits, npts, cfg.thresholds)
        else:
            block = _grid_whichside_block(d, eta_bits, npts, cfg.thresholds)
    else:
        sampler = _ball_batch if kind == "ball" else _cube_batch

        def block(rng, count):
            flat = sampler(d, rng, count * npts)
            pts = flat.reshape(count, npts, d)
            if is_insphere:
                stats = np.abs(_lifted_batch(pts))
                exact = lambda i: _exact_abs_lifted(pts[i])
            else:
                stats = np.abs(_det_batch(pts))
                exact = lambda i: _exact_abs_det(pts[i])
            return _count_with_band(stats, cfg.thresholds, exact)

    hits = _run_blocked(cfg.n_trials, cfg.seed, block, workers)
    return [
        EstimateRow(
            delta=d,
            domain=kind,
            predicate=cfg.predicate.value,
            V=V,
            n=cfg.n_trials,
            hits=int(h),
            bound=float(bv),
            bound_note=getattr(bv, "note", ""),
        )
        for V, h, bv in zip(cfg.thresholds, hits, bound_values)
    ]


def _grid_whichside_block(d, eta_bits, npts, thresholds):
    object_path = _int_det_overflow_risk(d, eta_bits)

    def block(rng, count):
        js = _grid_batch(d, rng=rng, eta_bits=eta_bits, n=count * npts)
        pts = js.reshape(count, npts, d)
        if object_path:
            dets = np.array(
                [det_cofactor([[int(x) for x in row] for row in inst])
                 for inst in pts],
                dtype=object)
        else:
            dets = _det_batch(pts.astype(np.int64))
        return _count_grid_exact(dets, thresholds, d, eta_bits)

    return block


def _grid_insphere_block(d, eta_bits, npts, thresholds):
    # Lifted integer statistic: coordinate entries scaled by s = 2**(b-1)
    # carry the norm column scaled by s**2, so the real statistic is the
    # integer determinant divided by s**(d+2) -- still pure integer compare.
    scale_exp = (eta_bits - 1) * (d + 2)

    def block(rng, count):
        js = _grid_batch(d, rng=rng, eta_bits=eta_bits, n=count * npts)
        pts = js.reshape(count, npts, d)
        dets = []
        for inst in pts:
            rows = [[int(x) for x in row] for row in inst]
            lifted = [r + [sum(c * c for c in r)] for r in rows]
            dets.append(det_cofactor(lifted))
        hits = np.zeros(len(thresholds), dtype=np.int64)
        mags = [abs(v) for v in dets]
        for k, V in enumerate(thresholds):
            limit = Fraction(V) * (1 << scale_exp)
            bound_int = limit.numerator // limit.denominator
            hits[k] = sum(1 for m in mags if m <= bound_int)
        return hits

    return block


# ---------------------------------------------------------------------------
# Failure-rate estimation (the filter itself, on grid inputs)


def _round_array(x: np.ndarray, bits: int) -> np.ndarray:
    """Round float64 values to `bits` significant bits, ties to even.

    Valid as a model of direct b-bit rounding for bits <= 25: rounding the
    exact value to 53 bits (the hardware op) and then to b bits agrees with
    rounding straight to b bits whenever 53 >= 2b + 2.
    """
    if bits >= 53:
        return x
    m, e = np.frexp(x)
    return np.ldexp(np.rint(np.ldexp(m, bits)), e - bits)


_VECTOR_BITS_LIMIT = 25


def _eval_rounded_batch(scheme, coords: np.ndarray, bits: int) -> np.ndarray:
    """Vectorised rounded evaluation of a scheme over (n, rows, delta) input."""
    if bits != 53 and bits > _VECTOR_BITS_LIMIT:
        raise ValueError(
            f"vectorised rounding supports bits <= {_VECTOR_BITS_LIMIT} or 53")
    values: dict[int, np.ndarray] = {}
    for node in scheme.walk():
        if isinstance(node, Leaf):
            r, c = node.slot
            v = coords[:, r, c]
        elif isinstance(node, Mul):
            v = _round_array(values[id(node.left)] * values[id(node.right)], bits)
            if node.sign < 0:
                v = -v
        else:
            v = _round_array(values[id(node.left)] + values[id(node.right)], bits)
        values[id(node)] = v
    return values[id(scheme.root)]


def estimate_failure_rate(cfg: ExperimentConfig,
                          precision: Optional[PrecisionConfig] = None,
                          workers: int = 1) -> EstimateRow:
    """Fraction of grid-sampled instances the rounded stage cannot certify.

    The domain must be a grid (failures are a precision phenomenon: on
    continuous inputs the threshold comparison has probability-zero ties and
    no reference pitch).  Precision defaults to the grid's own eta_bits.
    The attached bound is rho(delta, bits, eta).
    """
    if cfg.domain.kind != "grid":
        raise ConfigError("failure-rate estimation requires a grid domain")
    if cfg.predicate is not PredicateKind.INSPHERE and \
            cfg.predicate is not PredicateKind.WHICHSIDE:
        raise ConfigError(f"unknown predicate {cfg.predicate!r}")
    if cfg.predicate is PredicateKind.INSPHERE:
        raise ConfigError(
            "the failure bound rho applies to the whichside filter; "
            "use filter_stats for insphere streams")
    d = cfg.domain.delta
    eta_bits = cfg.domain.eta_bits
    prec = precision if precision is not None else PrecisionConfig(eta_bits)
    b = prec.bits
    if b != 53 and b > _VECTOR_BITS_LIMIT:
        raise ConfigError(
            f"failure-rate runs support bits <= {_VECTOR_BITS_LIMIT} or 53")
    scheme = scheme_for(PredicateKind.WHICHSIDE, d)
    eps = threshold_for(PredicateKind.WHICHSIDE, d, prec)
    eps_f = float(eps)  # exact: small integer coefficient times 2**-b
    pitch = 2.0 ** (1 - eta_bits)

    def block(rng, count):
        js = _grid_batch(d, rng=rng, eta_bits=eta_bits, n=count * d)
        coords = js.reshape(count, d, d).astype(np.float64) * pitch
        vals = _eval_rounded_batch(scheme, coords, b)
        return np.array([int(np.count_nonzero(np.abs(vals) < eps_f))],
                        dtype=np.int64)

    uncertain = int(_run_blocked(cfg.n_trials, cfg.seed, block, workers)[0])
    return EstimateRow(
        delta=d,
        domain="grid",
        predicate=cfg.predicate.value,
        V=eps_f,
        n=cfg.n_trials,
        hits=uncertain,
        bound=bounds.rho(d, b, cfg.domain.eta),
        bound_note=f"rho({d}, {b}, 2**{1 - eta_bits})",
    )


# ---------------------------------------------------------------------------
# Dominance report and serialisation


@dataclass(frozen=True)
class DominanceReport:
    checked: int
    violations: tuple[EstimateRow, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return f"dominance ok: {self.checked} rows, no violations"
        lines = [f"dominance FAILED: {len(self.violations)} of {self.checked} rows"]
        for r in self.violations:
            lines.append(
                f"  delta={r.delta} {r.domain}/{r.predicate} V={r.V:g}: "
                f"p_hat={r.p_hat:.6g} (stderr {r.stderr:.2g}) "
                f"exceeds bound={r.bound:.6g}")
        return "\n".join(lines)


def dominance_report(rows: Iterable[EstimateRow]) -> DominanceReport:
    """Check bound >= p_hat - 3*stderr on every row; list violations."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to check")
    violations = tuple(r for r in rows if not r.passed)
    return DominanceReport(checked=len(rows), violations=violations)


CSV_COLUMNS = ["delta", "domain", "predicate", "V", "N", "hits",
               "p_hat", "stderr", "bound", "pass"]


def _row_record(r: EstimateRow) -> dict:
    return {
        "delta": r.delta,
        "domain": r.domain,
        "predicate": r.predicate,
        "V": r.V,
        "N": r.n,
        "hits": r.hits,
        "p_hat": r.p_hat,
        "stderr": r.stderr,
        "bound": r.bound,
        "pass": r.passed,
    }


def rows_to_csv(rows: Iterable[EstimateRow], file=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        rec = _row_record(r)
        w.writerow([
            rec["delta"], rec["domain"], rec["predicate"], repr(rec["V"]),
            rec["N"], rec["hits"], repr(rec["p_hat"]), repr(rec["stderr"]),
            repr(rec["bound"]), "true" if rec["pass"] else "false",
        ])
    text = buf.getvalue()
    _maybe_write(file, text)
    return text


def rows_to_json(rows: Iterable[EstimateRow], file=None) -> str:
    text = json.dumps([_row_record(r) for r in rows], indent=2)
    _maybe_write(file, text)
    return text


def _maybe_write(file, text: str):
    if file is None:
        return
    if hasattr(file, "write"):
        file.write(text)
    else:
        with open(file, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Config files


_CONFIG_KEYS = {"domain", "delta", "eta_bits", "predicate", "n_trials",
                "seed", "thresholds"}


def parse_config(source) -> ExperimentConfig:
    """Parse an experiment config from a file path or file-like object.

    Two formats: flat `key = value` lines (comments with #) or a JSON object
    with the same keys: domain, delta, eta_bits, predicate, n_trials, seed,
    thresholds.
    """
    if hasattr(source, "read"):
        text, name = source.read(), getattr(source, "name", "<config>")
    else:
        name = str(source)
        with open(source) as fh:
            text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{name}:{exc.lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{name}: JSON config must be an object")
        return _config_from_dict(data, name)
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{name}:{lineno}: unknown key {key!r}")
        if key in data:
            raise ConfigError(f"{name}:{lineno}: duplicate key {key!r}")
        data[key] = (value.strip(), lineno)
    return _config_from_dict(
        {k: v for k, (v, _) in data.items()}, name,
        line_of={k: ln for k, (_, ln) in data.items()})


def _config_from_dict(data: dict, name: str, line_of=None) -> ExperimentConfig:
    line_of = line_of or {}

    def where(key):
        return f"{name}:{line_of[key]}" if key in line_of else name

    def need(key):
        if key not in data:
            raise ConfigError(f"{name}: missing required key {key!r}")
        return data[key]

    def as_int(key, value):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where(key)}: {key} must be an integer, "
                              f"got {value!r}") from None

    for key in data:
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{name}: unknown key {key!r}")

    kind = str(need("domain")).strip().lower()
    delta = as_int("delta", need("delta"))
    eta_bits = as_int("eta_bits", data["eta_bits"]) if "eta_bits" in data else None
    try:
        domain = SampleDomain(kind, delta, eta_bits if kind == "grid" else None)
    except ValueError as exc:
        raise ConfigError(f"{where('domain')}: {exc}") from None
    if kind == "grid" and eta_bits is None:
        raise ConfigError(f"{name}: grid domain needs eta_bits")

    pred_raw = str(data.get("predicate", "whichside")).strip().lower()
    try:
        predicate = PredicateKind(pred_raw)
    except ValueError:
        raise ConfigError(f"{where('predicate')}: unknown predicate "
                          f"{pred_raw!r}") from None

    thresholds = data.get("thresholds", ())
    if isinstance(thresholds, str):
        parts = [p for p in thresholds.replace(",", " ").split() if p]
        try:
            thresholds = tuple(float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{where('thresholds')}: thresholds must be "
                              "numbers") from None
    else:
        thresholds = tuple(float(v) for v in thresholds)

    try:
        return ExperimentConfig(
            domain=domain,
            predicate=predicate,
            n_trials=as_int("n_trials", need("n_trials")),
            seed=as_int("seed", need("seed")),
            thresholds=thresholds,
        )
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
