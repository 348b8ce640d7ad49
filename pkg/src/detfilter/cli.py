"""Command-line front end.

Subcommands:
  constants  -- the per-dimension constants table (with epsilon and rho)
  epsilon    -- certified threshold for one dimension and bit count
  simulate   -- CDF experiment from a config file, CSV/JSON out
  failure    -- filter failure-rate experiment from a config file
  verify     -- canned bound-dominance suites; exit status reflects the result

Relative --out paths resolve against $DETFILTER_OUT when it is set.  All
numeric output uses dot decimals regardless of locale; constants tables
print 3 significant digits, machine formats carry full precision.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bounds
from .error_model import (
    MAX_DIMENSION,
    MAX_INSPHERE_DIMENSION,
    MIN_DIMENSION,
    PrecisionConfig,
    analyze,
    det_expansion_scheme,
    insphere_expansion_scheme,
)
from .montecarlo import (
    ConfigError,
    ExperimentConfig,
    SampleDomain,
    dominance_report,
    estimate_cdf,
    estimate_failure_rate,
    parse_config,
    rows_to_csv,
    rows_to_json,
)
from .predicates import PredicateKind

OUTPUT_DIR_ENV = "DETFILTER_OUT"

_QUICK_TRIALS = 50_000
_FULL_TRIALS = 1_000_000
_SUITE_SEED = 20260823

_WHICHSIDE_GRID_V = (1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 0.5, 1.0)
_INSPHERE1_V = (1e-3, 3e-3, 0.01, 0.03, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0)
_INSPHERE2_V = (1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 0.5, 1.0)
_INSPHERE3_V = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.03, 0.05, 0.1)


def _fmt3(x) -> str:
    if x is None:
        return "-"
    return f"{float(x):.3g}"


def _resolve_out(path: str | None):
    if path is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _emit(text: str, out: str | None):
    path = _resolve_out(out)
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}")


# ---------------------------------------------------------------------------
# constants


_CONSTANTS_COLUMNS = ["delta", "sigma", "psi", "k", "tau", "theta", "phi",
                      "chi", "alpha", "beta", "epsilon_coefficient",
                      "epsilon", "rho", "note"]


def cmd_constants(args) -> int:
    rows = bounds.constants_rows(delta_max=args.delta_max, b=args.bits)
    if args.format == "json":
        import json
        _emit(json.dumps(rows, indent=2), args.out)
        return 0
    lines = [",".join(_CONSTANTS_COLUMNS)]
    for row in rows:
        cells = []
        for col in _CONSTANTS_COLUMNS:
            v = row[col]
            if col in ("delta", "epsilon_coefficient"):
                cells.append("" if v is None else str(v))
            elif col == "note":
                cells.append(v or "")
            else:
                cells.append("" if v is None else _fmt3(v))
        lines.append(",".join(cells))
    text = "\n".join(lines)
    if args.format == "csv":
        _emit(text, args.out)
    else:
        widths = [max(len(r.split(",")[i]) for r in lines)
                  for i in range(len(_CONSTANTS_COLUMNS) - 1)]
        pretty = []
        for line in lines:
            cells = line.split(",")
            body = "  ".join(c.rjust(w) for c, w in zip(cells, widths))
            note = cells[-1]
            pretty.append(body + ("   " + note if note else ""))
        _emit("\n".join(pretty), args.out)
    return 0


# ---------------------------------------------------------------------------
# epsilon


def cmd_epsilon(args) -> int:
    kind = PredicateKind(args.predicate)
    cfg = PrecisionConfig(args.bits)
    try:
        if kind is PredicateKind.WHICHSIDE:
            scheme = det_expansion_scheme(args.delta)
        else:
            scheme = insphere_expansion_scheme(args.delta)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rb = analyze(scheme, cfg)
    coeff = rb.error_coefficient(cfg)
    coeff_txt = str(coeff.as_int()) if coeff.is_integer() else str(float(coeff))
    lines = [
        f"predicate: {kind.value}",
        f"delta:     {args.delta}",
        f"bits:      {args.bits}",
        f"G:         {rb.M.as_int() if rb.M.is_integer() else float(rb.M)}",
        f"epsilon:   {coeff_txt} * 2^-{args.bits} = {float(rb.m):.3e}",
        f"ops:       {scheme.operation_count()}",
    ]
    if kind is PredicateKind.INSPHERE:
        lines.append("note:      insphere thresholds are derived by this "
                     "package's calculus (no tabulated reference values)")
    _emit("\n".join(lines), args.out)
    return 0


# ---------------------------------------------------------------------------
# simulate / failure


def _load_config(path: str, seed_override: int | None) -> ExperimentConfig:
    cfg = parse_config(path)
    if seed_override is not None:
        cfg = ExperimentConfig(cfg.domain, cfg.predicate, cfg.n_trials,
                               seed_override, cfg.thresholds)
    return cfg


def cmd_simulate(args) -> int:
    try:
        cfg = _load_config(args.config, args.seed)
        rows = estimate_cdf(cfg, workers=args.workers)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rows_to_json(rows) if args.format == "json" else rows_to_csv(rows)
    _emit(text, args.out)
    report = dominance_report(rows)
    if not report.ok:
        print(str(report), file=sys.stderr)
        return 1
    return 0


def cmd_failure(args) -> int:
    try:
        cfg = _load_config(args.config, args.seed)
        row = estimate_failure_rate(cfg, workers=args.workers)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rows_to_json([row]) if args.format == "json" else rows_to_csv([row])
    _emit(text, args.out)
    if not row.passed:
        print(str(dominance_report([row])), file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# verify


def _suite_experiments(name: str, n_trials: int):
    """Yield (label, kind, maker) where maker() runs and returns rows."""
    W = PredicateKind.WHICHSIDE
    I = PredicateKind.INSPHERE
    cdf = []
    fail = []
    if name in ("whichside-2d", "all"):
        cdf += [("ball d=2", SampleDomain.ball(2), W, _WHICHSIDE_GRID_V),
                ("cube d=2", SampleDomain.cube(2), W, _WHICHSIDE_GRID_V)]
    if name in ("whichside-ball", "all"):
        cdf += [(f"ball d={d}", SampleDomain.ball(d), W, _WHICHSIDE_GRID_V)
                for d in (1, 2, 3, 4)]
    if name in ("whichside-cube", "all"):
        cdf += [(f"cube d={d}", SampleDomain.cube(d), W, _WHICHSIDE_GRID_V)
                for d in (1, 2, 3, 4)]
    if name in ("whichside-grid", "all"):
        cdf += [(f"grid d={d} b=12", SampleDomain.grid(d, 12), W,
                 _WHICHSIDE_GRID_V) for d in (2, 3)]
    if name in ("insphere", "all"):
        cdf += [("insphere d=1", SampleDomain.cube(1), I, _INSPHERE1_V),
                ("insphere d=2", SampleDomain.cube(2), I, _INSPHERE2_V),
                ("insphere d=3", SampleDomain.cube(3), I, _INSPHERE3_V)]
    if name in ("failure", "all"):
        fail += [(f"failure d={d} b={b}", SampleDomain.grid(d, b))
                 for d in (2, 3) for b in (8, 12)]
    if not cdf and not fail:
        return None
    experiments = []
    for i, (label, domain, kind, vs) in enumerate(cdf):
        cfg = ExperimentConfig(domain, kind, n_trials, _SUITE_SEED + i, vs)
        experiments.append((label, "cdf", cfg))
    for i, (label, domain) in enumerate(fail):
        cfg = ExperimentConfig(domain, PredicateKind.WHICHSIDE, n_trials,
                               _SUITE_SEED + 1000 + i)
        experiments.append((label, "failure", cfg))
    return experiments


SUITE_NAMES = ("whichside-2d", "whichside-ball", "whichside-cube",
               "whichside-grid", "insphere", "failure", "all")


def cmd_verify(args) -> int:
    n = _QUICK_TRIALS if args.quick else _FULL_TRIALS
    experiments = _suite_experiments(args.suite, n)
    if experiments is None:
        print(f"error: unknown suite {args.suite!r}; choose from "
              f"{', '.join(SUITE_NAMES)}", file=sys.stderr)
        return 2
    all_rows = []
    failures = 0
    for label, mode, cfg in experiments:
        if mode == "cdf":
            rows = estimate_cdf(cfg, workers=args.workers)
        else:
            rows = [estimate_failure_rate(cfg, workers=args.workers)]
        all_rows.extend(rows)
        report = dominance_report(rows)
        status = "ok" if report.ok else "FAIL"
        worst = min(r.bound - (r.p_hat - 3 * r.stderr) for r in rows)
        print(f"  {label:<22} N={cfg.n_trials:<9} rows={len(rows):<3} "
              f"{status}  (min slack {worst:.3g})")
        if not report.ok:
            failures += len(report.violations)
            print("    " + str(report).replace("\n", "\n    "))
    if args.out:
        _emit(rows_to_csv(all_rows), args.out)
    if failures:
        print(f"verify: {failures} dominance violations", file=sys.stderr)
        return 1
    print(f"verify: all {len(all_rows)} rows dominated by their bounds")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="detfilter",
        description="Certified determinant-sign filters: thresholds, "
                    "probability bounds, and Monte Carlo validation.",
        epilog=f"Relative --out paths resolve against ${OUTPUT_DIR_ENV} "
               "when set.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="per-dimension constants table")
    c.add_argument("--delta-max", type=int, default=6, dest="delta_max")
    c.add_argument("--format", choices=("text", "csv", "json"), default="text")
    c.add_argument("--bits", type=int, default=53)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_constants)

    e = sub.add_parser("epsilon", help="certified threshold for one dimension")
    e.add_argument("--delta", type=int, required=True)
    e.add_argument("--bits", type=int, required=True)
    e.add_argument("--predicate", choices=("whichside", "insphere"),
                   default="whichside")
    e.add_argument("--out")
    e.set_defaults(fn=cmd_epsilon)

    s = sub.add_parser("simulate", help="CDF experiment from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_simulate)

    f = sub.add_parser("failure", help="filter failure-rate experiment")
    f.add_argument("--config", required=True)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--format", choices=("csv", "json"), default="csv")
    f.add_argument("--out")
    f.set_defaults(fn=cmd_failure)

    v = sub.add_parser("verify", help="canned bound-dominance suites")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--quick", action="store_true",
                   help=f"reduce trials to {_QUICK_TRIALS}")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out")
    v.set_defaults(fn=cmd_verify)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
