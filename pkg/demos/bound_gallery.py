# Quick empirical check of every probability bound in the package.
# 40k samples per cell, so expect ~0.5% noise; the point is eyeballing
# that bound >= estimate everywhere, not precision.

import numpy as np

from detfilter.bounds import (
    cdf2_exact,
    insphere1_bound,
    insphere2_bound,
    insphere_d_bound,
    whichside_ball_bound,
    whichside_cube_bound,
)
from detfilter.montecarlo import ExperimentConfig, SampleDomain, estimate_cdf
from detfilter.predicates import PredicateKind

N = 40_000
SEED = 4242
VS = (0.001, 0.01, 0.1, 0.5)
# VS = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)   # wider sweep, same story

W = PredicateKind.WHICHSIDE
I = PredicateKind.INSPHERE


def show(title, cfg, bound_fn):
    rows = estimate_cdf(cfg, workers=2)
    print(title)
    for r in rows:
        b = bound_fn(r.V)
        flag = "" if r.p_hat <= b + 3 * r.stderr else "   <-- VIOLATION"
        print(f"  V={r.V:<7g} p_hat={r.p_hat:.4f}  bound={b:.4f}{flag}")
    print()


def main():
    s = 0
    for d in (2, 3):
        show(f"whichside, ball, d={d}",
             ExperimentConfig(SampleDomain.ball(d), W, N, SEED + s, VS),
             lambda v, d=d: whichside_ball_bound(d, v).value)
        s += 1
    for d in (2, 3):
        show(f"whichside, cube, d={d}",
             ExperimentConfig(SampleDomain.cube(d), W, N, SEED + s, VS),
             lambda v, d=d: whichside_cube_bound(d, v).value)
        s += 1

    show("insphere, cube, d=1 (piecewise bound)",
         ExperimentConfig(SampleDomain.cube(1), I, N, SEED + s, (0.01, 0.1, 0.25, 1.0)),
         lambda v: insphere1_bound(v).value)
    s += 1
    show("insphere, cube, d=2",
         ExperimentConfig(SampleDomain.cube(2), I, N, SEED + s, VS),
         lambda v: insphere2_bound(v).value)
    s += 1
    show("insphere, cube, d=3 (small-W regime)",
         ExperimentConfig(SampleDomain.cube(3), I, N, SEED + s,
                          (1e-6, 1e-4, 1e-3, 0.01)),
         lambda v: insphere_d_bound(3, v).value)

    # bonus: the d=2 ball bound against the *exact* CDF, to see the slack
    print("d=2 ball: exact CDF vs linear bound")
    for v in VS:
        print(f"  V={v:<7g} exact={cdf2_exact(v):.4f}  "
              f"bound={whichside_ball_bound(2, v).value:.4f}")


if __name__ == "__main__":
    main()
