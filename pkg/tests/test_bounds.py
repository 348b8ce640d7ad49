"""Tests for the probability-bound constants and CDF bounds.

The nine-digit pinned constants below were frozen from independent numerical
evaluation of the defining integrals before the module was written; they are
regression anchors, not copies of the implementation's own output.
"""

import math

import pytest

from detfilter import bounds
from detfilter.bounds import (
    BoundTable,
    ProbBound,
    alpha_grid,
    beta_insphere,
    bound_table,
    cdf1,
    cdf2_exact,
    cdf3_small_v_companion,
    cdf3_upper,
    chi,
    clamp01,
    constants_rows,
    derived_epsilon_coefficient,
    insphere1_bound,
    insphere1_reported_large_branch,
    insphere2_bound,
    insphere_d_bound,
    insphere_grid_term,
    k_delta,
    phi,
    product_split_bound,
    psi,
    reference_implied_eta,
    rho,
    sigma,
    tau_theta,
    unit_ball_volume,
    whichside_ball_bound,
    whichside_cube_bound,
    whichside_grid_bound,
)

# Frozen oracle values (nine significant digits where not exact).
PINNED_SIGMA = {1: 1.0, 2: 2.54647909, 3: 5.30143760, 4: 10.2471992,
                5: 19.0600862, 6: 34.6298214}
PINNED_PSI = {1: 1.0, 2: math.pi, 3: 20.5472301, 4: 379.808076,
              5: 22416.4780, 6: 4512626.30}
PINNED_K = {1: 1.0, 2: 2.54647909, 3: 13.5, 4: 138.337189,
            5: 2636.71875, 6: 91309.0994}
PINNED_ALPHA = {1: 0.5, 2: 2.0, 3: 7.79422863, 4: 32.0, 5: 139.754249, 6: 648.0}
PINNED_BETA = {1: 2.0, 2: 18.0, 3: 203.646753, 4: 2828.42712,
               5: 46765.3718, 6: 898269.262}
PINNED_PHI = {3: 69.7031490, 4: 407.609370, 5: 3974.17290, 6: 68494.5670}
PINNED_CHI = {3: -100.584340, 4: 350.019680, 5: 17724.6490, 6: 642188.640}

REL = 1e-7


# ---------------------------------------------------------------------------
# geometric constants


def test_unit_ball_volumes_closed_forms():
    assert unit_ball_volume(0) == 1.0
    assert unit_ball_volume(1) == 2.0
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2.0, rel=1e-15)
    assert unit_ball_volume(5) == pytest.approx(8.0 * math.pi ** 2 / 15.0, rel=1e-15)
    for bad in (-1, 1.5):
        with pytest.raises(ValueError):
            unit_ball_volume(bad)


@pytest.mark.parametrize("d,want", sorted(PINNED_SIGMA.items()))
def test_sigma_pinned(d, want):
    assert sigma(d) == pytest.approx(want, rel=REL)


@pytest.mark.parametrize("d,want", sorted(PINNED_PSI.items()))
def test_psi_pinned(d, want):
    assert psi(d) == pytest.approx(want, rel=REL)


@pytest.mark.parametrize("d,want", sorted(PINNED_K.items()))
def test_k_pinned(d, want):
    assert k_delta(d) == pytest.approx(want, rel=REL)


@pytest.mark.parametrize("d,want", sorted(PINNED_ALPHA.items()))
def test_alpha_pinned(d, want):
    assert alpha_grid(d) == pytest.approx(want, rel=REL)


@pytest.mark.parametrize("d,want", sorted(PINNED_BETA.items()))
def test_beta_pinned(d, want):
    assert beta_insphere(d) == pytest.approx(want, rel=REL)


def test_exact_rational_and_pi_values():
    # a handful of the constants collapse to exact closed forms
    assert sigma(2) == pytest.approx(8.0 / math.pi, rel=1e-14)
    assert psi(2) == pytest.approx(math.pi, rel=1e-14)
    assert k_delta(0) == 1.0
    assert k_delta(3) == pytest.approx(27.0 / 2.0, rel=1e-13)
    assert k_delta(5) == pytest.approx(84375.0 / 32.0, rel=1e-13)


@pytest.mark.parametrize("d", range(1, 9))
def test_sigma_is_k_ratio(d):
    # two independent code paths must agree: sigma from the volume formula,
    # k from the factorial/product formula
    assert sigma(d) == pytest.approx(k_delta(d) / k_delta(d - 1), rel=1e-11)


@pytest.mark.parametrize("d", range(1, 9))
def test_alpha_closed_form(d):
    assert alpha_grid(d) == pytest.approx((d / 2.0) * d ** (d / 2.0), rel=1e-13)


def test_domain_validation_of_constant_functions():
    for fn in (sigma, psi, alpha_grid, beta_insphere):
        for bad in (0, -2, 2.5):
            with pytest.raises(ValueError):
                fn(bad)


# ---------------------------------------------------------------------------
# tau/theta/phi/chi chain


def test_tau_theta_dimension_three():
    tau, theta = tau_theta(3)
    assert tau == 72.0
    assert theta == pytest.approx(164.4566394, rel=REL)
    assert theta == pytest.approx(36.0 * math.log(3.0) + 72.0 * math.log(2.0)
                                  + 72.0 + 3.0, rel=1e-13)


def test_tau_theta_rejects_low_dimension():
    for d in (1, 2):
        with pytest.raises(ValueError, match="dimension >= 3"):
            tau_theta(d)


@pytest.mark.parametrize("d,want", sorted(PINNED_PHI.items()))
def test_phi_pinned(d, want):
    assert phi(d) == pytest.approx(want, rel=REL)


@pytest.mark.parametrize("d,want", sorted(PINNED_CHI.items()))
def test_chi_pinned(d, want):
    assert chi(d) == pytest.approx(want, rel=REL)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_phi_chi_algebraic_identities(d):
    tau, theta = tau_theta(d)
    assert phi(d) ** 2 == pytest.approx(psi(d) * (tau + theta), rel=1e-12)
    assert chi(d) == pytest.approx(
        phi(d) * (1.0 - math.log((tau + theta) / psi(d))), rel=1e-12)


# ---------------------------------------------------------------------------
# exact / bounding CDFs in low dimensions


def test_cdf1():
    assert cdf1(0.0) == 0.0
    assert cdf1(0.3) == 0.3
    assert cdf1(1.0) == 1.0
    assert cdf1(7.0) == 1.0
    with pytest.raises(ValueError):
        cdf1(-0.1)


PINNED_CDF2 = {0.01: 0.025265215, 0.05: 0.122377013, 0.1: 0.235072535,
               0.5: 0.826993343, 1.0: 1.0}


@pytest.mark.parametrize("a,want", sorted(PINNED_CDF2.items()))
def test_cdf2_pinned(a, want):
    assert cdf2_exact(a) == pytest.approx(want, rel=5e-8)


def test_cdf2_properties():
    assert cdf2_exact(0.0) == 0.0
    grid = [i / 50.0 for i in range(51)]
    vals = [cdf2_exact(a) for a in grid]
    assert all(x <= y + 1e-15 for x, y in zip(vals, vals[1:]))
    for bad in (-0.01, 1.01):
        with pytest.raises(ValueError):
            cdf2_exact(bad)


@pytest.mark.parametrize("a", [0.1, 0.5])
def test_cdf2_against_independent_quadrature(a):
    # |det| = r1*r2*|sin phi| with radial density 2r and phi uniform;
    # integrate P(|sin phi| <= a/(r1 r2)) directly
    scipy_integrate = pytest.importorskip("scipy.integrate")

    def inner(r2, r1):
        return (2.0 / math.pi) * math.asin(min(1.0, a / (r1 * r2))) * 4.0 * r1 * r2

    val, _ = scipy_integrate.dblquad(inner, 0, 1, 0, 1, epsabs=1e-10)
    assert cdf2_exact(a) == pytest.approx(val, abs=1e-6)


def test_cdf3_upper_values():
    assert cdf3_upper(0.0) == 0.0
    assert cdf3_upper(1.0) == pytest.approx(3.0 * math.pi / 4.0, rel=1e-13)
    lead = 27.0 * math.pi / 16.0
    assert cdf3_upper(1e-3) / (lead * 1e-3) == pytest.approx(0.997465, rel=1e-4)
    assert cdf3_upper(1e-300) > 0.0  # log term extended continuously
    for bad in (-0.1, 1.5):
        with pytest.raises(ValueError):
            cdf3_upper(bad)


def test_cdf3_companion():
    v = 0.01
    want = 27.0 * math.pi / 16.0 * v + 27.0 * math.pi / 8.0 * v * v
    assert cdf3_small_v_companion(v) == pytest.approx(want, rel=1e-15)
    with pytest.raises(ValueError):
        cdf3_small_v_companion(-1.0)


# ---------------------------------------------------------------------------
# whichside bounds


def test_whichside_bounds_are_the_advertised_formulas():
    assert whichside_ball_bound(3, 0.01).value == pytest.approx(
        sigma(3) * 0.01, rel=1e-15)
    assert whichside_cube_bound(4, 2e-5).value == pytest.approx(
        psi(4) * 2e-5, rel=1e-15)
    eta = 2.0 ** -20
    got = whichside_grid_bound(3, 1e-6, eta)
    assert got.value == pytest.approx(psi(3) * (1e-6 + alpha_grid(3) * eta),
                                      rel=1e-15)
    assert "grid" in got.note
    for fn in (whichside_ball_bound, whichside_cube_bound):
        with pytest.raises(ValueError):
            fn(2, -1e-9)
    with pytest.raises(ValueError):
        whichside_grid_bound(2, 0.1, -1.0)


def test_prob_bound_container():
    b = ProbBound(1.7, note="x")
    assert float(b) == 1.7  # bounds above one are legal (vacuous)
    assert b.clamped() == 1.0
    assert ProbBound(0.25).clamped() == 0.25
    with pytest.raises(ValueError):
        ProbBound(-0.001)
    assert clamp01(-0.5) == 0.0
    assert clamp01(2.0) == 1.0
    assert clamp01(0.3) == 0.3


# ---------------------------------------------------------------------------
# insphere bounds


TRUE_INSPHERE1 = {0.01: 0.15447438, 0.25: 0.78827009, 1.0: 0.95962538}


def test_insphere1_branch_agreement_at_quarter():
    # both branches evaluate to exactly 7/8 at the knee
    small = 17.0 * 2.0 ** (1.0 / 3.0) / 4.0 * 0.25 ** (2.0 / 3.0) - 5.0 * 0.25
    assert small == pytest.approx(0.875, abs=1e-12)
    assert insphere1_bound(0.25).value == pytest.approx(0.875, abs=1e-12)
    assert insphere1_bound(0.25).note == "large-A branch"
    assert insphere1_bound(0.2).note == "small-A branch"


def test_insphere1_endpoints():
    assert insphere1_bound(0.0).value == 0.0
    assert insphere1_bound(2.0).value == pytest.approx(1.0, abs=1e-12)
    for bad in (-0.1, 2.5):
        with pytest.raises(ValueError):
            insphere1_bound(bad)


@pytest.mark.parametrize("a,true_p", sorted(TRUE_INSPHERE1.items()))
def test_insphere1_dominates_true_cdf(a, true_p):
    assert insphere1_bound(a).value >= true_p


def test_insphere1_reported_branch_is_not_a_bound():
    # the commonly quoted simplification undershoots the true CDF at the
    # knee, which is why the package evaluates the corrected branch instead
    quoted = insphere1_reported_large_branch(0.25)
    assert quoted == pytest.approx(0.5, abs=1e-12)
    assert quoted < TRUE_INSPHERE1[0.25]
    with pytest.raises(ValueError):
        insphere1_reported_large_branch(-1.0)


def test_insphere2_bound_formula_and_split_reproduction():
    v = 0.02
    want = math.pi * math.sqrt(2.0 * v)
    assert insphere2_bound(v).value == pytest.approx(want, rel=1e-15)
    # the closed form is the product-split combinator at its critical point:
    # factors bounded by pi*t and (pi/2)*t, split at alpha = sqrt(V/2)
    split = product_split_bound(lambda t: math.pi * t,
                                lambda t: math.pi * t / 2.0,
                                v, math.sqrt(v / 2.0))
    assert split == pytest.approx(want, rel=1e-12)
    # any other split point does worse
    worse = product_split_bound(lambda t: math.pi * t,
                                lambda t: math.pi * t / 2.0,
                                v, 2.0 * math.sqrt(v / 2.0))
    assert worse > want
    with pytest.raises(ValueError):
        insphere2_bound(-1e-12)
    with pytest.raises(ValueError):
        product_split_bound(lambda t: t, lambda t: t, 0.1, 0.0)


def test_insphere_d_bound_formula_and_floor():
    w = 0.01
    want = phi(3) * math.sqrt(w) * math.log(1.0 / w) + chi(3) * math.sqrt(w)
    got = insphere_d_bound(3, w)
    assert got.value == pytest.approx(want, rel=1e-13)
    assert "outside" not in got.note
    # at large W the negative chi term wins; the bound floors at zero and
    # the note flags that W is beyond the advertised regime
    floored = insphere_d_bound(3, 0.5)
    assert floored.value == 0.0
    assert "outside" in floored.note
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            insphere_d_bound(3, bad)


def test_insphere_grid_term():
    eta = 2.0 ** -30
    assert insphere_grid_term(2, eta) == pytest.approx(
        beta_insphere(2) * math.sqrt(eta), rel=1e-15)
    assert insphere_grid_term(4, 0.0) == 0.0
    with pytest.raises(ValueError):
        insphere_grid_term(2, -1.0)


# ---------------------------------------------------------------------------
# failure bound rho


def test_derived_epsilon_coefficients():
    want = {1: 0, 2: 2, 3: 13, 4: 76, 5: 516, 6: 3736, 7: 29096, 8: 247104}
    for d, c in want.items():
        assert derived_epsilon_coefficient(d) == c


def test_rho_formula_and_override():
    eta = 2.0 ** -52
    want = psi(3) * (13 * 2.0 ** -53 + alpha_grid(3) * eta)
    assert rho(3, 53, eta) == pytest.approx(want, rel=1e-15)
    # overriding the coefficient changes only the epsilon part
    assert rho(5, 53, eta, epsilon_coefficient=576) > rho(5, 53, eta)
    assert rho(5, 53, eta, epsilon_coefficient=516) == rho(5, 53, eta)
    with pytest.raises(ValueError):
        rho(3, 1, eta)
    with pytest.raises(ValueError):
        rho(3, 53, -1e-18)


def test_reference_implied_eta():
    for d in (2, 3, 4, 5, 6):
        assert reference_implied_eta(d) == pytest.approx(
            bounds.REFERENCE_GRID_TERM_B53[d] / alpha_grid(d), rel=1e-15)
    with pytest.raises(ValueError):
        reference_implied_eta(7)


# ---------------------------------------------------------------------------
# aggregate tables


def test_bound_table_low_dimension_has_no_chain():
    t = bound_table(2)
    assert isinstance(t, BoundTable)
    assert t.tau is None and t.theta is None and t.phi is None and t.chi is None
    assert t.sigma == sigma(2) and t.psi == psi(2)
    eta = 2.0 ** -52
    assert t.rho(53, eta) == rho(2, 53, eta)


def test_bound_table_chain_dimension():
    t = bound_table(4)
    assert t.tau == 128.0  # 8 * 4**2
    assert t.theta == pytest.approx(tau_theta(4)[1], rel=1e-15)
    assert t.phi == pytest.approx(phi(4), rel=1e-15)
    with pytest.raises(ValueError):
        bound_table(0)


def test_constants_rows_shape_and_notes():
    rows = constants_rows(delta_max=9)
    assert [r["delta"] for r in rows] == list(range(1, 10))
    keys = {"delta", "sigma", "psi", "k", "tau", "theta", "phi", "chi",
            "alpha", "beta", "epsilon_coefficient", "epsilon", "rho", "note"}
    assert all(set(r) == keys for r in rows)
    assert rows[0]["epsilon_coefficient"] == 0
    assert "exactly" in rows[0]["note"]
    assert rows[8]["epsilon"] is None
    assert "beyond dimension 8" in rows[8]["note"]
    for r in rows[1:8]:
        assert r["epsilon_coefficient"] == derived_epsilon_coefficient(r["delta"])
        assert r["epsilon"] == r["epsilon_coefficient"] * 2.0 ** -53
        assert r["rho"] == pytest.approx(rho(r["delta"], 53, 2.0 ** -52), rel=1e-15)
    with pytest.raises(ValueError):
        constants_rows(delta_max=0)
