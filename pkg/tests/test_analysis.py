import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwlab import (
    Box,
    DHRecursion,
    Harmonic,
    L2Ball,
    LineSearch,
    Power,
    Problem,
    Simplex,
    StopRule,
    beta_bound_report,
    beta_recursion,
    curvature_bound_holder,
    curvature_bound_modulus,
    curvature_floor_strongly_convex,
    delta_from,
    estimate_curvature,
    fit_rate,
    make_quadratic,
    make_t_alpha,
    polyak_recursion,
    polyak_sequence_bound,
    probe_curvature_divergence,
    rate_bound_classic,
    rate_bound_line_search,
    rate_bound_open_loop,
    solve,
    xu_recursion_check,
)
from fwlab.analysis import DEFAULT_GAMMA_GRID
from fwlab.solver import IterationRecord, SolveTrace, Termination


# --- curvature estimation ------------------------------------------------------

def test_scalar_power_curvature_is_the_exponent_exactly():
    # at the pair (0, 1) and any gamma the scaled deviation collapses to the
    # exponent itself, so the estimate is exact, not approximate
    obj = make_t_alpha(1.5)
    fs = Box(1, np.array([0.0]), np.array([1.0]))
    est = estimate_curvature(obj, fs, sigma=1.5, n_samples=64, seed=0)
    assert est.sampled_value == pytest.approx(1.5, abs=1e-12)


def test_quadratic_curvature_reaches_squared_diameter():
    fs = Simplex(3)
    est = estimate_curvature(make_quadratic(np.zeros(3), fs), fs, sigma=2.0,
                             n_samples=128, seed=0)
    # vertices pairs are included: the supremum ||s-x||^2 = 2 is attained
    assert est.sampled_value == pytest.approx(2.0, abs=1e-9)
    assert est.holder_upper_bound == pytest.approx(2.0, abs=1e-12)
    assert est.sampled_value <= est.holder_upper_bound * (1.0 + 1e-6)


def test_curvature_estimate_is_prefix_monotone_in_samples():
    fs = L2Ball(3, 1.0)
    obj = make_quadratic(np.array([0.2, -0.1, 0.3]), fs)
    prev = 0.0
    for n in [16, 64, 256]:
        est = estimate_curvature(obj, fs, sigma=2.0, n_samples=n, seed=42)
        assert est.sampled_value >= prev
        prev = est.sampled_value


def test_gamma_grid_must_live_in_unit_interval_and_include_one():
    fs = Simplex(2)
    obj = make_quadratic(np.zeros(2), fs)
    with pytest.raises(ValueError):
        estimate_curvature(obj, fs, sigma=2.0, gamma_grid=[0.5, 2.0, 1.0])
    with pytest.raises(ValueError):
        estimate_curvature(obj, fs, sigma=2.0, gamma_grid=[0.1, 0.5])
    assert DEFAULT_GAMMA_GRID[-1] == 1.0
    assert len(DEFAULT_GAMMA_GRID) == 14


def test_divergence_probe_blows_up_only_for_unbounded_curvature():
    fs = Box(1, np.array([0.0]), np.array([1.0]))
    value = probe_curvature_divergence(make_t_alpha(1.5), fs, sigma=2.0)
    assert value > 1e3
    # order matched to the Holder exponent: bounded; the roundoff-aware depth
    # cap keeps amplified float noise from faking a divergence
    value = probe_curvature_divergence(make_t_alpha(1.5), fs, sigma=1.5)
    assert 1.5 - 1e-9 <= value <= 1.7
    fs3 = Simplex(3)
    value = probe_curvature_divergence(make_quadratic(np.zeros(3), fs3), fs3,
                                       sigma=2.0)
    assert 2.0 - 1e-9 <= value < 1e3


# --- analytic curvature bounds -----------------------------------------------------

def test_holder_curvature_bound_values():
    assert curvature_bound_holder(1.0, 1.0, math.sqrt(2.0)) == pytest.approx(2.0, abs=1e-12)
    assert curvature_bound_holder(1.5, 0.5, 1.0) == pytest.approx(1.5, abs=1e-15)
    # scalar power family: constant alpha with nu = alpha-1 on a unit segment
    assert curvature_bound_holder(1.5, 0.5, 1.0) == pytest.approx(1.5)


def test_modulus_bound_linear_omega_recovers_lipschitz_bound():
    table = [(t, t) for t in np.linspace(0.01, 2.0, 50)]
    got = curvature_bound_modulus(table, sigma=2.0, delta=math.sqrt(2.0),
                                  gamma_grid=DEFAULT_GAMMA_GRID)
    assert got == pytest.approx(2.0, rel=1e-12)


def test_modulus_bound_zero_omega_is_zero():
    table = [(t, 0.0) for t in np.linspace(0.1, 1.0, 5)]
    assert curvature_bound_modulus(table, 2.0, 1.0, DEFAULT_GAMMA_GRID) == 0.0


def test_modulus_bound_tracks_holder_bound_within_quadrature_error():
    nu = 0.5
    taus = np.linspace(1e-4, 2.0, 1000)
    table = [(t, 1.3 * t ** nu) for t in taus]
    got = curvature_bound_modulus(table, sigma=1.0 + nu, delta=2.0,
                                  gamma_grid=DEFAULT_GAMMA_GRID)
    want = curvature_bound_holder(1.3, nu, 2.0)
    assert abs(got - want) / want < 0.01


def test_modulus_bound_input_validation():
    with pytest.raises(ValueError):
        curvature_bound_modulus([], 2.0, 1.0, DEFAULT_GAMMA_GRID)
    with pytest.raises(ValueError, match="increasing"):
        curvature_bound_modulus([(0.5, 1.0), (0.2, 2.0)], 2.0, 1.0, DEFAULT_GAMMA_GRID)
    with pytest.raises(ValueError, match="nondecreasing"):
        curvature_bound_modulus([(0.2, 2.0), (0.5, 1.0)], 2.0, 1.0, DEFAULT_GAMMA_GRID)


def test_strong_convexity_floor_diagnostic():
    assert curvature_floor_strongly_convex(0.5, 2.0, 2.0) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        curvature_floor_strongly_convex(0.0, 2.0, 1.0)


# --- rate bound curves ----------------------------------------------------------------

def test_line_search_bound_closed_forms():
    b = rate_bound_line_search(theta0=1.0, sigma=2.0, C_sigma=2.0)
    for k in [1, 2, 5, 10]:
        assert b.bound(k) == pytest.approx(1.0 / (1.0 + k / 4.0), rel=1e-12)
    assert b.bound(0) == 1.0
    b = rate_bound_line_search(theta0=1.0, sigma=1.5, C_sigma=1.0)
    assert b.bound(4) == pytest.approx((1.0 + (2.0 / 3.0) * 4.0) ** -0.5, rel=1e-12)
    assert b.bound(4) == pytest.approx(0.5222, abs=5e-5)


def test_open_loop_bound_closed_forms():
    b = rate_bound_open_loop(Delta=1.0, sigma=2.0)
    for k in [1, 2, 8]:
        assert b.bound(k) == pytest.approx(4.0 / k, rel=1e-12)
    b = rate_bound_open_loop(Delta=2.0, sigma=1.5)
    assert b.bound(9) == pytest.approx(1.5 ** 1.5 * 2.0 / 3.0, rel=1e-12)
    assert b.bound(9) == pytest.approx(1.2247, abs=5e-5)


def test_composite_open_loop_bound_shifts_the_index():
    plain = rate_bound_open_loop(Delta=1.0, sigma=2.0, composite=False)
    comp = rate_bound_open_loop(Delta=1.0, sigma=2.0, composite=True)
    assert comp.bound(0) == 4.0  # 4*Delta/(0+1)
    assert comp.bound(3) == plain.bound(4)


def test_classic_bound_and_positivity():
    b = rate_bound_classic(2.0)
    assert b.bound(0) == 2.0
    assert b.bound(2) == 1.0
    ks = np.arange(1, 50)
    for bound in [b, rate_bound_open_loop(1.0, 1.5),
                  rate_bound_line_search(1.0, 2.0, 2.0)]:
        curve = bound.curve(ks)
        assert np.all(curve > 0)
        assert np.all(np.diff(curve) <= 0)


def test_bound_parameter_validation():
    with pytest.raises(ValueError):
        rate_bound_line_search(theta0=0.0, sigma=2.0, C_sigma=1.0)
    with pytest.raises(ValueError):
        rate_bound_open_loop(Delta=-1.0, sigma=2.0)
    with pytest.raises(ValueError):
        rate_bound_open_loop(Delta=1.0, sigma=2.5)
    with pytest.raises(ValueError):
        rate_bound_classic(0.0)


def test_delta_assembly_takes_the_max():
    assert delta_from(theta0=0.3, c_sigma=2.0, sigma=2.0) == 1.0
    assert delta_from(theta0=3.0, c_sigma=2.0, sigma=2.0) == 3.0


# --- the averaged recursion and its claimed envelope -------------------------------------

def test_beta_recursion_hand_values():
    betas = beta_recursion(Harmonic(2.0), sigma=2.0, K=2)
    assert betas[0] == 1.0
    assert betas[1] == 1.0  # (1-1)*1 + 1^2
    assert betas[2] == pytest.approx(7.0 / 9.0, abs=1e-15)


@given(
    st.sampled_from([Harmonic(2.0), DHRecursion(1.0), Power(1.0, 0.5)]),
    st.sampled_from([1.25, 1.5, 2.0]),
)
@settings(max_examples=20)
def test_beta_recursion_stays_in_unit_interval(rule, sigma):
    betas = beta_recursion(rule, sigma, K=500)
    assert np.all(betas > 0.0)
    assert np.all(betas <= 1.0)


def test_beta_envelope_holds_for_classic_harmonic_at_order_two():
    rep = beta_bound_report(Harmonic(2.0), sigma=2.0, K=100_000)
    assert rep.holds
    assert rep.max_ratio <= 1.0
    # k * beta_k <= 4 with the max ratio creeping toward 1 from below
    assert rep.max_ratio == pytest.approx(0.999879, abs=1e-5)


def test_beta_envelope_first_violations_are_frozen():
    # the claimed sigma^sigma/k^(sigma-1) envelope fails off the matched
    # schedule; these indices pin the measured behavior
    expected = {
        (2.0, "harmonic"): None,
        (1.5, "harmonic"): 59,
        (1.25, "harmonic"): 23,
        (2.0, "dh"): 31,
        (1.5, "dh"): 75,
        (1.25, "dh"): 230,
    }
    for (sigma, kind), first in expected.items():
        rule = Harmonic(2.0) if kind == "harmonic" else DHRecursion(1.0)
        rep = beta_bound_report(rule, sigma, K=1000)
        assert rep.first_violation == first, (sigma, kind)
        assert rep.holds is (first is None)


def test_beta_dh_order_two_is_the_harmonic_number_ratio():
    # closed form beta_k = H_k / k for the rational-decay rule at order 2
    betas = beta_recursion(DHRecursion(1.0), sigma=2.0, K=200)
    hk = np.cumsum(1.0 / np.arange(1, 201))
    assert np.allclose(betas[1:], hk / np.arange(1, 201), rtol=1e-12)


def test_beta_recursion_input_validation():
    with pytest.raises(ValueError):
        beta_recursion(LineSearch(1e-10, 200), 2.0, 10)
    with pytest.raises(ValueError):
        beta_recursion(Harmonic(2.0), 1.0, 10)
    with pytest.raises(ValueError):
        beta_recursion(Harmonic(2.0), 2.0, 0)


# --- scalar recursion envelopes ---------------------------------------------------------

def test_polyak_bound_closed_form_at_unit_eta():
    bound = polyak_sequence_bound(1.0, [0.1] * 10, eta=1.0)
    ks = np.arange(11)
    assert np.allclose(bound, 1.0 / (1.0 + 0.1 * ks), rtol=1e-15)


def test_polyak_recursion_frozen_value_and_domination():
    alphas = polyak_recursion(1.0, [0.1] * 10, eta=1.0)
    # frozen by direct simulation of the exact float recursion
    assert alphas[10] == 0.48171287847015176
    bound = polyak_sequence_bound(1.0, [0.1] * 10, eta=1.0)
    assert bound[10] == pytest.approx(0.5, abs=1e-15)
    assert np.all(alphas <= bound + 1e-15)


def test_polyak_zero_start_stays_zero():
    assert np.array_equal(polyak_sequence_bound(0.0, [0.3, 0.2], eta=0.5),
                          np.zeros(3))


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.5, 1.0]))
@settings(max_examples=40)
def test_polyak_bound_dominates_random_recursions(seed, eta):
    rng = np.random.default_rng(seed)
    alpha0 = float(rng.uniform(0.1, 1.0))
    betas = rng.uniform(0.0, 1.0, size=200)
    # keep the recursion in its contraction regime: beta*alpha0^eta <= 1
    betas = betas / max(1.0, float(betas.max()) * alpha0 ** eta)
    alphas = polyak_recursion(alpha0, betas, eta)
    bound = polyak_sequence_bound(alpha0, betas, eta)
    assert np.all(alphas >= 0.0)
    assert np.all(alphas <= bound * (1.0 + 1e-12) + 1e-15)


def test_xu_recursion_exact_zero_when_first_eta_is_one():
    rep = xu_recursion_check(1.0, etas=[1.0 / (k + 1) for k in range(100)],
                             epsilons=[0.0] * 100)
    assert rep.final_alpha == 0.0
    assert rep.tail_max == 0.0


def test_xu_recursion_telescopes_for_shifted_harmonic_weights():
    K = 1000
    rep = xu_recursion_check(1.0, etas=[1.0 / (k + 2) for k in range(K)],
                             epsilons=[0.0] * K)
    assert rep.final_alpha == pytest.approx(1.0 / (K + 1), rel=1e-12)


def test_xu_recursion_frozen_long_horizon_value():
    K = 1_000_000
    etas = 1.0 / (np.arange(K) + 1.0)
    rep = xu_recursion_check(1.0, etas=etas, epsilons=etas)
    assert rep.final_alpha == 1.4392726722865793e-05
    assert rep.final_alpha < 1e-2
    assert rep.eta_sum_keeps_growing


def test_xu_recursion_flags_stalled_driver():
    rep = xu_recursion_check(0.7, etas=[0.0] * 50, epsilons=[0.0] * 50)
    assert rep.final_alpha == 0.7
    assert not rep.eta_sum_keeps_growing


def test_xu_recursion_input_validation():
    with pytest.raises(ValueError):
        xu_recursion_check(1.0, [0.5, 1.5], [0.0, 0.0])
    with pytest.raises(ValueError):
        xu_recursion_check(1.0, [0.5], [0.0, 0.0])
    with pytest.raises(ValueError):
        xu_recursion_check(1.0, [0.5], [-1.0])


# --- empirical rate fitting --------------------------------------------------------------

def _synthetic_trace(objs):
    records = [IterationRecord(k, np.zeros(1), float(v), 0.0, 0.0, 0.0)
               for k, v in enumerate(objs)]
    return SolveTrace(records, Termination("max_iter", np.zeros(1), float(objs[-1])))


def test_fit_rate_recovers_exact_power_laws():
    ks = np.arange(1, 200)
    for p, slope in [(1.0, -1.0), (0.5, -0.5)]:
        objs = np.concatenate(([2.0], 1.0 + ks ** -p))
        fit = fit_rate(_synthetic_trace(objs), opt=1.0, tail_fraction=0.5)
        assert fit["slope"] == pytest.approx(slope, abs=1e-6)
        assert fit["r2"] > 0.999999


def test_fit_rate_on_a_real_solve_shows_first_order_decay():
    fs = Simplex(100)
    problem = Problem(fs, make_quadratic(np.zeros(100), fs))
    trace = solve(problem, Harmonic(2.0), x0=np.eye(100)[0],
                  stop=StopRule(max_iter=2000))
    fit = fit_rate(trace, opt=1.0 / 200.0, tail_fraction=0.5)
    assert fit["slope"] <= -0.9


def test_fit_rate_preconditions():
    objs = np.concatenate(([2.0], 1.0 + np.arange(1, 12) ** -1.0))
    with pytest.raises(ValueError, match="20"):
        fit_rate(_synthetic_trace(objs), opt=1.0, tail_fraction=0.5)
    # converged trace: above opt, but inside the roundoff floor around it
    near = np.full(60, 1.0 + 1e-15)
    near[0] = 2.0
    with pytest.raises(ValueError, match="usable"):
        fit_rate(_synthetic_trace(near), opt=1.0, tail_fraction=0.5)
