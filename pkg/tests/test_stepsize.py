import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fwlab import (
    DHRecursion,
    Harmonic,
    LineSearch,
    Power,
    is_open_loop,
    line_search,
    line_search_quadratic_exact,
    rule_from_descriptor,
    schedule_value,
    schedule_values,
    validate_open_loop,
)
from fwlab.stepsize import dh_terms_iterative


# --- golden-section line search ------------------------------------------------

def test_line_search_locates_interior_quadratic_minimum():
    gamma = line_search(lambda g: (g - 0.3) ** 2, tol=1e-10, max_evals=200)
    assert abs(gamma - 0.3) < 1e-9


def test_line_search_returns_endpoint_for_monotone_profiles():
    assert line_search(lambda g: g, tol=1e-10, max_evals=200) == 0.0
    assert line_search(lambda g: -g, tol=1e-10, max_evals=200) == 1.0


def test_line_search_constant_profile_ties_to_smallest_gamma():
    assert line_search(lambda g: 5.0, tol=1e-10, max_evals=200) == 0.0


def test_line_search_respects_eval_budget():
    calls = []

    def phi(g):
        calls.append(g)
        return (g - 0.5) ** 2

    line_search(phi, tol=1e-15, max_evals=10)
    assert len(calls) <= 10


def test_line_search_returns_best_evaluated_point():
    # a narrow dip the coarse budget cannot localize; the returned gamma must
    # still be one of the evaluated points with the smallest seen value
    seen = {}

    def phi(g):
        v = 1.0 - math.exp(-((g - 0.123456) ** 2) / 1e-6)
        seen[g] = v
        return v

    gamma = line_search(phi, tol=1e-10, max_evals=40)
    assert gamma in seen
    assert seen[gamma] == min(seen.values())


def test_line_search_rejects_non_finite_values():
    with pytest.raises(ValueError, match="not finite"):
        line_search(lambda g: float("nan"), tol=1e-8, max_evals=50)


@given(st.floats(-2.0, 2.0), st.floats(1e-6, 2.0))
def test_exact_quadratic_step_matches_clipped_vertex(a, b):
    gamma = line_search_quadratic_exact(a, b)
    assert gamma == max(0.0, min(1.0, -a / b))


def test_exact_quadratic_step_degenerate_slope():
    assert line_search_quadratic_exact(1.0, 0.0) == 0.0  # increasing line
    assert line_search_quadratic_exact(-1.0, 0.0) == 1.0  # decreasing line
    assert line_search_quadratic_exact(0.0, 0.0) == 0.0


# --- open-loop schedules ----------------------------------------------------------

def test_harmonic_classic_values():
    rule = Harmonic(2.0)
    assert schedule_value(rule, 0) == 1.0
    assert schedule_value(rule, 1) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert schedule_value(rule, 2) == 0.5


def test_power_schedule_values():
    rule = Power(1.0, 0.5)
    assert schedule_value(rule, 0) == 1.0
    assert schedule_value(rule, 3) == 0.5


def test_dh_closed_form_is_the_exact_upper_envelope():
    # the recursion telescopes to gamma0/(gamma0*k + 1); the implementation
    # must equal that expression bit for bit, since downstream verification
    # compares with zero tolerance
    for gamma0 in [0.1, 0.5, 1.0]:
        rule = DHRecursion(gamma0)
        ks = np.arange(0, 100_000, dtype=float)
        vals = schedule_values(rule, 99_999)
        envelope = gamma0 / (gamma0 * ks + 1.0)
        assert np.array_equal(vals, envelope)
        assert np.all(vals >= gamma0 / (ks + 1.0))


def test_dh_iterative_recursion_tracks_closed_form():
    # literal float iteration drifts; it must stay within 1e-12 relative
    for gamma0 in [0.1, 0.5, 1.0]:
        it = dh_terms_iterative(gamma0, 100_000)
        cf = schedule_values(DHRecursion(gamma0), 100_000)
        assert np.max(np.abs(it - cf) / cf) <= 1e-12


def test_dh_satisfies_its_own_recursion_within_float_error():
    vals = schedule_values(DHRecursion(0.7), 1000)
    stepped = vals[:-1] / (1.0 + vals[:-1])
    assert np.allclose(vals[1:], stepped, rtol=1e-14)


@given(
    st.sampled_from(
        [Harmonic(1.0), Harmonic(2.0), Harmonic(4.5), Power(1.0, 0.5),
         Power(0.3, 1.0), DHRecursion(1.0), DHRecursion(0.25)]
    ),
    st.integers(0, 5000),
)
def test_schedule_vectorization_agrees_pointwise(rule, k):
    vals = schedule_values(rule, k)
    assert vals.shape == (k + 1,)
    assert vals[k] == schedule_value(rule, k)
    assert 0.0 < vals[k] <= 1.0


def test_validate_open_loop_reports():
    rep = validate_open_loop(Harmonic(2.0), horizon=1000)
    assert rep.c1_ok
    assert rep.dh_bounds_ok is None
    assert rep.partial_sum == pytest.approx(
        math.fsum(2.0 / (k + 2.0) for k in range(1000)), abs=0.0
    )

    rep = validate_open_loop(DHRecursion(0.5), horizon=10_000)
    assert rep.c1_ok
    assert rep.dh_bounds_ok is True


def test_validate_open_loop_rejects_line_search():
    with pytest.raises(ValueError):
        validate_open_loop(LineSearch(1e-10, 200), horizon=100)


def test_is_open_loop_classification():
    assert is_open_loop(Harmonic(2.0))
    assert is_open_loop(Power(1.0, 0.5))
    assert is_open_loop(DHRecursion(1.0))
    assert not is_open_loop(LineSearch(1e-10, 200))


# --- parameter validation ------------------------------------------------------------

def test_rule_parameter_validation():
    with pytest.raises(ValueError):
        Harmonic(0.5)
    with pytest.raises(ValueError):
        Power(0.0, 0.5)
    with pytest.raises(ValueError):
        Power(1.0, 1.5)
    with pytest.raises(ValueError):
        DHRecursion(1.5)
    with pytest.raises(ValueError):
        LineSearch(0.0, 200)
    with pytest.raises(ValueError):
        LineSearch(1e-10, 1)


def test_rule_descriptor_round_trip():
    for rule in [LineSearch(1e-10, 200), Harmonic(2.0), Power(0.5, 0.75),
                 DHRecursion(0.3)]:
        assert rule_from_descriptor(rule.descriptor()) == rule


def test_rule_descriptor_rejects_unknown_kind_and_fields():
    with pytest.raises(ValueError, match="unknown stepsize rule kind"):
        rule_from_descriptor({"kind": "armijo"})
    with pytest.raises(ValueError, match="missing field"):
        rule_from_descriptor({"kind": "power", "gamma0": 1.0})
    with pytest.raises(ValueError, match="unknown fields"):
        rule_from_descriptor({"kind": "harmonic", "c": 2.0, "warmup": 5})
