import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwlab import (
    Box,
    Harmonic,
    L2Ball,
    LineSearch,
    Problem,
    Simplex,
    StopRule,
    composite_lmo,
    config_fingerprint,
    fw_gap,
    l1_part,
    make_linear,
    make_nesterov_max,
    make_quadratic,
    read_trace_csv,
    solve,
    solve_gpa,
    trace_to_csv,
    write_trace_csv,
)
from fwlab.solver import (
    REASON_FINITE_TERMINATION,
    REASON_GAP_TOL,
    REASON_MAX_ITER,
    TRACE_CSV_COLUMNS,
)


def _simplex_quadratic(n=3):
    fs = Simplex(n)
    return Problem(fs, make_quadratic(np.zeros(n), fs))


# --- trace semantics ---------------------------------------------------------------

def test_trace_records_pre_step_rows_zero_through_max_iter():
    trace = solve(_simplex_quadratic(), Harmonic(2.0),
                  x0=np.array([1.0, 0.0, 0.0]), stop=StopRule(max_iter=5))
    assert [r.k for r in trace.iterations] == [0, 1, 2, 3, 4, 5]
    assert trace.termination.reason == REASON_MAX_ITER
    # row 0 holds the start point before any step
    assert np.array_equal(trace.iterations[0].x, [1.0, 0.0, 0.0])
    assert trace.iterations[0].obj == 0.5
    # the budget row is recorded without stepping
    last = trace.iterations[-1]
    assert last.gamma == 0.0 and last.step_norm == 0.0
    assert np.array_equal(trace.termination.final_x, last.x)


def test_open_loop_gamma_column_matches_schedule():
    trace = solve(_simplex_quadratic(), Harmonic(2.0),
                  x0=np.array([1.0, 0.0, 0.0]), stop=StopRule(max_iter=4))
    for rec in trace.iterations[:-1]:
        assert rec.gamma == 2.0 / (rec.k + 2.0)


def test_gap_tol_stop_certifies_the_reported_point():
    problem = _simplex_quadratic(5)
    trace = solve(problem, Harmonic(2.0), x0=np.eye(5)[0],
                  stop=StopRule(max_iter=10_000, gap_tol=1e-3))
    assert trace.termination.reason == REASON_GAP_TOL
    last = trace.iterations[-1]
    assert last.gap <= 1e-3
    # stop fires before stepping: the certified iterate is the final point
    assert np.array_equal(trace.termination.final_x, last.x)
    assert len(trace.iterations) < 10_001


def test_gap_tol_zero_never_stops_on_gap():
    problem = Problem(Simplex(3), make_linear(np.array([1.0, 2.0, 3.0]), Simplex(3)))
    trace = solve(problem, Harmonic(2.0), x0=np.array([1.0, 0.0, 0.0]),
                  stop=StopRule(max_iter=50, gap_tol=0.0))
    # gap hits exactly 0 at the optimum yet the loop continues to a fixed point
    assert trace.termination.reason == REASON_FINITE_TERMINATION


def test_finite_termination_on_sharp_linear_problem():
    problem = Problem(Simplex(3), make_linear(np.array([1.0, 2.0, 3.0]), Simplex(3)))
    trace = solve(problem, LineSearch(1e-10, 200), x0=np.array([0.0, 0.0, 1.0]),
                  stop=StopRule(max_iter=100))
    assert trace.termination.reason == REASON_FINITE_TERMINATION
    assert trace.iterations[-1].k == 1
    assert np.array_equal(trace.termination.final_x, [1.0, 0.0, 0.0])


def test_infeasible_start_rejected():
    with pytest.raises(ValueError, match="x0 is not feasible"):
        solve(_simplex_quadratic(), Harmonic(2.0), x0=np.array([0.6, 0.6, 0.0]),
              stop=StopRule(max_iter=5))


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(max_iter=0)
    with pytest.raises(ValueError):
        StopRule(max_iter=10, gap_tol=-1.0)


def test_line_search_failure_carries_iteration_context():
    fs = Box(1, np.array([0.0]), np.array([1.0]))
    base = make_quadratic(np.ones(1), fs)  # descent direction points at x = 1

    def poisoned(x):
        return float("nan") if x[0] > 0.9 else float(0.5 * (x - 1.0) @ (x - 1.0))

    bad = type(base)(**{**base.__dict__, "value": poisoned})
    problem = Problem(fs, bad)
    with pytest.raises(ValueError, match="iteration 0"):
        solve(problem, LineSearch(1e-10, 50), x0=np.array([0.5]),
              stop=StopRule(max_iter=5))


# --- gap ----------------------------------------------------------------------------

def test_gap_certifies_suboptimality_on_convex_problems():
    problem = _simplex_quadratic(4)
    x = np.array([0.4, 0.3, 0.2, 0.1])
    gap, x_bar = fw_gap(problem, x)
    f_star = 1.0 / 8.0
    assert gap >= problem.objective.value(x) - f_star - 1e-12
    assert problem.feasible_set.contains(x_bar, 1e-9)


def test_composite_gap_includes_the_nonsmooth_part():
    fs = Box(2, np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    problem = Problem(fs, make_quadratic(np.array([0.9, -0.4])), l1_part(0.5))
    x = np.array([1.0, 1.0])
    gap, x_bar = fw_gap(problem, x)
    grad = problem.objective.grad(x)
    expected = float(grad @ (x - x_bar)) + problem.composite.value(x) \
        - problem.composite.value(x_bar)
    assert gap == pytest.approx(expected, abs=1e-15)


# --- composite oracle -----------------------------------------------------------------

def test_composite_lmo_box_l1_brute_force_grid():
    fs = Box(3, np.array([-1.0, -0.5, -2.0]), np.array([0.5, 1.0, 1.0]))
    g = l1_part(0.7)
    rng = np.random.default_rng(11)
    grid = np.linspace(-2.0, 1.0, 3001)
    for _ in range(25):
        c = rng.normal(size=3) * rng.choice([0.3, 1.0, 3.0])
        s = composite_lmo(fs, c, g)
        assert fs.contains(s, 1e-12)
        for i in range(3):
            pts = grid[(grid >= fs.lower[i]) & (grid <= fs.upper[i])]
            vals = c[i] * pts + 0.7 * np.abs(pts)
            best = float(vals.min())
            got = c[i] * s[i] + 0.7 * abs(s[i])
            assert got <= best + 1e-6


def test_composite_lmo_prefers_zero_only_strictly():
    fs = Box(1, np.array([-1.0]), np.array([1.0]))
    g = l1_part(1.0)
    # cost +1: endpoint value at -1 is -1+1 = 0, ties the zero candidate;
    # the endpoint wins ties so the oracle stays extreme-point-valued
    s = composite_lmo(fs, np.array([1.0]), g)
    assert s[0] == -1.0
    # cost +0.5: endpoint value 0.5 > 0, zero wins strictly
    s = composite_lmo(fs, np.array([0.5]), g)
    assert s[0] == 0.0


def test_composite_lmo_zero_part_reduces_to_plain_lmo():
    fs = Simplex(3)
    from fwlab import zero_part

    c = np.array([0.3, -0.2, 0.9])
    assert np.array_equal(composite_lmo(fs, c, zero_part()), fs.lmo(c))


def test_composite_solve_is_monotone_under_line_search():
    fs = Box(2, np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    problem = Problem(fs, make_quadratic(np.array([0.9, -1.5])), l1_part(0.5))
    trace = solve(problem, LineSearch(1e-10, 200), x0=np.array([-1.0, -1.0]),
                  stop=StopRule(max_iter=60))
    objs = trace.objs
    assert np.all(np.diff(objs) <= 1e-12)


# --- projected-gradient baseline ---------------------------------------------------------

def test_gpa_unit_step_on_simplex_quadratic_hits_optimum():
    problem = _simplex_quadratic(10)
    trace = solve_gpa(problem, step=1.0, x0=np.eye(10)[0], max_iter=200)
    assert trace.termination.reason == REASON_FINITE_TERMINATION
    assert trace.termination.final_obj == pytest.approx(0.05, abs=1e-12)
    assert np.allclose(trace.termination.final_x, np.full(10, 0.1), atol=1e-12)


def test_gpa_rejects_bad_steps_and_composite_problems():
    problem = _simplex_quadratic(3)
    with pytest.raises(ValueError, match=r"step must lie in \(0, 2/L\)"):
        solve_gpa(problem, step=2.0, x0=np.eye(3)[0], max_iter=10)
    fs = Box(2, np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    comp = Problem(fs, make_quadratic(np.zeros(2)), l1_part(0.5))
    with pytest.raises(ValueError, match="composite"):
        solve_gpa(comp, step=1.0, x0=np.zeros(2), max_iter=10)


def test_gpa_gamma_column_is_the_fixed_step():
    problem = _simplex_quadratic(4)
    trace = solve_gpa(problem, step=0.5, x0=np.eye(4)[0], max_iter=5)
    for rec in trace.iterations[:-1]:
        assert rec.gamma == 0.5


# --- iterate feasibility and determinism ---------------------------------------------------

@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25)
def test_all_iterates_stay_feasible(seed):
    rng = np.random.default_rng(seed)
    fs = L2Ball(3, 1.0)
    problem = Problem(fs, make_quadratic(rng.normal(scale=0.4, size=3), fs))
    trace = solve(problem, Harmonic(2.0), x0=fs.sample(seed),
                  stop=StopRule(max_iter=30))
    for rec in trace.iterations:
        assert fs.contains(rec.x, 1e-9)
        assert rec.gap >= -1e-12  # oracle roundoff only


def test_identical_configs_produce_bit_identical_traces():
    problem = _simplex_quadratic(5)
    kw = dict(rule=Harmonic(2.0), x0=np.eye(5)[0], stop=StopRule(max_iter=40), seed=3)
    a = solve(problem, **kw)
    b = solve(problem, **kw)
    assert a.config_fingerprint == b.config_fingerprint
    assert trace_to_csv(a) == trace_to_csv(b)


def test_fingerprint_tracks_every_config_field():
    problem = _simplex_quadratic(3)
    x0 = np.eye(3)[0]
    base = solve(problem, Harmonic(2.0), x0=x0, stop=StopRule(max_iter=5), seed=1)
    other_seed = solve(problem, Harmonic(2.0), x0=x0, stop=StopRule(max_iter=5), seed=2)
    other_stop = solve(problem, Harmonic(2.0), x0=x0, stop=StopRule(max_iter=6), seed=1)
    other_rule = solve(problem, Harmonic(3.0), x0=x0, stop=StopRule(max_iter=5), seed=1)
    fps = {base.config_fingerprint, other_seed.config_fingerprint,
           other_stop.config_fingerprint, other_rule.config_fingerprint}
    assert len(fps) == 4


def test_config_fingerprint_canonicalizes_float_rendering():
    fp1 = config_fingerprint({"kind": "simplex", "dim": 3}, {"kind": "harmonic", "c": 2.0},
                             np.array([1.0, 0.0, 0.0]), {"max_iter": 5, "gap_tol": 0.0}, 0)
    fp2 = config_fingerprint({"kind": "simplex", "dim": 3}, {"kind": "harmonic", "c": 2.0},
                             [1.0, 0.0, 0.0], {"gap_tol": 0.0, "max_iter": 5}, 0)
    assert fp1 == fp2


# --- CSV round-trip ---------------------------------------------------------------------

def test_trace_csv_header_is_bit_exact():
    trace = solve(_simplex_quadratic(), Harmonic(2.0), x0=np.eye(3)[0],
                  stop=StopRule(max_iter=3))
    text = trace_to_csv(trace)
    assert text.splitlines()[0] == ",".join(TRACE_CSV_COLUMNS) == "k,obj,gap,gamma,step_norm"


def test_trace_csv_round_trips_exact_floats(tmp_path):
    trace = solve(_simplex_quadratic(7), Harmonic(2.0), x0=np.eye(7)[0],
                  stop=StopRule(max_iter=50))
    path = tmp_path / "t.csv"
    write_trace_csv(trace, path)
    rows = read_trace_csv(path)
    assert len(rows) == len(trace.iterations)
    for rec, (k, obj, gap, gamma, step_norm) in zip(trace.iterations, rows):
        assert k == rec.k
        assert obj == rec.obj  # %.17g reproduces doubles exactly
        assert gap == rec.gap
        assert gamma == rec.gamma
        assert step_norm == rec.step_norm


def test_read_trace_csv_rejects_foreign_headers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("iteration,value\n0,1.0\n")
    with pytest.raises(ValueError, match="header"):
        read_trace_csv(path)
