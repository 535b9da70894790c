"""Projection-free convex optimization toolkit with rate-bound verification."""

from .geometry import (
    Box,
    FeasibleSet,
    L1Ball,
    L2Ball,
    Simplex,
    VertexPolytope,
    contains,
    diameter,
    extreme_points,
    lmo,
    project,
    sample,
    set_from_descriptor,
)
from .objectives import (
    CompositePart,
    Objective,
    composite_from_descriptor,
    estimate_holder_constant,
    l1_part,
    make_linear,
    make_nesterov_max,
    make_power_norm,
    make_quadratic,
    make_t_alpha,
    modulus_of_continuity,
    objective_from_descriptor,
    zero_part,
)
from .stepsize import (
    DHRecursion,
    Harmonic,
    LineSearch,
    Power,
    ScheduleReport,
    StepsizeRule,
    is_open_loop,
    line_search,
    line_search_quadratic_exact,
    rule_from_descriptor,
    schedule_value,
    schedule_values,
    validate_open_loop,
)
from .solver import (
    Problem,
    SolveTrace,
    StopRule,
    Termination,
    composite_lmo,
    config_fingerprint,
    fw_gap,
    read_trace_csv,
    solve,
    solve_gpa,
    trace_summary,
    trace_to_csv,
    write_trace_csv,
)
from .analysis import (
    BetaReport,
    CurvatureEstimate,
    RateBound,
    XuReport,
    beta_bound_report,
    beta_recursion,
    curvature_bound_holder,
    curvature_bound_modulus,
    curvature_floor_strongly_convex,
    delta_from,
    estimate_curvature,
    fit_rate,
    polyak_recursion,
    polyak_sequence_bound,
    probe_curvature_divergence,
    rate_bound_classic,
    rate_bound_line_search,
    rate_bound_open_loop,
    xu_recursion_check,
)
from .config import (
    ExperimentSpec,
    load_spec,
    parse_spec,
    spec_fingerprint,
    validate_spec,
)
from .checks import CheckResult, evaluate_check, validate_check
from .cases import CASE_NAMES, CASES, case_specs
from .runner import ExperimentReport, compare, reproduce, run_experiment

__version__ = "0.1.0"
