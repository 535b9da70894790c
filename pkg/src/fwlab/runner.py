"""Experiment execution: run a spec, evaluate its checks, write artifacts.

Artifact layout per experiment, inside the output directory:
- <name>.trace.csv    iteration trace (solving specs only)
- <name>.bounds.csv   theoretical envelopes, one k/bound block per bound
                      check (only when a bound check is present)
- <name>.summary.json run configuration, fingerprint, termination, and one
                      entry per check with measured/required values
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import RateBound
from .checks import CheckContext, CheckResult, evaluate_check
from .config import (
    ExperimentSpec,
    build_problem,
    build_rule,
    build_stop,
    resolve_x0,
    spec_fingerprint,
    validate_spec,
)
from .solver import SolveTrace, solve, solve_gpa, trace_summary, write_trace_csv


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of one experiment: artifacts on disk plus check verdicts."""

    name: str
    passed: bool
    check_results: tuple[CheckResult, ...]
    trace_path: str | None
    summary_path: str

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.check_results],
            "trace_path": self.trace_path,
            "summary_path": self.summary_path,
        }


def _run_trace(spec: ExperimentSpec) -> SolveTrace:
    problem = build_problem(spec)
    rule = build_rule(spec)
    x0 = resolve_x0(spec, problem.feasible_set)
    if isinstance(rule, dict):
        # projected-gradient baseline; shares the trace format with the
        # projection-free path
        trace = solve_gpa(problem, step=rule["step"], x0=x0,
                          max_iter=build_stop(spec).max_iter, seed=spec.seed)
    else:
        trace = solve(problem, rule, x0=x0, stop=build_stop(spec),
                      seed=spec.seed)
    expected = spec_fingerprint(spec)
    if expected and trace.config_fingerprint != expected:
        raise RuntimeError(
            f"fingerprint mismatch for {spec.name!r}: config drifted between "
            "validation and execution")
    return trace


def _write_bounds_csv(path: Path, bounds: list[tuple[RateBound, np.ndarray]]) -> None:
    lines = []
    for bound, ks in bounds:
        lines.append(f"# bound kind={bound.kind}")
        lines.append("k,bound")
        values = bound.curve(ks)
        for k, v in zip(ks, values):
            lines.append("%d,%.17g" % (int(k), v))
    path.write_text("\n".join(lines) + "\n")


def run_experiment(spec: ExperimentSpec, out_dir: str | Path) -> ExperimentReport:
    """Validate, execute, check, and persist one experiment."""
    validate_spec(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    problem = build_problem(spec) if spec.problem is not None else None
    trace = _run_trace(spec) if spec.is_solving() else None

    trace_path: Path | None = None
    if trace is not None:
        trace_path = out / f"{spec.name}.trace.csv"
        write_trace_csv(trace, trace_path)

    ctx = CheckContext(problem=problem, trace=trace)
    results = tuple(evaluate_check(check, ctx) for check in spec.checks)

    bounds_path: Path | None = None
    if ctx.bounds:
        bounds_path = out / f"{spec.name}.bounds.csv"
        _write_bounds_csv(bounds_path, ctx.bounds)

    passed = all(r.passed for r in results)
    summary = {
        "name": spec.name,
        "seed": spec.seed,
        "fingerprint": spec_fingerprint(spec),
        "spec": spec.as_dict(),
        "passed": passed,
        "checks": [r.as_dict() for r in results],
    }
    if trace is not None:
        summary["trace"] = trace_summary(trace)
        summary["trace_csv"] = trace_path.name
    if bounds_path is not None:
        summary["bounds_csv"] = bounds_path.name
    summary_path = out / f"{spec.name}.summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    return ExperimentReport(
        name=spec.name,
        passed=passed,
        check_results=results,
        trace_path=str(trace_path) if trace_path is not None else None,
        summary_path=str(summary_path),
    )


def reproduce(case: str, out_dir: str | Path) -> list[ExperimentReport]:
    """Run one canned case (or every case for ``case == "all"``)."""
    from .cases import CASES, case_specs

    names = list(CASES) if case == "all" else [case]
    reports: list[ExperimentReport] = []
    for name in names:
        for spec in case_specs(name):
            reports.append(run_experiment(spec, out_dir))
    return reports


def compare(specs: list[ExperimentSpec], out_dir: str | Path) -> Path:
    """Run several solving specs on one shared problem, merge traces wide.

    Output columns: k, then obj_<name> and gap_<name> per spec. Shorter
    traces leave their cells empty past termination. A single spec is
    degenerate but allowed.
    """
    if not specs:
        raise ValueError("compare needs at least one spec")
    for spec in specs:
        validate_spec(spec)
        if not spec.is_solving():
            raise ValueError(f"spec {spec.name!r} has no rule; compare needs "
                             "solving specs")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("compare specs must have distinct names")

    # same feasible set and objective, or the comparison is meaningless
    first = specs[0].problem
    for spec in specs[1:]:
        if spec.problem["set"] != first["set"] or \
                spec.problem["objective"] != first["objective"]:
            raise ValueError(
                f"spec {spec.name!r} runs a different problem than "
                f"{specs[0].name!r}; compare requires a shared set and objective")

    traces = [_run_trace(spec) for spec in specs]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "compare.csv"

    header = ["k"]
    for name in names:
        header.append(f"obj_{name}")
        header.append(f"gap_{name}")
    longest = max(len(t.iterations) for t in traces)
    lines = [",".join(header)]
    for k in range(longest):
        row = [str(k)]
        for t in traces:
            if k < len(t.iterations):
                rec = t.iterations[k]
                row.append("%.17g" % rec.obj)
                row.append("%.17g" % rec.gap)
            else:
                row.append("")
                row.append("")
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path
