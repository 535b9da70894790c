"""Projection-free solver loops with gap certificates and trace recording.

The main iteration picks the feasible point minimizing the linearized
objective (plus the composite term when present), then steps toward it by a
convex combination. Feasibility of every iterate is structural: no projection
happens and the update is never renormalized. A fixed-step projected-gradient
baseline shares the trace format for side-by-side comparison.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Box, FeasibleSet, Vector
from .objectives import CompositePart, Objective
from .stepsize import (
    LineSearch,
    StepsizeRule,
    is_open_loop,
    line_search,
    schedule_values,
)

REASON_MAX_ITER = "max_iter"
REASON_GAP_TOL = "gap_tol"
REASON_FINITE_TERMINATION = "finite_termination"

TRACE_CSV_COLUMNS = ("k", "obj", "gap", "gamma", "step_norm")


@dataclass(frozen=True)
class Problem:
    feasible_set: FeasibleSet
    objective: Objective
    composite: CompositePart | None = None

    def phi(self, x: Vector) -> float:
        v = self.objective.value(x)
        if self.composite is not None:
            v += self.composite.value(x)
        return v

    def optimum(self) -> float | None:
        """Known optimal value of the full objective, when recorded."""
        return self.objective.f_star

    def descriptor(self) -> dict:
        return {
            "set": self.feasible_set.descriptor(),
            "objective": self.objective.descriptor(),
            "composite": None if self.composite is None else self.composite.descriptor(),
        }


@dataclass(frozen=True)
class StopRule:
    max_iter: int
    gap_tol: float = 0.0  # 0 disables gap-based stopping

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.gap_tol < 0:
            raise ValueError(f"gap_tol must be >= 0, got {self.gap_tol}")

    def descriptor(self) -> dict:
        return {"max_iter": self.max_iter, "gap_tol": self.gap_tol}


@dataclass(frozen=True)
class IterationRecord:
    k: int
    x: Vector
    obj: float
    gap: float
    gamma: float
    step_norm: float


@dataclass(frozen=True)
class Termination:
    reason: str
    final_x: Vector
    final_obj: float


@dataclass(frozen=True)
class SolveTrace:
    iterations: list[IterationRecord]
    termination: Termination
    config_fingerprint: str = ""
    approximate_oracle: bool = False

    @property
    def ks(self) -> np.ndarray:
        return np.array([r.k for r in self.iterations], dtype=int)

    @property
    def objs(self) -> np.ndarray:
        return np.array([r.obj for r in self.iterations])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r.gap for r in self.iterations])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([r.gamma for r in self.iterations])

    @property
    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.iterations])


def composite_lmo(feasible_set: FeasibleSet, c: Vector, g: CompositePart) -> Vector:
    """argmin over the set of <c, x> + g(x). See _composite_lmo for routing."""
    x, _ = _composite_lmo(feasible_set, c, g)
    return x


def _composite_lmo(feasible_set: FeasibleSet, c: Vector, g: CompositePart) -> tuple[Vector, bool]:
    """Returns (minimizer, approximate_flag).

    Exact routes: any set with a zero part (plain linear minimization), and
    box + L1 coordinate-wise: c_i*y + lam*|y| on [l_i, u_i] is piecewise
    linear with its only kink at 0, so the minimum sits in {l_i, u_i, 0}.
    Everything else runs a projected-subgradient inner loop and is flagged
    approximate.
    """
    if g.kind == "zero":
        return feasible_set.lmo(c), False
    if isinstance(feasible_set, Box):
        lo, up = feasible_set.lower, feasible_set.upper
        at_lo = c * lo + g.lam * np.abs(lo)
        at_up = c * up + g.lam * np.abs(up)
        out = np.where(at_lo <= at_up, lo, up)
        best = np.minimum(at_lo, at_up)
        # the kink value is 0; it wins only strictly, so endpoint ties keep
        # the candidate order (lower, upper, zero)
        zero_ok = (lo <= 0.0) & (0.0 <= up)
        out = np.where(zero_ok & (best > 0.0), 0.0, out)
        return out, False
    return _composite_lmo_subgradient(feasible_set, c, g), True


def _composite_lmo_subgradient(feasible_set: FeasibleSet, c: Vector, g: CompositePart,
                               n_iter: int = 10_000) -> Vector:
    # deterministic fallback: projected subgradient with diminishing steps,
    # best-iterate tracking; requires the set to support projection
    x = feasible_set.lmo(c)
    try:
        x = feasible_set.project(x)
    except ValueError:
        raise ValueError(
            "composite linear subproblem has no closed form for this set kind "
            "and the projection fallback is unavailable"
        ) from None
    scale = float(np.linalg.norm(c)) + g.lam * math.sqrt(x.size) + 1e-12
    s0 = max(feasible_set.diameter(), 1.0) / scale
    best_x = x.copy()
    best_v = float(c @ x) + g.value(x)
    for t in range(n_iter):
        sub = c + g.subgrad(x)
        x = feasible_set.project(x - s0 / math.sqrt(t + 1.0) * sub)
        v = float(c @ x) + g.value(x)
        if v < best_v:
            best_v, best_x = v, x.copy()
    return best_x


def fw_gap(problem: Problem, x: Vector) -> tuple[float, Vector]:
    """Gap certificate at x: <grad, x - x_bar> (+ g(x) - g(x_bar) when composite).

    x_bar is the linear-subproblem minimizer; for convex problems the gap upper
    bounds the current suboptimality, so it doubles as a stopping certificate.
    """
    gap, x_bar, _ = _fw_gap(problem, x)
    return gap, x_bar


def _fw_gap(problem: Problem, x: Vector) -> tuple[float, Vector, bool]:
    grad = problem.objective.grad(x)
    if problem.composite is None:
        x_bar = problem.feasible_set.lmo(grad)
        return float(grad @ (x - x_bar)), x_bar, False
    x_bar, approx = _composite_lmo(problem.feasible_set, grad, problem.composite)
    gap = float(grad @ (x - x_bar)) + problem.composite.value(x) - problem.composite.value(x_bar)
    return gap, x_bar, approx


def config_fingerprint(problem_desc: dict, rule_desc: dict, x0, stop_desc: dict,
                       seed: int | None) -> str:
    """sha256 over a canonical rendering of the full solve configuration."""
    payload = {
        "problem": problem_desc,
        "rule": rule_desc,
        "x0": list(np.asarray(x0, dtype=float)),
        "stop": stop_desc,
        "seed": seed,
    }

    def canon(v):
        if isinstance(v, float):
            return "%.17g" % v
        if isinstance(v, dict):
            return {k: canon(u) for k, u in sorted(v.items())}
        if isinstance(v, (list, tuple)):
            return [canon(u) for u in v]
        return v

    blob = json.dumps(canon(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _try_fingerprint(problem: Problem, rule: StepsizeRule, x0, stop: StopRule,
                     seed: int | None) -> str:
    try:
        return config_fingerprint(problem.descriptor(), rule.descriptor(), x0,
                                  stop.descriptor(), seed)
    except ValueError:
        return ""  # objective not expressible as a descriptor


def solve(problem: Problem, rule: StepsizeRule, x0, stop: StopRule,
          seed: int | None = None) -> SolveTrace:
    """Run the projection-free iteration from x0 under the given stepsize rule.

    Records one row per iteration k with the pre-step iterate. Stops on a gap
    certificate (only when stop.gap_tol > 0), on the iteration budget, or on an
    exact fixed point x_{k+1} == x_k (bitwise), which sharp minima produce.
    The `seed` enters only the config fingerprint; the loop itself draws no
    randomness.
    """
    x = np.array(x0, dtype=float)
    if not problem.feasible_set.contains(x, 1e-9):
        raise ValueError("x0 is not feasible (tolerance 1e-9)")

    gammas = None
    if is_open_loop(rule):
        gammas = schedule_values(rule, stop.max_iter)

    records: list[IterationRecord] = []
    approximate = False
    reason = None

    for k in range(stop.max_iter + 1):
        obj_k = problem.phi(x)
        if not math.isfinite(obj_k):
            raise ValueError(f"objective value is not finite at iteration {k}: {obj_k}")
        gap_k, x_bar, approx = _fw_gap(problem, x)
        approximate = approximate or approx

        if stop.gap_tol > 0 and gap_k <= stop.gap_tol:
            records.append(IterationRecord(k, x.copy(), obj_k, gap_k, 0.0, 0.0))
            reason = REASON_GAP_TOL
            break
        if k == stop.max_iter:
            records.append(IterationRecord(k, x.copy(), obj_k, gap_k, 0.0, 0.0))
            reason = REASON_MAX_ITER
            break

        d = x_bar - x
        if isinstance(rule, LineSearch):
            try:
                gamma_k = line_search(lambda t: problem.phi(x + t * d),
                                      rule.tol, rule.max_evals)
            except ValueError as exc:
                raise ValueError(f"line search failed at iteration {k}: {exc}") from exc
        else:
            gamma_k = float(gammas[k])

        x_next = x + gamma_k * d
        records.append(IterationRecord(
            k, x.copy(), obj_k, gap_k, gamma_k, float(np.linalg.norm(x_next - x))))
        if np.array_equal(x_next, x):
            reason = REASON_FINITE_TERMINATION
            break
        x = x_next

    termination = Termination(reason, x.copy(), problem.phi(x))
    return SolveTrace(
        iterations=records,
        termination=termination,
        config_fingerprint=_try_fingerprint(problem, rule, x0, stop, seed),
        approximate_oracle=approximate,
    )


def solve_gpa(problem: Problem, step: float, x0, max_iter: int,
              seed: int | None = None) -> SolveTrace:
    """Fixed-step projected-gradient baseline in the same trace format.

    Requires a plain (non-composite) problem, a projectable set, and a known
    gradient Lipschitz constant L with 0 < step < 2/L. The gap column is still
    the linear-subproblem certificate, for comparability.
    """
    if problem.composite is not None:
        raise ValueError("projected-gradient baseline does not handle composite terms")
    L = problem.objective.lipschitz
    if L is None:
        raise ValueError("objective has no recorded gradient Lipschitz constant")
    if not 0 < step < 2.0 / L:
        raise ValueError(f"step must lie in (0, 2/L) = (0, {2.0 / L}), got {step}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    x = np.array(x0, dtype=float)
    if not problem.feasible_set.contains(x, 1e-9):
        raise ValueError("x0 is not feasible (tolerance 1e-9)")

    records: list[IterationRecord] = []
    reason = None
    for k in range(max_iter + 1):
        obj_k = problem.phi(x)
        if not math.isfinite(obj_k):
            raise ValueError(f"objective value is not finite at iteration {k}: {obj_k}")
        gap_k, _, _ = _fw_gap(problem, x)
        if k == max_iter:
            records.append(IterationRecord(k, x.copy(), obj_k, gap_k, 0.0, 0.0))
            reason = REASON_MAX_ITER
            break
        x_next = problem.feasible_set.project(x - step * problem.objective.grad(x))
        records.append(IterationRecord(
            k, x.copy(), obj_k, gap_k, step, float(np.linalg.norm(x_next - x))))
        if np.array_equal(x_next, x):
            reason = REASON_FINITE_TERMINATION
            break
        x = x_next

    termination = Termination(reason, x.copy(), problem.phi(x))
    rule_desc = {"kind": "gpa", "step": step}
    try:
        fp = config_fingerprint(problem.descriptor(), rule_desc, x0,
                                {"max_iter": max_iter, "gap_tol": 0.0}, seed)
    except ValueError:
        fp = ""
    return SolveTrace(records, termination, config_fingerprint=fp)


def trace_to_csv(trace: SolveTrace) -> str:
    """CSV rendering with 17-significant-digit floats (exact round-trip)."""
    lines = [",".join(TRACE_CSV_COLUMNS)]
    for r in trace.iterations:
        lines.append("%d,%.17g,%.17g,%.17g,%.17g" % (r.k, r.obj, r.gap, r.gamma, r.step_norm))
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: SolveTrace, path) -> None:
    with open(path, "w") as fh:
        fh.write(trace_to_csv(trace))


def read_trace_csv(path) -> list[tuple[int, float, float, float, float]]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != ",".join(TRACE_CSV_COLUMNS):
            raise ValueError(f"unexpected trace CSV header: {header!r}")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k, obj, gap, gamma, step_norm = line.split(",")
            rows.append((int(k), float(obj), float(gap), float(gamma), float(step_norm)))
    return rows


def trace_summary(trace: SolveTrace) -> dict:
    """JSON-ready summary: termination, final values, provenance."""
    return {
        "n_iterations": len(trace.iterations),
        "termination": {
            "reason": trace.termination.reason,
            "final_x": [float(v) for v in trace.termination.final_x],
            "final_obj": trace.termination.final_obj,
        },
        "config_fingerprint": trace.config_fingerprint,
        "approximate_oracle": trace.approximate_oracle,
        "final_gap": float(trace.iterations[-1].gap) if trace.iterations else None,
    }
