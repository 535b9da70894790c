"""Stepsize rules: exact 1-D line minimization and open-loop schedules.

Open-loop rules are predetermined sequences gamma_k in [0,1] with gamma_k -> 0
and divergent partial sums; they never look at function values. The line-search
rule minimizes the objective along the current segment with a derivative-free
golden-section search (the composite objective can be kinked, so derivative
methods are out).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np


@dataclass(frozen=True)
class LineSearch:
    tol: float = 1e-10
    max_evals: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_evals < 2:
            raise ValueError(f"max_evals must be >= 2, got {self.max_evals}")

    def descriptor(self) -> dict:
        return {"kind": "line_search", "tol": self.tol, "max_evals": self.max_evals}


@dataclass(frozen=True)
class Harmonic:
    """gamma_k = c/(k+c), c >= 1. c=2 is the classic 2/(k+2) schedule."""

    c: float

    def __post_init__(self):
        if not self.c >= 1:
            raise ValueError(f"harmonic offset must be >= 1, got {self.c}")

    def descriptor(self) -> dict:
        return {"kind": "harmonic", "c": self.c}


@dataclass(frozen=True)
class Power:
    """gamma_k = gamma0/(k+1)^p with gamma0, p in (0,1]."""

    gamma0: float
    p: float

    def __post_init__(self):
        if not 0 < self.gamma0 <= 1:
            raise ValueError(f"gamma0 must lie in (0,1], got {self.gamma0}")
        if not 0 < self.p <= 1:
            raise ValueError(f"exponent must lie in (0,1], got {self.p}")

    def descriptor(self) -> dict:
        return {"kind": "power", "gamma0": self.gamma0, "p": self.p}


@dataclass(frozen=True)
class DHRecursion:
    """gamma_{k+1} = gamma_k/(1+gamma_k) from gamma0 in (0,1].

    Implemented through the closed form gamma_k = gamma0/(gamma0*k + 1), which
    the recursion telescopes to (induction on 1/gamma_k). The literal float
    iteration drifts by ~1e-14 relative around k=1e5, enough to poke above the
    exact envelope gamma0/(gamma0*k+1) that downstream checks assert with zero
    slack; the closed form IS that envelope, and stays above gamma0/(k+1)
    because gamma0*k <= k and IEEE +,*,/ are correctly rounded and monotone.
    """

    gamma0: float

    def __post_init__(self):
        if not 0 < self.gamma0 <= 1:
            raise ValueError(f"gamma0 must lie in (0,1], got {self.gamma0}")

    def descriptor(self) -> dict:
        return {"kind": "dh_recursion", "gamma0": self.gamma0}


StepsizeRule = Union[LineSearch, Harmonic, Power, DHRecursion]

_OPEN_LOOP = (Harmonic, Power, DHRecursion)


def is_open_loop(rule: StepsizeRule) -> bool:
    return isinstance(rule, _OPEN_LOOP)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden ratio conjugate, ~0.618


def line_search(phi: Callable[[float], float], tol: float = 1e-10, max_evals: int = 200) -> float:
    """Minimize phi over [0,1] by golden-section search.

    Returns the best evaluated point; both endpoints are always evaluated, so
    the result never exceeds min(phi(0), phi(1)). Ties go to the smaller gamma
    (a zero step beats an equal-valued nonzero one). Raises on non-finite phi.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_evals < 2:
        raise ValueError(f"max_evals must be >= 2, got {max_evals}")

    best_g = 0.0
    best_v = math.inf
    evals = 0

    def ev(g: float) -> float:
        nonlocal best_g, best_v, evals
        v = float(phi(g))
        if not math.isfinite(v):
            raise ValueError(f"line search objective is not finite at gamma={g}: {v}")
        evals += 1
        if v < best_v or (v == best_v and g < best_g):
            best_g, best_v = g, v
        return v

    ev(0.0)
    ev(1.0)

    a, b = 0.0, 1.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = ev(c) if evals < max_evals else None
    fd = ev(d) if evals < max_evals else None
    while fc is not None and fd is not None and (b - a) > tol and evals < max_evals:
        if fc <= fd:  # keep the left bracket on ties: smaller gamma wins
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = ev(d)
    return best_g


def line_search_quadratic_exact(a: float, b: float) -> float:
    """Minimizer of a*gamma + 0.5*b*gamma^2 on [0,1] for b >= 0 (closed form)."""
    if b < 0:
        raise ValueError(f"quadratic coefficient must be >= 0, got {b}")
    if b == 0.0:
        return 0.0 if a >= 0 else 1.0
    return min(1.0, max(0.0, -a / b))


def schedule_value(rule: StepsizeRule, k: int) -> float:
    """The k-th stepsize of an open-loop rule, k >= 0."""
    if k < 0:
        raise ValueError(f"iteration index must be >= 0, got {k}")
    if isinstance(rule, Harmonic):
        return rule.c / (k + rule.c)
    if isinstance(rule, Power):
        return rule.gamma0 / (k + 1.0) ** rule.p
    if isinstance(rule, DHRecursion):
        return rule.gamma0 / (rule.gamma0 * k + 1.0)
    raise ValueError(f"{type(rule).__name__} has no schedule; stepsizes come from the search")


def schedule_values(rule: StepsizeRule, upto: int) -> np.ndarray:
    """Vectorized schedule_value for k = 0..upto inclusive."""
    if upto < 0:
        raise ValueError(f"horizon must be >= 0, got {upto}")
    k = np.arange(upto + 1, dtype=float)
    if isinstance(rule, Harmonic):
        return rule.c / (k + rule.c)
    if isinstance(rule, Power):
        return rule.gamma0 / (k + 1.0) ** rule.p
    if isinstance(rule, DHRecursion):
        return rule.gamma0 / (rule.gamma0 * k + 1.0)
    raise ValueError(f"{type(rule).__name__} has no schedule; stepsizes come from the search")


def dh_terms_iterative(gamma0: float, upto: int) -> np.ndarray:
    """The DH recursion iterated literally, for cross-checking the closed form."""
    if not 0 < gamma0 <= 1:
        raise ValueError(f"gamma0 must lie in (0,1], got {gamma0}")
    out = np.empty(upto + 1)
    g = gamma0
    out[0] = g
    for k in range(upto):
        g = g / (1.0 + g)
        out[k + 1] = g
    return out


@dataclass(frozen=True)
class ScheduleReport:
    c1_ok: bool
    partial_sum: float
    dh_bounds_ok: bool | None  # None for non-DH rules


def validate_open_loop(rule: StepsizeRule, horizon: int) -> ScheduleReport:
    """Check the open-loop conditions over a finite horizon.

    c1_ok: the tail stepsize has visibly decayed, or the kind's analytic limit
    is zero (true for every shipped open-loop kind). partial_sum: sum of the
    first `horizon` stepsizes, reported for divergence inspection. dh_bounds_ok:
    for the DH rule only, exact envelope gamma0/(k+1) <= gamma_k <=
    gamma0/(gamma0*k+1) for every k <= horizon, compared with no tolerance.
    """
    if horizon < 10:
        raise ValueError(f"horizon must be >= 10, got {horizon}")
    if not is_open_loop(rule):
        raise ValueError(f"{type(rule).__name__} is not an open-loop rule")
    g = schedule_values(rule, horizon)
    numeric_decay = bool(g[horizon] < g[0] and g[horizon] < 0.01)
    analytic_zero_limit = isinstance(rule, _OPEN_LOOP)  # all three kinds decay to 0
    c1_ok = numeric_decay or analytic_zero_limit
    partial_sum = math.fsum(g[:horizon])
    dh_bounds_ok = None
    if isinstance(rule, DHRecursion):
        k = np.arange(horizon + 1, dtype=float)
        lower = rule.gamma0 / (k + 1.0)
        upper = rule.gamma0 / (rule.gamma0 * k + 1.0)
        dh_bounds_ok = bool(np.all(lower <= g) and np.all(g <= upper))
    return ScheduleReport(c1_ok=c1_ok, partial_sum=partial_sum, dh_bounds_ok=dh_bounds_ok)


_RULE_KINDS = {
    "line_search": lambda d: LineSearch(d.get("tol", 1e-10), d.get("max_evals", 200)),
    "harmonic": lambda d: Harmonic(d["c"]),
    "power": lambda d: Power(d["gamma0"], d["p"]),
    "dh_recursion": lambda d: DHRecursion(d["gamma0"]),
}

_RULE_FIELDS = {
    "line_search": {"tol", "max_evals"},
    "harmonic": {"c"},
    "power": {"gamma0", "p"},
    "dh_recursion": {"gamma0"},
}


def rule_from_descriptor(desc: dict) -> StepsizeRule:
    try:
        kind = desc["kind"]
    except (TypeError, KeyError):
        raise ValueError(f"rule descriptor needs a 'kind' field, got {desc!r}") from None
    if kind not in _RULE_KINDS:
        raise ValueError(f"unknown stepsize rule kind {kind!r}")
    unknown = set(desc) - _RULE_FIELDS[kind] - {"kind"}
    if unknown:
        raise ValueError(f"rule descriptor for {kind!r} has unknown fields "
                         f"{sorted(unknown)}")
    try:
        return _RULE_KINDS[kind](desc)
    except KeyError as exc:
        raise ValueError(f"rule descriptor for {kind!r} is missing field {exc}") from None
