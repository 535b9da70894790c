"""Curvature estimation, closed-form rate bounds, and recursion envelope checks.

The central quantity is the order-sigma curvature of a differentiable f over a
compact convex set: the supremum over feasible pairs (x, s) and gamma in (0,1]
of (sigma/gamma^sigma) * (f(x + gamma(s-x)) - f(x) - <f'(x), gamma(s-x)>).
It is finite when the gradient is (sigma-1)-Holder on the set, and it feeds
every convergence bound in this module. Sampled estimates are suprema over
finite samples, hence lower estimates; upper bounds come from Holder constants
or from a tabulated modulus of continuity of the gradient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FeasibleSet
from .objectives import Objective
from .stepsize import StepsizeRule, is_open_loop, schedule_values
from .solver import SolveTrace

# 13 log-spaced points on [1e-3, 10^-0.5] plus gamma = 1: small gammas probe
# local curvature, gamma = 1 probes the full segment
DEFAULT_GAMMA_GRID: tuple[float, ...] = tuple(np.logspace(-3.0, -0.5, 13)) + (1.0,)

_EXTREME_PAIR_CAP = 24  # at most this many extreme points enter the pair augmentation


@dataclass(frozen=True)
class CurvatureEstimate:
    sigma: float
    sampled_value: float
    holder_upper_bound: float | None
    modulus_upper_bound: float | None
    n_samples: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "sampled_value": self.sampled_value,
            "holder_upper_bound": self.holder_upper_bound,
            "modulus_upper_bound": self.modulus_upper_bound,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def _curvature_term(obj: Objective, x, s, gamma: float, sigma: float) -> float:
    g = obj.grad(x)
    if not np.all(np.isfinite(g)):
        raise ValueError(f"gradient unavailable at sampled point {x}")
    d = s - x
    inner = obj.value(x + gamma * d) - obj.value(x) - gamma * float(g @ d)
    if inner < 0.0:
        inner = 0.0  # convexity makes it >= 0; clip roundoff
    return sigma / gamma**sigma * inner


def _validate_gamma_grid(gamma_grid) -> list[float]:
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("gamma grid is empty")
    if any(not 0.0 < g <= 1.0 for g in grid):
        raise ValueError("gamma grid must lie in (0, 1]")
    if 1.0 not in grid:
        raise ValueError("gamma grid must include 1.0")
    return grid


def estimate_curvature(
    obj: Objective,
    feasible_set: FeasibleSet,
    sigma: float,
    n_samples: int = 256,
    gamma_grid=None,
    seed: int = 0,
) -> CurvatureEstimate:
    """Sampled lower estimate of the order-sigma curvature constant.

    Takes the max of the curvature expression over n_samples random feasible
    pairs plus all ordered extreme-point pairs (suprema tend to live on the
    boundary; pure uniform sampling converges too slowly). Pairs are drawn
    sequentially from one seeded generator, so for a fixed seed the sample set
    grows by extension: the estimate is nondecreasing in n_samples.

    When the objective carries a true Holder constant matching sigma = 1 + nu,
    the corresponding upper bound L_nu * diam^(1+nu) is attached for contrast.
    """
    if not 1.0 < sigma <= 2.0:
        raise ValueError(f"sigma must lie in (1, 2], got {sigma}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    grid = _validate_gamma_grid(DEFAULT_GAMMA_GRID if gamma_grid is None else gamma_grid)

    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_samples):
        x = feasible_set.draw(rng)
        s = feasible_set.draw(rng)
        pairs.append((x, s))
    pts = feasible_set.extreme_points()[:_EXTREME_PAIR_CAP]
    for i in range(len(pts)):
        for j in range(len(pts)):
            if i != j:
                pairs.append((pts[i], pts[j]))

    best = 0.0
    for x, s in pairs:
        for gamma in grid:
            v = _curvature_term(obj, x, s, gamma, sigma)
            if v > best:
                best = v

    holder_upper = None
    if (obj.holder is not None and obj.holder.const is not None
            and abs(1.0 + obj.holder.nu - sigma) < 1e-12):
        holder_upper = curvature_bound_holder(obj.holder.const, obj.holder.nu,
                                              feasible_set.diameter())
    return CurvatureEstimate(
        sigma=sigma,
        sampled_value=best,
        holder_upper_bound=holder_upper,
        modulus_upper_bound=None,
        n_samples=n_samples,
        seed=seed,
    )


def probe_curvature_divergence(
    obj: Objective,
    feasible_set: FeasibleSet,
    sigma: float,
    threshold: float = 1e3,
    max_depth: int = 12,
    n_samples: int = 64,
    seed: int = 0,
) -> float:
    """Refinement probe for an unbounded curvature constant.

    No finite computation certifies infinity, so divergence is operationalized
    as the sampled estimate crossing `threshold` while the gamma grid is
    refined toward 0 (depth m extends the grid down to 10^-m). Returns the
    largest estimate seen; callers compare it against the threshold.

    The curvature expression magnifies function-evaluation roundoff by
    sigma/gamma^sigma, so refining past the depth where that amplification
    alone reaches threshold/100 would flag any objective as divergent;
    refinement stops before that depth.
    """
    eps = float(np.finfo(float).eps)
    noise_depth = int(math.log10(0.01 * threshold / (sigma * eps)) / sigma)
    best = 0.0
    for depth in range(3, min(max_depth, noise_depth) + 1):
        grid = list(np.logspace(-float(depth), -0.5, 2 * depth)) + [1.0]
        est = estimate_curvature(obj, feasible_set, sigma,
                                 n_samples=n_samples, gamma_grid=grid, seed=seed)
        best = max(best, est.sampled_value)
        if best > threshold:
            break
    return best


def curvature_bound_holder(L_nu: float, nu: float, delta: float) -> float:
    """Upper bound L_nu * delta^(1+nu) on the order-(1+nu) curvature."""
    if not L_nu > 0:
        raise ValueError(f"holder constant must be positive, got {L_nu}")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    if not delta > 0:
        raise ValueError(f"diameter must be positive, got {delta}")
    return L_nu * delta ** (1.0 + nu)


def curvature_bound_modulus(omega_table, sigma: float, delta: float, gamma_grid) -> float:
    """Curvature upper bound from a tabulated gradient modulus of continuity.

    Evaluates sup over the gamma grid of (sigma/gamma^sigma) times the integral
    of the tabulated omega from 0 to gamma*delta. The table interpolates
    piecewise-linearly, is anchored at (0, 0) (any continuous gradient has
    omega(0) = 0, and the anchor is what makes an exactly-linear omega
    integrate exactly), and extends as a constant beyond the last tau. The
    integral of the interpolant is computed segment-exactly (trapezoids).
    """
    table = [(float(t), float(w)) for t, w in omega_table]
    if not table:
        raise ValueError("omega table is empty")
    taus = [t for t, _ in table]
    oms = [w for _, w in table]
    if any(t <= 0 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly increasing and positive")
    if any(w < 0 for w in oms) or any(b < a for a, b in zip(oms, oms[1:])):
        raise ValueError("omega values must be nonnegative and nondecreasing")
    grid = _validate_gamma_grid(gamma_grid)

    taus = [0.0] + taus
    oms = [0.0] + oms
    cum = [0.0]
    for i in range(1, len(taus)):
        cum.append(cum[-1] + 0.5 * (oms[i] + oms[i - 1]) * (taus[i] - taus[i - 1]))

    def integral(u: float) -> float:
        if u <= 0.0:
            return 0.0
        if u >= taus[-1]:
            return cum[-1] + oms[-1] * (u - taus[-1])
        j = int(np.searchsorted(taus, u)) - 1
        frac = (u - taus[j]) / (taus[j + 1] - taus[j])
        om_u = oms[j] + frac * (oms[j + 1] - oms[j])
        return cum[j] + 0.5 * (oms[j] + om_u) * (u - taus[j])

    return max(sigma / g**sigma * integral(g * delta) for g in grid)


def curvature_floor_strongly_convex(mu_sigma: float, sigma: float, delta: float) -> float:
    """Diagnostic lower bound sigma * mu_sigma * delta^sigma on the curvature.

    Holds when f satisfies the power-sigma strong-convexity inequality
    f(x) >= f(y) + <f'(y), x-y> + mu_sigma*||x-y||^sigma: take the defining
    supremum at gamma = 1 over a diameter-attaining pair. Reported only; no
    shipped objective declares mu_sigma, so nothing downstream consumes it.
    """
    if not mu_sigma > 0:
        raise ValueError(f"mu_sigma must be positive, got {mu_sigma}")
    if not 1.0 < sigma <= 2.0:
        raise ValueError(f"sigma must lie in (1, 2], got {sigma}")
    if not delta > 0:
        raise ValueError(f"diameter must be positive, got {delta}")
    return sigma * mu_sigma * delta**sigma


KIND_LINE_SEARCH_ORDER_SIGMA = "line_search_order_sigma"
KIND_OPEN_LOOP_ORDER_SIGMA = "open_loop_order_sigma"
KIND_HARMONIC_CLASSIC = "harmonic_classic"


@dataclass(frozen=True)
class RateBound:
    """A closed-form convergence bound bound(k) on objective suboptimality."""

    kind: str
    params: dict

    def bound(self, k: int) -> float:
        if k < 0:
            raise ValueError(f"iteration index must be >= 0, got {k}")
        p = self.params
        if self.kind == KIND_LINE_SEARCH_ORDER_SIGMA:
            theta0, sigma, c = p["theta0"], p["sigma"], p["C_sigma"]
            base = 1.0 + (1.0 / sigma) * theta0 ** (1.0 / (sigma - 1.0)) \
                * c ** (1.0 / (1.0 - sigma)) * k
            return theta0 / base ** (sigma - 1.0)
        if self.kind == KIND_OPEN_LOOP_ORDER_SIGMA:
            delta, sigma = p["Delta"], p["sigma"]
            kk = k + 1.0 if p["composite"] else float(k)
            if kk <= 0.0:
                return math.inf  # the plain bound starts at k = 1
            return sigma**sigma * delta / kk ** (sigma - 1.0)
        if self.kind == KIND_HARMONIC_CLASSIC:
            return 2.0 * p["C_f"] / (k + 2.0)
        raise ValueError(f"unknown bound kind {self.kind!r}")

    def curve(self, ks) -> np.ndarray:
        return np.array([self.bound(int(k)) for k in ks])

    def as_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def rate_bound_line_search(theta0: float, sigma: float, C_sigma: float) -> RateBound:
    """Suboptimality bound under exact line minimization; equals theta0 at k=0."""
    if not theta0 > 0:
        raise ValueError(f"theta0 must be positive, got {theta0}")
    if not 1.0 < sigma <= 2.0:
        raise ValueError(f"sigma must lie in (1, 2], got {sigma}")
    if not C_sigma > 0:
        raise ValueError(f"C_sigma must be positive, got {C_sigma}")
    return RateBound(KIND_LINE_SEARCH_ORDER_SIGMA,
                     {"theta0": theta0, "sigma": sigma, "C_sigma": C_sigma})


def rate_bound_open_loop(Delta: float, sigma: float, composite: bool = False) -> RateBound:
    """sigma^sigma * Delta / k^(sigma-1), with (k+1) in the composite variant."""
    if not Delta > 0:
        raise ValueError(f"Delta must be positive, got {Delta}")
    if not 1.0 < sigma <= 2.0:
        raise ValueError(f"sigma must lie in (1, 2], got {sigma}")
    return RateBound(KIND_OPEN_LOOP_ORDER_SIGMA,
                     {"Delta": Delta, "sigma": sigma, "composite": bool(composite)})


def rate_bound_classic(C_f: float) -> RateBound:
    """2*C_f/(k+2), the classic order-2 bound for the c=2 harmonic schedule."""
    if not C_f > 0:
        raise ValueError(f"C_f must be positive, got {C_f}")
    return RateBound(KIND_HARMONIC_CLASSIC, {"C_f": C_f})


def delta_from(theta0: float, c_sigma: float, sigma: float) -> float:
    """The open-loop bound's Delta = max(theta0, C_sigma/sigma)."""
    return max(theta0, c_sigma / sigma)


def bound_to_csv(bound: RateBound, ks) -> str:
    lines = ["k,bound"]
    for k in ks:
        lines.append("%d,%.17g" % (int(k), bound.bound(int(k))))
    return "\n".join(lines) + "\n"


def beta_recursion(rule: StepsizeRule, sigma: float, K: int) -> np.ndarray:
    """beta_0..beta_K of beta_{k+1} = (1-gamma_k)*beta_k + gamma_k^sigma, beta_0=1."""
    if not is_open_loop(rule):
        raise ValueError(f"{type(rule).__name__} is not an open-loop rule")
    if not 1.0 < sigma <= 2.0:
        raise ValueError(f"sigma must lie in (1, 2], got {sigma}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    gam = schedule_values(rule, K - 1)
    out = np.empty(K + 1)
    b = 1.0
    out[0] = b
    for k in range(K):
        g = gam[k]
        b = (1.0 - g) * b + g**sigma
        out[k + 1] = b
    return out


@dataclass(frozen=True)
class BetaReport:
    sigma: float
    K: int
    holds: bool
    first_violation: int | None
    max_ratio: float  # max over k>=1 of beta_k * k^(sigma-1) / sigma^sigma
    argmax_k: int


def beta_bound_report(rule: StepsizeRule, sigma: float, K: int) -> BetaReport:
    """Check beta_k <= sigma^sigma / k^(sigma-1) for k = 1..K and report."""
    betas = beta_recursion(rule, sigma, K)
    k = np.arange(1, K + 1, dtype=float)
    ratio = betas[1:] * k ** (sigma - 1.0) / sigma**sigma
    over = np.nonzero(ratio > 1.0)[0]
    first = int(over[0]) + 1 if over.size else None
    arg = int(np.argmax(ratio)) + 1
    return BetaReport(
        sigma=sigma,
        K=K,
        holds=first is None,
        first_violation=first,
        max_ratio=float(ratio.max()),
        argmax_k=arg,
    )


def polyak_sequence_bound(alpha0: float, betas, eta: float) -> np.ndarray:
    """Closed-form envelope alpha0 * (1 + eta*alpha0^eta*sum_{i<k} beta_i)^(-1/eta).

    Entry k of the result bounds alpha_k of any nonnegative sequence with
    alpha_{k+1} <= alpha_k - beta_k*alpha_k^(1+eta); entry 0 is alpha0 itself.
    """
    if alpha0 < 0:
        raise ValueError(f"alpha0 must be >= 0, got {alpha0}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    b = np.asarray(betas, dtype=float)
    if np.any(b < 0):
        raise ValueError("betas must be nonnegative")
    if alpha0 == 0.0:
        return np.zeros(b.size + 1)
    csum = np.concatenate(([0.0], np.cumsum(b)))
    return alpha0 * (1.0 + eta * alpha0**eta * csum) ** (-1.0 / eta)


def polyak_recursion(alpha0: float, betas, eta: float) -> np.ndarray:
    """The recursion alpha_{k+1} = alpha_k - beta_k*alpha_k^(1+eta), simulated."""
    if alpha0 < 0:
        raise ValueError(f"alpha0 must be >= 0, got {alpha0}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    out = np.empty(len(betas) + 1)
    a = float(alpha0)
    out[0] = a
    for i, b in enumerate(betas):
        a = a - float(b) * a ** (1.0 + eta)
        out[i + 1] = a
    return out


@dataclass(frozen=True)
class XuReport:
    final_alpha: float
    tail_max: float  # max of alpha over the second half of the horizon
    eta_partial_sum: float
    eta_sum_keeps_growing: bool  # partial sums still increased in the second half


def xu_recursion_check(alpha0: float, etas, epsilons) -> XuReport:
    """Simulate alpha_{k+1} = (1-eta_k)*alpha_k + eta_k*eps_k and summarize.

    Under the driving conditions (eta_k -> 0 with divergent sum, eps_k -> 0)
    the sequence tends to 0; the report carries what a finite horizon can
    honestly say: the final value, the max over the tail half, the eta partial
    sum, and whether that sum was still growing late (a constant-zero eta, for
    which the sequence provably stalls, reports False).
    """
    if alpha0 < 0:
        raise ValueError(f"alpha0 must be >= 0, got {alpha0}")
    e = [float(v) for v in etas]
    eps = [float(v) for v in epsilons]
    if len(e) != len(eps):
        raise ValueError(f"etas and epsilons differ in length: {len(e)} vs {len(eps)}")
    if any(not 0.0 <= v <= 1.0 for v in e):
        raise ValueError("etas must lie in [0, 1]")
    if any(v < 0.0 for v in eps):
        raise ValueError("epsilons must be nonnegative")
    K = len(e)
    half = K // 2
    a = float(alpha0)
    tail_max = a if half == 0 else -math.inf
    for k in range(K):
        a = (1.0 - e[k]) * a + e[k] * eps[k]
        if k + 1 >= half and a > tail_max:
            tail_max = a
    second_half_sum = math.fsum(e[half:])
    return XuReport(
        final_alpha=a,
        tail_max=tail_max,
        eta_partial_sum=math.fsum(e),
        eta_sum_keeps_growing=second_half_sum > 0.0,
    )


def fit_rate(trace: SolveTrace, opt: float, tail_fraction: float) -> dict:
    """Power-law fit of suboptimality against iteration index.

    Least squares of log(obj_k - opt) on log k over the last tail_fraction of
    rows with k >= 1, after dropping residuals at or below the roundoff floor
    max(0, 100*eps*|opt|); the slope estimates minus the empirical rate
    exponent. Needs at least 10 usable points.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    ks, objs = [], []
    for r in trace.iterations:
        if r.k >= 1:
            ks.append(r.k)
            objs.append(r.obj)
    n_positive = sum(1 for o in objs if o > opt)
    if n_positive < 20:
        raise ValueError(
            f"trace has only {n_positive} iterations above the reference optimum; need >= 20")
    start = len(ks) - max(1, int(round(tail_fraction * len(ks))))
    floor = 100.0 * np.finfo(float).eps * abs(opt)
    xs, ys = [], []
    for k, o in zip(ks[start:], objs[start:]):
        resid = o - opt
        if resid > floor and resid > 0.0:
            xs.append(math.log(k))
            ys.append(math.log(resid))
    if len(xs) < 10:
        raise ValueError(
            f"only {len(xs)} usable points above the roundoff floor; need >= 10")
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * np.asarray(xs) + intercept
    ss_res = float(np.sum((np.asarray(ys) - pred) ** 2))
    ss_tot = float(np.sum((np.asarray(ys) - np.mean(ys)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2,
            "n_used": len(xs)}
