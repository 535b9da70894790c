"""Differentiable convex test objectives and gradient-regularity estimators.

Each factory returns an immutable Objective bundling evaluation, gradient,
optional smoothness metadata (Lipschitz or Holder constants for the gradient),
and, when a feasible set is supplied, the known constrained optimum.

The nonsmooth max objective carries a pointwise gradient selection with a fixed
tie rule; it exists to demonstrate failure, and certificate invariants do not
apply to it (tagged nonconvex_or_nonsmooth).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .geometry import FeasibleSet, Vector

CONVEX = "convex"
STRICTLY_CONVEX = "strictly_convex"
STRONGLY_CONVEX = "strongly_convex"
NONCONVEX_OR_NONSMOOTH = "nonconvex_or_nonsmooth"


@dataclass(frozen=True)
class HolderInfo:
    """Gradient Holder regularity ||f'(x)-f'(y)|| <= const * ||x-y||^nu.

    const is None until filled by estimate_holder_constant (no closed form is
    asserted for the shipped power-norm objective in general dimension).
    """

    nu: float
    const: float | None


@dataclass(frozen=True)
class Objective:
    value: Callable[[Vector], float]
    grad: Callable[[Vector], Vector]
    lipschitz: float | None = None
    holder: HolderInfo | None = None
    x_star: Vector | None = None
    f_star: float | None = None
    convexity: str = CONVEX
    mu: float | None = None  # strong-convexity modulus when tagged strongly_convex
    descriptor_dict: dict | None = None

    def descriptor(self) -> dict:
        if self.descriptor_dict is None:
            raise ValueError("objective has no serializable descriptor")
        return self.descriptor_dict

    def with_holder_constant(self, const: float) -> "Objective":
        if self.holder is None:
            raise ValueError("objective carries no holder exponent to attach to")
        return replace(self, holder=HolderInfo(self.holder.nu, const))


@dataclass(frozen=True)
class CompositePart:
    """Convex additive term g for composite problems. Kinds: L1(lam) or Zero."""

    kind: str  # "l1" | "zero"
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l1", "zero"):
            raise ValueError(f"unknown composite kind {self.kind!r}")
        if self.kind == "l1" and not self.lam > 0:
            raise ValueError(f"l1 weight must be positive, got {self.lam}")

    def value(self, x: Vector) -> float:
        if self.kind == "l1":
            return self.lam * float(np.abs(x).sum())
        return 0.0

    def subgrad(self, x: Vector) -> Vector:
        # one element of the subdifferential; sign(0) = 0 is a valid choice
        if self.kind == "l1":
            return self.lam * np.sign(x)
        return np.zeros_like(x)

    def descriptor(self) -> dict:
        if self.kind == "l1":
            return {"kind": "l1", "lam": self.lam}
        return {"kind": "zero"}


def l1_part(lam: float) -> CompositePart:
    return CompositePart("l1", lam)


def zero_part() -> CompositePart:
    return CompositePart("zero")


def make_quadratic(b, feasible_set: FeasibleSet | None = None) -> Objective:
    """f(x) = 0.5 * ||x - b||^2, gradient x - b, 1-Lipschitz and 1-strongly convex.

    With a feasible set that supports projection, the constrained optimum is the
    projection of b (exact for this objective), e.g. b=0 on the d-simplex gives
    x* = (1/d, ..., 1/d) and f* = 1/(2d).
    """
    b = np.asarray(b, dtype=float)

    def value(x: Vector) -> float:
        d = x - b
        return 0.5 * float(d @ d)

    def grad(x: Vector) -> Vector:
        return x - b

    x_star = f_star = None
    if feasible_set is not None:
        try:
            x_star = feasible_set.project(b)
            f_star = value(x_star)
        except ValueError:
            if feasible_set.contains(b, 0.0):
                x_star, f_star = b.copy(), 0.0
    return Objective(
        value, grad,
        lipschitz=1.0,
        holder=HolderInfo(1.0, 1.0),  # exactly 1-Lipschitz, a true constant
        x_star=x_star, f_star=f_star,
        convexity=STRONGLY_CONVEX, mu=1.0,
        descriptor_dict={"kind": "quadratic", "b": [float(v) for v in b]},
    )


def make_power_norm(sigma: float, b, feasible_set: FeasibleSet | None = None) -> Objective:
    """f(x) = ||x - b||_2^sigma for sigma in (1, 2].

    grad(x) = sigma * ||x-b||^(sigma-2) * (x-b), set to 0 at x = b (the unique
    subgradient at the singular point). The gradient is (sigma-1)-Holder; the
    constant is left unset until estimated on a concrete set.
    """
    if not 1.0 < sigma <= 2.0:
        raise ValueError(f"sigma must lie in (1, 2], got {sigma}")
    b = np.asarray(b, dtype=float)

    def value(x: Vector) -> float:
        return float(np.linalg.norm(x - b)) ** sigma

    def grad(x: Vector) -> Vector:
        d = x - b
        n = float(np.linalg.norm(d))
        if n == 0.0:
            return np.zeros_like(d)
        return sigma * n ** (sigma - 2.0) * d

    x_star = f_star = None
    if feasible_set is not None and feasible_set.contains(b, 0.0):
        x_star, f_star = b.copy(), 0.0
    return Objective(
        value, grad,
        holder=HolderInfo(sigma - 1.0, None),
        x_star=x_star, f_star=f_star,
        convexity=STRICTLY_CONVEX,
        descriptor_dict={"kind": "power_norm", "sigma": sigma, "b": [float(v) for v in b]},
    )


def make_t_alpha(alpha: float) -> Objective:
    """One-dimensional f(t) = t^alpha on [0,1] for alpha in (1, 2).

    The gradient alpha * t^(alpha-1) is (alpha-1)-Holder with constant alpha,
    yet the order-2 curvature over [0,1] is unbounded; this is the stock example
    separating the order-sigma machinery from the Lipschitz case.
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")

    def value(x: Vector) -> float:
        return float(x[0]) ** alpha

    def grad(x: Vector) -> Vector:
        return np.array([alpha * float(x[0]) ** (alpha - 1.0)])

    return Objective(
        value, grad,
        holder=HolderInfo(alpha - 1.0, alpha),
        x_star=np.array([0.0]), f_star=0.0,
        convexity=STRICTLY_CONVEX,
        descriptor_dict={"kind": "t_alpha", "alpha": alpha},
    )


def make_nesterov_max() -> Objective:
    """f(x) = max(x[0], x[1]) on R^2 with a pointwise gradient selection.

    grad = (1,0) where x[0] > x[1], (0,1) where x[0] < x[1], and (1,0) on the
    diagonal by a fixed tie rule (any selection shows the same behavior;
    determinism is what matters). Over the unit disc the optimum is
    x* = -(1/sqrt2, 1/sqrt2) with value -1/sqrt2. Convex but nondifferentiable:
    gap certificates do not apply.
    """
    inv_sqrt2 = 1.0 / np.sqrt(2.0)

    def value(x: Vector) -> float:
        return float(max(x[0], x[1]))

    def grad(x: Vector) -> Vector:
        if x[0] >= x[1]:
            return np.array([1.0, 0.0])
        return np.array([0.0, 1.0])

    return Objective(
        value, grad,
        x_star=np.array([-inv_sqrt2, -inv_sqrt2]), f_star=-inv_sqrt2,
        convexity=NONCONVEX_OR_NONSMOOTH,
        descriptor_dict={"kind": "nesterov_max"},
    )


def make_linear(c, feasible_set: FeasibleSet | None = None) -> Objective:
    """f(x) = <c, x> with constant gradient c. Rejects c = 0 (no sharp minimum)."""
    c = np.asarray(c, dtype=float)
    if not np.any(c != 0.0):
        raise ValueError("c must be nonzero")

    def value(x: Vector) -> float:
        return float(c @ x)

    def grad(x: Vector) -> Vector:
        return c.copy()

    x_star = f_star = None
    if feasible_set is not None:
        x_star = feasible_set.lmo(c)
        f_star = value(x_star)
    return Objective(
        value, grad,
        x_star=x_star, f_star=f_star,
        convexity=CONVEX,
        descriptor_dict={"kind": "linear", "c": [float(v) for v in c]},
    )


def estimate_holder_constant(
    obj: Objective,
    feasible_set: FeasibleSet,
    nu: float,
    n_pairs: int,
    seed: int,
) -> float:
    """Sampled lower estimate of the nu-Holder constant of the gradient.

    max over feasible pairs of ||grad(x)-grad(y)|| / ||x-y||^nu; pairs closer
    than 1e-12 are skipped. Never an upper bound; callers needing one inflate
    by a safety factor.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_pairs):
        x = feasible_set.draw(rng)
        y = feasible_set.draw(rng)
        dist = float(np.linalg.norm(x - y))
        if dist < 1e-12:
            continue
        ratio = float(np.linalg.norm(obj.grad(x) - obj.grad(y))) / dist**nu
        if best is None or ratio > best:
            best = ratio
    if best is None:
        raise ValueError("all sampled pairs were degenerate (distance < 1e-12)")
    return best


def modulus_of_continuity(
    obj: Objective,
    feasible_set: FeasibleSet,
    taus,
    n_pairs: int,
    seed: int,
) -> list[tuple[float, float]]:
    """Sampled modulus of continuity of the gradient at each distance scale tau.

    omega_hat(tau) = max gradient variation over sampled pairs at distance
    <= tau; a running maximum makes the output nondecreasing by construction.
    """
    taus = [float(t) for t in taus]
    if any(t <= 0 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly increasing and positive")
    rng = np.random.default_rng(seed)
    dists = np.empty(n_pairs)
    variations = np.empty(n_pairs)
    for i in range(n_pairs):
        x = feasible_set.draw(rng)
        y = feasible_set.draw(rng)
        dists[i] = np.linalg.norm(x - y)
        variations[i] = np.linalg.norm(obj.grad(x) - obj.grad(y))
    out: list[tuple[float, float]] = []
    running = 0.0
    for tau in taus:
        inside = variations[dists <= tau]
        if inside.size:
            running = max(running, float(inside.max()))
        out.append((tau, running))
    return out


_OBJECTIVE_KINDS = {
    "quadratic": lambda d, fs: make_quadratic(np.asarray(d["b"]), fs),
    "power_norm": lambda d, fs: make_power_norm(d["sigma"], np.asarray(d["b"]), fs),
    "t_alpha": lambda d, fs: make_t_alpha(d["alpha"]),
    "nesterov_max": lambda d, fs: make_nesterov_max(),
    "linear": lambda d, fs: make_linear(np.asarray(d["c"]), fs),
}


def objective_from_descriptor(desc: dict, feasible_set: FeasibleSet | None = None) -> Objective:
    try:
        kind = desc["kind"]
    except (TypeError, KeyError):
        raise ValueError(f"objective descriptor needs a 'kind' field, got {desc!r}") from None
    if kind not in _OBJECTIVE_KINDS:
        raise ValueError(f"unknown objective kind {kind!r}")
    try:
        return _OBJECTIVE_KINDS[kind](desc, feasible_set)
    except KeyError as exc:
        raise ValueError(f"objective descriptor for {kind!r} is missing field {exc}") from None


def composite_from_descriptor(desc: dict | None) -> CompositePart | None:
    if desc is None:
        return None
    try:
        kind = desc["kind"]
    except (TypeError, KeyError):
        raise ValueError(f"composite descriptor needs a 'kind' field, got {desc!r}") from None
    if kind == "l1":
        try:
            return l1_part(desc["lam"])
        except KeyError:
            raise ValueError("composite descriptor for 'l1' is missing field 'lam'") from None
    if kind == "zero":
        return zero_part()
    raise ValueError(f"unknown composite kind {kind!r}")
