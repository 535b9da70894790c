"""Compact convex feasible sets with linear minimization oracles.

Every set kind supports five operations: lmo (linear minimization oracle),
project (Euclidean projection, where closed-form), diameter, contains, and
seeded sampling. All operations are pure; sampling is pure given its seed.
The norm is l2 throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

Vector = np.ndarray


def _as_vector(x, dim: int, name: str) -> Vector:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(
            f"{name} must be a vector of dimension {dim}, got shape {arr.shape}"
        )
    return arr


def _require_finite(arr: Vector, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")


class FeasibleSet:
    """Base for all set kinds. Concrete kinds fill in the five operations."""

    dimension: int

    def lmo(self, c: Vector) -> Vector:
        raise NotImplementedError

    def project(self, x: Vector) -> Vector:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def draw(self, rng: np.random.Generator) -> Vector:
        raise NotImplementedError

    def extreme_points(self) -> np.ndarray:
        """A finite family of extreme points, one per row (representative for the
        l2 ball, whose true extreme set is the whole sphere)."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def sample(self, rng_seed: int) -> Vector:
        """Feasible point, deterministic for a fixed seed."""
        return self.draw(np.random.default_rng(rng_seed))


@dataclass(frozen=True, eq=False)
class Simplex(FeasibleSet):
    """Probability simplex {x >= 0, sum x = 1} in R^d."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")

    def lmo(self, c: Vector) -> Vector:
        # argmin over vertices; np.argmin takes the lowest index on ties
        out = np.zeros(self.dimension)
        out[int(np.argmin(c))] = 1.0
        return out

    def project(self, x: Vector) -> Vector:
        return _project_onto_simplex_face(x, 1.0)

    def diameter(self) -> float:
        return float(np.sqrt(2.0)) if self.dimension >= 2 else 0.0

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        return bool(np.all(x >= -tol) and abs(float(x.sum()) - 1.0) <= tol)

    def draw(self, rng: np.random.Generator) -> Vector:
        # exponential-normalization construction (uniform on the simplex)
        e = rng.exponential(1.0, self.dimension)
        return e / e.sum()

    def extreme_points(self) -> np.ndarray:
        return np.eye(self.dimension)

    def descriptor(self) -> dict:
        return {"kind": "simplex", "dim": self.dimension}


@dataclass(frozen=True, eq=False)
class L1Ball(FeasibleSet):
    """{x : ||x||_1 <= radius}."""

    dimension: int
    radius: float

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def lmo(self, c: Vector) -> Vector:
        i = int(np.argmax(np.abs(c)))
        s = 1.0 if c[i] >= 0 else -1.0  # c[i] == 0 only when c == 0; any vertex then ties
        out = np.zeros(self.dimension)
        out[i] = -self.radius * s
        return out

    def project(self, x: Vector) -> Vector:
        a = np.abs(x)
        if float(a.sum()) <= self.radius:
            return x.copy()
        shrunk = _project_onto_simplex_face(a, self.radius)
        return np.sign(x) * shrunk

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        return bool(float(np.abs(x).sum()) <= self.radius + tol)

    def draw(self, rng: np.random.Generator) -> Vector:
        # uniform: Dirichlet magnitudes, random orthant, then radial u^(1/d)
        e = rng.exponential(1.0, self.dimension)
        signs = rng.integers(0, 2, self.dimension) * 2.0 - 1.0
        boundary = signs * e / e.sum()
        u = rng.random()
        return self.radius * u ** (1.0 / self.dimension) * boundary

    def extreme_points(self) -> np.ndarray:
        eye = np.eye(self.dimension)
        return np.vstack([self.radius * eye, -self.radius * eye])

    def descriptor(self) -> dict:
        return {"kind": "l1_ball", "dim": self.dimension, "radius": self.radius}


@dataclass(frozen=True, eq=False)
class L2Ball(FeasibleSet):
    """{x : ||x||_2 <= radius}."""

    dimension: int
    radius: float

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def lmo(self, c: Vector) -> Vector:
        n = float(np.linalg.norm(c))
        if n == 0.0:
            return np.zeros(self.dimension)
        return -self.radius / n * c

    def project(self, x: Vector) -> Vector:
        n = float(np.linalg.norm(x))
        if n <= self.radius:
            return x.copy()
        return self.radius / n * x

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        return bool(float(np.linalg.norm(x)) <= self.radius + tol)

    def draw(self, rng: np.random.Generator) -> Vector:
        g = rng.standard_normal(self.dimension)
        n = float(np.linalg.norm(g))
        while n == 0.0:  # not reachable in practice
            g = rng.standard_normal(self.dimension)
            n = float(np.linalg.norm(g))
        u = rng.random()
        return self.radius * u ** (1.0 / self.dimension) / n * g

    def extreme_points(self) -> np.ndarray:
        eye = np.eye(self.dimension)
        return np.vstack([self.radius * eye, -self.radius * eye])

    def descriptor(self) -> dict:
        return {"kind": "l2_ball", "dim": self.dimension, "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    """Axis-aligned box {lower <= x <= upper} componentwise."""

    dimension: int
    lower: Vector
    upper: Vector

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        lo = _as_vector(self.lower, self.dimension, "lower")
        hi = _as_vector(self.upper, self.dimension, "upper")
        if not np.all(lo < hi):
            raise ValueError("lower must be strictly below upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def lmo(self, c: Vector) -> Vector:
        # c_i = 0 picks the lower corner: deterministic vertex on ties
        return np.where(c > 0, self.lower, np.where(c < 0, self.upper, self.lower))

    def project(self, x: Vector) -> Vector:
        return np.clip(x, self.lower, self.upper)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def draw(self, rng: np.random.Generator) -> Vector:
        return self.lower + rng.random(self.dimension) * (self.upper - self.lower)

    def extreme_points(self) -> np.ndarray:
        d = self.dimension
        if d <= 12:
            corners = np.array(list(itertools.product(*zip(self.lower, self.upper))))
            return corners
        # too many corners to enumerate: both extreme corners plus single flips
        rows = [self.lower.copy(), self.upper.copy()]
        for i in range(d):
            a = self.lower.copy()
            a[i] = self.upper[i]
            rows.append(a)
            b = self.upper.copy()
            b[i] = self.lower[i]
            rows.append(b)
        return np.array(rows)

    def descriptor(self) -> dict:
        return {
            "kind": "box",
            "dim": self.dimension,
            "lower": [float(v) for v in self.lower],
            "upper": [float(v) for v in self.upper],
        }


@dataclass(frozen=True, eq=False)
class VertexPolytope(FeasibleSet):
    """Convex hull of an explicit vertex list (one vertex per row)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("vertices must be a nonempty list of d-vectors")
        _require_finite(v, "vertices")
        object.__setattr__(self, "vertices", v)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def lmo(self, c: Vector) -> Vector:
        scores = self.vertices @ c
        return self.vertices[int(np.argmin(scores))].copy()

    def project(self, x: Vector) -> Vector:
        raise ValueError("projection not available for this set kind")

    def diameter(self) -> float:
        v = self.vertices
        best = 0.0
        for i in range(v.shape[0]):
            d = np.linalg.norm(v[i + 1:] - v[i], axis=1)
            if d.size:
                best = max(best, float(d.max()))
        return best

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        # min t s.t. |V^T lam - x|_inf <= t, sum lam = 1, lam >= 0
        from scipy.optimize import linprog

        v = self.vertices
        m, d = v.shape
        c_obj = np.zeros(m + 1)
        c_obj[-1] = 1.0
        a_ub = np.zeros((2 * d, m + 1))
        b_ub = np.zeros(2 * d)
        a_ub[:d, :m] = v.T
        a_ub[:d, -1] = -1.0
        b_ub[:d] = x
        a_ub[d:, :m] = -v.T
        a_ub[d:, -1] = -1.0
        b_ub[d:] = -x
        a_eq = np.zeros((1, m + 1))
        a_eq[0, :m] = 1.0
        res = linprog(
            c_obj, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
            bounds=[(0, None)] * m + [(0, None)], method="highs",
        )
        if not res.success:
            return False
        return float(res.x[-1]) <= tol + 1e-9

    def draw(self, rng: np.random.Generator) -> Vector:
        w = rng.exponential(1.0, self.vertices.shape[0])
        return (w / w.sum()) @ self.vertices

    def extreme_points(self) -> np.ndarray:
        return self.vertices.copy()

    def descriptor(self) -> dict:
        return {
            "kind": "vertex_polytope",
            "vertices": [[float(v) for v in row] for row in self.vertices],
        }


def _project_onto_simplex_face(x: Vector, total: float) -> Vector:
    """Euclidean projection onto {z >= 0, sum z = total} by sort and threshold."""
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, x.size + 1)
    rho = int(np.nonzero(u > css / idx)[0][-1])
    theta = css[rho] / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


# Functional forms of the five operations (validated entry points).

def lmo(feasible_set: FeasibleSet, c) -> Vector:
    """argmin_{x in C} <c, x>. Vertex for polytopes; ties broken by lowest index."""
    arr = _as_vector(c, feasible_set.dimension, "c")
    _require_finite(arr, "c")
    return feasible_set.lmo(arr)


def project(feasible_set: FeasibleSet, x) -> Vector:
    """Euclidean nearest point of C. Unsupported for VertexPolytope."""
    arr = _as_vector(x, feasible_set.dimension, "x")
    return feasible_set.project(arr)


def diameter(feasible_set: FeasibleSet) -> float:
    return feasible_set.diameter()


def contains(feasible_set: FeasibleSet, x, tol: float = 1e-9) -> bool:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    arr = _as_vector(x, feasible_set.dimension, "x")
    return feasible_set.contains(arr, tol)


def sample(feasible_set: FeasibleSet, rng_seed: int) -> Vector:
    return feasible_set.sample(rng_seed)


def extreme_points(feasible_set: FeasibleSet) -> np.ndarray:
    return feasible_set.extreme_points()


_SET_KINDS = {
    "simplex": lambda d: Simplex(d["dim"]),
    "l1_ball": lambda d: L1Ball(d["dim"], d["radius"]),
    "l2_ball": lambda d: L2Ball(d["dim"], d["radius"]),
    "box": lambda d: Box(d["dim"], np.asarray(d["lower"]), np.asarray(d["upper"])),
    "vertex_polytope": lambda d: VertexPolytope(np.asarray(d["vertices"])),
}


def set_from_descriptor(desc: dict) -> FeasibleSet:
    """Rebuild a set from its serializable descriptor (kind tag + parameters)."""
    try:
        kind = desc["kind"]
    except (TypeError, KeyError):
        raise ValueError(f"set descriptor needs a 'kind' field, got {desc!r}") from None
    if kind not in _SET_KINDS:
        raise ValueError(f"unknown set kind {kind!r}")
    try:
        return _SET_KINDS[kind](desc)
    except KeyError as exc:
        raise ValueError(f"set descriptor for {kind!r} is missing field {exc}") from None
