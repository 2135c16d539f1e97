"""Gravity-style cohesion of small mass grids.

A k x k grid of non-negative "masses" (feature strengths at grid cells) is
scored by summing the pairwise attraction c0 * m_a * m_b / d(a, b)**q over
all unordered cell pairs, with self-attraction defined as zero.  Because the
total is multilinear in the masses, the sensitivity of the total to any one
cell is linear in the remaining masses, which makes the center-dominance
claims below checkable by exhaustive vertex enumeration.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

CENTER = (1, 1)
NEIGHBORS = ((0, 1), (1, 0), (1, 2), (2, 1))
CORNERS = ((0, 0), (0, 2), (2, 0), (2, 2))

#: dominance cases checkable on the 3x3 grid, keyed by which gradient pair
#: they compare.  "adjacent" corners sit at distance 1 from the neighbor
#: cell, "far" corners at distance sqrt(5).
DOMINANCE_CASES = (
    "center_vs_neighbor",
    "neighbor_vs_adjacent_corner",
    "neighbor_vs_far_corner",
)


@dataclass(frozen=True)
class ForceParams:
    """Attraction parameters: force = c0 * m1 * m2 / d**q."""

    c0: float = 1.0
    q: float = 2.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")


@dataclass
class MassGrid:
    """Square grid of non-negative masses with odd side length >= 3."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"masses must be a square 2-D array, got shape {m.shape}")
        k = m.shape[0]
        if k < 3 or k % 2 == 0:
            raise ValueError(f"grid side must be odd and >= 3, got {k}")
        if np.any(m < 0):
            raise ValueError("masses must be non-negative")
        self.masses = m

    @property
    def k(self) -> int:
        return self.masses.shape[0]

    @classmethod
    def uniform(cls, k: int = 3, value: float = 1.0) -> "MassGrid":
        return cls(np.full((k, k), value, dtype=float))


@dataclass(frozen=True)
class Violation:
    """One failed dominance inequality at one mass assignment."""

    masses: tuple          # row-major cell masses at the failing vertex
    kind: str              # one of DOMINANCE_CASES
    first: tuple           # cell whose gradient should strictly dominate
    second: tuple          # cell whose gradient was >= the first's
    gap: float             # gradient(first) - gradient(second), <= 0 here


@dataclass
class DominanceReport:
    epsilon: float
    vertices_checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def pairwise_force(m1: float, m2: float, d: float, params: ForceParams) -> float:
    """Attraction between two masses at distance d; zero for d == 0."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    if m1 < 0 or m2 < 0:
        raise ValueError("masses must be non-negative")
    if d == 0:
        return 0.0
    return params.c0 * m1 * m2 / d**params.q


def _coefficients(k: int, params: ForceParams) -> np.ndarray:
    """Symmetric (k*k, k*k) matrix of c0 / d**q between cells, zero diagonal."""
    coords = np.array([(i, j) for i in range(k) for j in range(k)], dtype=float)
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    with np.errstate(divide="ignore"):
        c = params.c0 / d**params.q
    np.fill_diagonal(c, 0.0)
    return c


def total_cohesion(grid: MassGrid, params: ForceParams = ForceParams()) -> float:
    """Sum of pairwise attraction over all unordered cell pairs."""
    m = grid.masses.ravel()
    c = _coefficients(grid.k, params)
    return 0.5 * float(m @ c @ m)


def cohesion_gradient(grid: MassGrid, at: tuple, params: ForceParams = ForceParams()) -> float:
    """d(total_cohesion)/d(mass at `at`) = c0 * sum of m_other / d**q."""
    i, j = at
    k = grid.k
    if not (0 <= i < k and 0 <= j < k):
        raise IndexError(f"cell {at} outside {k}x{k} grid")
    m = grid.masses.ravel()
    c = _coefficients(k, params)
    return float(c[i * k + j] @ m)


def _box_vertices(epsilon: float) -> np.ndarray:
    """All 2**9 corner mass assignments of the box [1, 1+epsilon]**9."""
    bits = (np.arange(512)[:, None] >> np.arange(9)[None, :]) & 1
    return 1.0 + epsilon * bits.astype(float)


def _case_pairs(kind: str):
    if kind == "center_vs_neighbor":
        return [(CENTER, n) for n in NEIGHBORS]
    sq = {"neighbor_vs_adjacent_corner": 1, "neighbor_vs_far_corner": 5}[kind]
    return [
        (n, co)
        for n in NEIGHBORS
        for co in CORNERS
        if (n[0] - co[0]) ** 2 + (n[1] - co[1]) ** 2 == sq
    ]


def _require_q2(params: ForceParams):
    # dominance bounds are derived under the q = 2 substitution
    if params.q != 2:
        raise ValueError(f"dominance verification requires q = 2, got q = {params.q}")


def _find_violations(vertices: np.ndarray, kinds, params: ForceParams):
    grads = vertices @ _coefficients(3, params)  # coefficient matrix is symmetric
    violations = []
    for kind in kinds:
        for first, second in _case_pairs(kind):
            a = first[0] * 3 + first[1]
            b = second[0] * 3 + second[1]
            gap = grads[:, a] - grads[:, b]
            for v in np.nonzero(gap <= 0.0)[0]:
                masses = tuple(float(x) for x in vertices[v])
                violations.append(Violation(masses, kind, first, second, float(gap[v])))
    violations.sort(key=lambda x: (x.kind, x.first, x.second, x.masses))
    return violations


def verify_center_dominance(epsilon: float, params: ForceParams = ForceParams()) -> DominanceReport:
    """Exhaustively check strict gradient dominance over the box [1, 1+eps]**9.

    The gradients are linear in each mass, so the minimum of every inequality
    gap over the box is attained at a box vertex; checking all 512 vertices
    therefore decides the whole box.  Checks gradient(center) > gradient(n)
    for every direct neighbor n and gradient(n) > gradient(co) for every
    (neighbor, corner) pair.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    _require_q2(params)
    vertices = _box_vertices(epsilon)
    violations = _find_violations(vertices, DOMINANCE_CASES, params)
    return DominanceReport(epsilon, len(vertices), violations)


def critical_epsilon(case: str, tol: float = 1e-9, params: ForceParams = ForceParams()) -> float:
    """Smallest epsilon at which vertex enumeration finds a violation of `case`.

    Violations are monotone in epsilon (the box only grows), so binary
    search on the enumeration predicate converges to the crossing point.
    """
    if case not in DOMINANCE_CASES:
        raise ValueError(f"unknown case {case!r}, expected one of {DOMINANCE_CASES}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    _require_q2(params)

    def violated(eps: float) -> bool:
        return bool(_find_violations(_box_vertices(eps), [case], params))

    lo, hi = 0.0, 1.0
    while not violated(hi):  # all known crossings are < 1; defensive anyway
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
