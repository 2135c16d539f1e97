"""Greedy placement of k x k feature windows on a 2-D map.

Two scoring strategies are supported.  "sum" ranks a window by the plain
sum of the values it covers; "cohesion" ranks it by the gravity-style
cohesion of the covered patch, which rewards strength concentrated near
the window center rather than spread across it.  On maps with a broad
plateau and a sharp peak the two strategies pick different windows.
"""

from dataclasses import dataclass

import numpy as np

from locoreg.cohesion import ForceParams, _coefficients

STRATEGIES = ("sum", "cohesion")


@dataclass
class FeatureMap2D:
    """Rectangular grid of non-negative feature strengths."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise ValueError(f"values must be a non-empty 2-D array, got shape {v.shape}")
        if np.any(v < 0):
            raise ValueError("feature strengths must be non-negative")
        self.values = v

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Placement:
    center: tuple
    score: float
    strategy: str


def _check_k(k: int):
    if k < 3 or k % 2 == 0:
        raise ValueError(f"window size must be odd and >= 3, got {k}")


def _check_strategy(strategy: str):
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")


def patch_score(
    fmap: FeatureMap2D,
    center: tuple,
    k: int = 3,
    strategy: str = "cohesion",
    params: ForceParams = ForceParams(),
) -> float:
    """Score of the k x k window centered at `center` under one strategy."""
    _check_k(k)
    _check_strategy(strategy)
    h = k // 2
    r, c = center
    if not (h <= r < fmap.rows - h and h <= c < fmap.cols - h):
        raise IndexError(f"window of size {k} at center {center} leaves the map")
    patch = fmap.values[r - h : r + h + 1, c - h : c + h + 1]
    if strategy == "sum":
        return float(patch.sum())
    m = patch.ravel()
    return 0.5 * float(m @ _coefficients(k, params) @ m)


def _score_all_centers(fmap, k, strategy, params):
    """(rows-k+1, cols-k+1) array of window scores, row i = center row i+k//2."""
    patches = np.lib.stride_tricks.sliding_window_view(fmap.values, (k, k))
    if strategy == "sum":
        return patches.sum(axis=(2, 3))
    flat = patches.reshape(*patches.shape[:2], k * k)
    coeff = _coefficients(k, params)
    return 0.5 * np.einsum("rci,ij,rcj->rc", flat, coeff, flat)


def locate_features(
    fmap: FeatureMap2D,
    k: int = 3,
    n: int = 1,
    strategy: str = "cohesion",
    params: ForceParams = ForceParams(),
    overlap_allowed: bool = False,
) -> list:
    """Greedily place n windows, best remaining score first.

    Ties go to the smallest (row, col) center.  With overlap_allowed false,
    each new window must be disjoint from every window already placed;
    raises ValueError if that leaves no candidate before n are placed.
    """
    _check_k(k)
    _check_strategy(strategy)
    if n < 1:
        raise ValueError(f"need n >= 1 placements, got {n}")
    if fmap.rows < k or fmap.cols < k:
        raise ValueError(f"{fmap.rows}x{fmap.cols} map cannot hold a {k}x{k} window")

    h = k // 2
    scores = _score_all_centers(fmap, k, strategy, params)
    valid = np.ones(scores.shape, dtype=bool)
    placements = []
    for _ in range(n):
        if not valid.any():
            raise ValueError(
                f"cannot place {n} distinct {k}x{k} windows, stuck after {len(placements)}"
            )
        masked = np.where(valid, scores, -np.inf)
        flat = int(np.argmax(masked))  # first max in row-major order: lexicographic tie-break
        r, c = divmod(flat, scores.shape[1])
        placements.append(Placement((r + h, c + h), float(scores[r, c]), strategy))
        if overlap_allowed:
            valid[r, c] = False
        else:
            # windows intersect iff centers are within k-1 in both axes
            r0, r1 = max(0, r - (k - 1)), min(scores.shape[0], r + k)
            c0, c1 = max(0, c - (k - 1)), min(scores.shape[1], c + k)
            valid[r0:r1, c0:c1] = False
    return placements
