"""Locality-weighted L2 regularization for square conv kernels.

A 3x3 kernel is penalized cell by cell: the center entry gets factor
gamma, the four edge-adjacent entries factor 1, the four corners factor
eta, and the whole penalty is divided by the mean factor Z so that
changing (gamma, eta) redistributes the penalty across cells without
changing its total for a kernel with equal squared entries.  gamma < 1 <
eta pushes weight mass toward the kernel center.
"""

from dataclasses import dataclass

import numpy as np

NEUTRAL = (1.0, 1.0)  # (gamma, eta) reproducing plain uniform L2


@dataclass(frozen=True)
class Kernel:
    """Square k x k weight matrix, k odd."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"kernel must be square 2-D, got shape {w.shape}")
        if w.shape[0] % 2 == 0:
            raise ValueError(f"kernel side must be odd, got {w.shape[0]}")
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class RegSpec:
    """Regularization strength and spatial shape parameters."""

    lam: float
    gamma: float = 1.0
    eta: float = 1.0
    p: int = 2

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.p not in (1, 2):
            raise ValueError(f"p must be 1 or 2, got {self.p}")


def normalization_Z(gamma: float, eta: float) -> float:
    """Mean cell factor (gamma + 4(1 + eta))/9 of the 3x3 factor grid."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return (gamma + 4.0 * (1.0 + eta)) / 9.0


def factor_grid(gamma: float, eta: float) -> np.ndarray:
    """3x3 grid of per-cell factors: gamma center, 1 edges, eta corners."""
    return np.array(
        [
            [eta, 1.0, eta],
            [1.0, gamma, 1.0],
            [eta, 1.0, eta],
        ]
    )


def _check_3x3(kernel: Kernel):
    if kernel.k != 3:
        raise ValueError(f"expected a 3x3 kernel, got {kernel.k}x{kernel.k}")


def loco_loss(kernel: Kernel, spec: RegSpec) -> float:
    """lambda/Z times the factor-weighted sum of |w|^p over the 3x3 kernel."""
    _check_3x3(kernel)
    z = normalization_Z(spec.gamma, spec.eta)
    factors = factor_grid(spec.gamma, spec.eta)
    w = kernel.weights
    mag = w * w if spec.p == 2 else np.abs(w)
    return float(spec.lam / z * np.sum(factors * mag))


def loco_grad(kernel: Kernel, spec: RegSpec) -> Kernel:
    """Entrywise derivative 2*lambda*factor/Z * w of the p=2 loss."""
    _check_3x3(kernel)
    if spec.p != 2:
        raise ValueError(f"gradient is defined for p = 2, got p = {spec.p}")
    z = normalization_Z(spec.gamma, spec.eta)
    factors = factor_grid(spec.gamma, spec.eta)
    return Kernel(2.0 * spec.lam / z * factors * kernel.weights)


def squared_distance_classes(k: int) -> np.ndarray:
    """k x k grid of squared Euclidean distances to the center cell."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"kernel side must be odd and >= 1, got {k}")
    h = k // 2
    off = np.arange(k) - h
    return (off[:, None] ** 2 + off[None, :] ** 2).astype(int)


def distance_class_loss(kernel: Kernel, lam: float, class_factors: dict, p: int = 2) -> float:
    """Penalty with one factor per squared distance from the kernel center.

    Factors are normalized by their mean over the k*k cells, so an all-ones
    factor map gives exactly lambda times the plain sum of |w|^p, and the
    3x3 map {0: gamma, 1: 1, 2: eta} reproduces loco_loss exactly.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    classes = squared_distance_classes(kernel.k)
    missing = sorted(int(d) for d in set(classes.ravel()) - set(class_factors))
    if missing:
        raise ValueError(f"no factor for squared distances {missing}")
    factors = np.array([[class_factors[d] for d in row] for row in classes], dtype=float)
    if np.any(factors <= 0):
        raise ValueError("class factors must be positive")
    w = kernel.weights
    mag = w * w if p == 2 else np.abs(w)
    return float(lam / factors.mean() * np.sum(factors * mag))


def pattern_weights(m, l) -> np.ndarray:
    """Optimal window weights for strengths m under locality weighting l.

    l must be symmetric about its center and strictly decreasing away from
    it; the optimum is simply the elementwise product m * l.
    """
    m = np.asarray(m, dtype=float)
    l = np.asarray(l, dtype=float)
    if m.ndim != 1 or l.ndim != 1:
        raise ValueError("m and l must be 1-D sequences")
    if m.shape != l.shape:
        raise ValueError(f"length mismatch: {m.shape[0]} vs {l.shape[0]}")
    if l.shape[0] % 2 == 0:
        raise ValueError("l needs a center element, so its length must be odd")
    if not np.array_equal(l, l[::-1]):
        raise ValueError("l must be symmetric about its center")
    half = l[l.shape[0] // 2 :]
    if half.shape[0] > 1 and not np.all(np.diff(half) < 0):
        raise ValueError("l must be strictly decreasing away from the center")
    return m * l


def format_regspec(spec: RegSpec) -> str:
    """Plain key = value text block; floats via repr for lossless round trips."""
    return (
        f"lambda = {spec.lam!r}\n"
        f"gamma = {spec.gamma!r}\n"
        f"eta = {spec.eta!r}\n"
        f"p = {spec.p}\n"
    )


def parse_regspec(text: str) -> RegSpec:
    """Inverse of format_regspec; blank lines and # comments are skipped."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in fields:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    known = {"lambda", "gamma", "eta", "p"}
    unknown = set(fields) - known
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)}")
    if "lambda" not in fields:
        raise ValueError("missing required key 'lambda'")
    return RegSpec(
        lam=float(fields["lambda"]),
        gamma=float(fields.get("gamma", "1")),
        eta=float(fields.get("eta", "1")),
        p=int(fields.get("p", "2")),
    )
