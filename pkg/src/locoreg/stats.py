"""Weight-locality statistics over collections of trained conv kernels.

Kernels are grouped into distance classes: cells at equal squared Euclidean
distance from the kernel center (center itself, edge-adjacent cells, the
diagonal ring, and further rings for k > 3).  Per kernel we take the
difference of mean weight magnitude between two classes, standardize it by
its layer's spread, pool across layers, and ask with a one-sided t-test
whether weights sit significantly heavier near the center.  The same class
means also drive a per-layer schedule of regularization factors: layers
whose centers are already heavy get a gentler center factor, and so on.
"""

import csv
import io as _io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from locoreg.regularizer import Kernel, squared_distance_classes

#: layer population spread below this counts as degenerate
DEGENERATE_SIGMA = 1e-12

#: classes used by the schedule: center, edge-adjacent, diagonal
CENTER_CLASS = 0
NEAR_CLASS = 1
DIAG_CLASS = 2

SUBSETS = ("all", "lower_half", "upper_half")


class DegenerateLayerError(ValueError):
    """Layer whose observations have (numerically) zero spread."""

    def __init__(self, message, sigma):
        super().__init__(message)
        self.sigma = sigma


@dataclass
class KernelLayer:
    """One conv layer's spatial kernels, shaped (k, k, c_in, c_out)."""

    name: str
    depth: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 4:
            raise ValueError(f"layer weights must be 4-D (k, k, c_in, c_out), got {w.ndim}-D")
        kh, kw = w.shape[:2]
        if kh != kw:
            raise ValueError(f"kernel window must be square, got {kh}x{kw}")
        if kh % 2 == 0:
            raise ValueError(f"kernel side must be odd, got {kh}")
        if not np.all(np.isfinite(w)):
            raise ValueError(f"layer {self.name!r} contains non-finite weights")
        self.weights = w

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def n_kernels(self) -> int:
        return self.weights.shape[2] * self.weights.shape[3]

    def kernel_stack(self) -> np.ndarray:
        """(c_in*c_out, k, k) view of the spatial kernels, input-major order."""
        return np.moveaxis(self.weights, (2, 3), (0, 1)).reshape(self.n_kernels, self.k, self.k)


@dataclass
class KernelSet:
    """A model's conv kernels, layers ordered by depth."""

    model: str
    layers: list
    dataset: str = None

    def __post_init__(self):
        depths = [layer.depth for layer in self.layers]
        if len(set(depths)) != len(depths):
            raise ValueError(f"duplicate layer depths in {self.model!r}")
        self.layers = sorted(self.layers, key=lambda layer: layer.depth)


@dataclass(frozen=True)
class IndexClasses:
    """Partition of the k x k grid by squared distance to the center."""

    k: int
    classes: tuple  # ordered (squared_distance, cells) pairs, cells a tuple

    def cells(self, squared_distance: int) -> tuple:
        for d, cells in self.classes:
            if d == squared_distance:
                return cells
        raise KeyError(f"no class at squared distance {squared_distance} for k={self.k}")

    @property
    def distances(self) -> tuple:
        return tuple(d for d, _ in self.classes)


@dataclass(frozen=True)
class ProfileRow:
    comparison: str
    subset: str
    m: float
    n: int
    t: float
    p: float
    stars: str


@dataclass(frozen=True)
class ScheduleEntry:
    layer: str
    gamma: float
    eta: float
    c: float

    def __post_init__(self):
        if not self.gamma > 0 or not self.eta > 0:
            raise ValueError(f"factors must be positive, got ({self.gamma}, {self.eta})")


def index_classes(k: int) -> IndexClasses:
    """Distance-class partition of the k x k grid, nearest class first."""
    grid = squared_distance_classes(k)
    classes = []
    for d in sorted(set(int(x) for x in grid.ravel())):
        rows, cols = np.nonzero(grid == d)
        classes.append((d, tuple(zip(rows.tolist(), cols.tolist()))))
    return IndexClasses(k, tuple(classes))


def class_label(squared_distance: int) -> str:
    return {0: "center", 1: "near", 2: "diag"}.get(squared_distance, f"d{squared_distance}")


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def group_mean(kernel, cells, use_abs: bool = True) -> float:
    """Mean weight (or weight magnitude) over the given kernel cells.

    Summed with math.fsum, so the result is the correctly rounded mean and
    closed-form fixtures hold exactly in double precision.
    """
    w = kernel.weights if isinstance(kernel, Kernel) else np.asarray(kernel, dtype=float)
    cells = tuple(cells)
    if not cells:
        raise ValueError("empty cell set")
    k = w.shape[0]
    for (i, j) in cells:
        if not (0 <= i < k and 0 <= j < k):
            raise IndexError(f"cell ({i}, {j}) outside {k}x{k} kernel")
    vals = [abs(float(w[i, j])) if use_abs else float(w[i, j]) for (i, j) in cells]
    return math.fsum(vals) / len(vals)


def _as_stack(kernels) -> np.ndarray:
    if isinstance(kernels, np.ndarray) and kernels.ndim == 3:
        return np.asarray(kernels, dtype=float)
    return np.stack([k.weights if isinstance(k, Kernel) else np.asarray(k, float) for k in kernels])


def _class_means(stack, cells, use_abs):
    rows = [i for i, _ in cells]
    cols = [j for _, j in cells]
    vals = np.abs(stack) if use_abs else stack
    return vals[:, rows, cols].mean(axis=1)


def layer_profile(kernels, cells_a, cells_b, use_abs: bool = True) -> np.ndarray:
    """Standardized per-kernel differences of class means within one layer.

    The raw difference per kernel is mean(|w| over cells_a) minus the same
    over cells_b; standardization divides by the population (divide-by-n)
    standard deviation of those differences across the layer.
    """
    stack = _as_stack(kernels)
    if stack.shape[0] < 2:
        raise ValueError(f"need at least 2 kernels, got {stack.shape[0]}")
    diffs = _class_means(stack, tuple(cells_a), use_abs) - _class_means(
        stack, tuple(cells_b), use_abs
    )
    sigma = float(diffs.std())
    if sigma < DEGENERATE_SIGMA:
        raise DegenerateLayerError(
            f"layer spread {sigma:.3g} below {DEGENERATE_SIGMA:g}; "
            "cannot standardize identical kernels",
            sigma,
        )
    return diffs / sigma


def student_cdf(t: float, df: int) -> float:
    """CDF of Student's t via the regularized incomplete beta function."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    x = df / (df + t * t)
    tail = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return 1.0 - tail if t >= 0 else tail


def t_test_one_sided(samples) -> tuple:
    """One-sided one-sample t-test of mean > 0; returns (t, p)."""
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1 or s.shape[0] < 2:
        raise ValueError("need a flat sequence of at least 2 samples")
    n = s.shape[0]
    sd = float(s.std(ddof=1))
    if sd < DEGENERATE_SIGMA:
        raise ValueError("zero sample variance")
    t = float(s.mean()) / (sd / math.sqrt(n))
    return t, 1.0 - student_cdf(t, n - 1)


def eligible_layers(kset: KernelSet) -> list:
    """Layers that enter the statistics: spatial convs with k >= 3."""
    return [layer for layer in kset.layers if layer.k >= 3]


def _select_subset(layers, subset):
    if subset not in SUBSETS:
        raise ValueError(f"unknown subset {subset!r}, expected one of {SUBSETS}")
    if subset == "all":
        return layers
    half = math.ceil(len(layers) / 2)
    return layers[:half] if subset == "lower_half" else layers[half:]


def aggregate_profile(
    kset: KernelSet,
    class_a: int = CENTER_CLASS,
    class_b: int = NEAR_CLASS,
    subset: str = "all",
    use_abs: bool = True,
) -> ProfileRow:
    """Pooled locality statistic for one pair of distance classes.

    class_a and class_b are squared distances from the kernel center; the
    matching cells are looked up per layer, so layers of different k mix
    freely.  Layers missing a class or with degenerate spread are skipped
    with a warning.
    """
    layers = _select_subset(eligible_layers(kset), subset)
    if not layers:
        raise ValueError(f"no eligible layers in subset {subset!r}")
    pooled = []
    for layer in layers:
        classes = index_classes(layer.k)
        try:
            cells_a = classes.cells(class_a)
            cells_b = classes.cells(class_b)
        except KeyError:
            warnings.warn(
                f"layer {layer.name!r} (k={layer.k}) lacks squared distance "
                f"{class_a} or {class_b}; skipped"
            )
            continue
        try:
            pooled.append(layer_profile(layer.kernel_stack(), cells_a, cells_b, use_abs))
        except DegenerateLayerError as exc:
            warnings.warn(f"layer {layer.name!r} degenerate (sigma={exc.sigma:.3g}); skipped")
    if not pooled:
        raise ValueError(f"no usable layers in subset {subset!r}")
    obs = np.concatenate(pooled)
    t, p = t_test_one_sided(obs)
    return ProfileRow(
        comparison=f"{class_label(class_a)}-{class_label(class_b)}",
        subset=subset,
        m=float(obs.mean()),
        n=int(obs.shape[0]),
        t=t,
        p=p,
        stars=significance_stars(p),
    )


def profile_table(kset: KernelSet, use_abs: bool = True) -> list:
    """All ProfileRows: adjacent class pairs x subsets, as the CLI reports.

    Comparisons are (center, near) and (near, diag); subsets cover all
    layers, the shallower half, and the deeper half.
    """
    rows = []
    for a, b in ((CENTER_CLASS, NEAR_CLASS), (NEAR_CLASS, DIAG_CLASS)):
        for subset in SUBSETS:
            try:
                rows.append(aggregate_profile(kset, a, b, subset, use_abs))
            except ValueError:
                continue  # e.g. upper_half of a single-layer set
    if not rows:
        raise ValueError("no profile rows could be computed")
    return rows


def affine_modulation(r: float, c: float) -> float:
    """Schedule modulation 1 + c(r - 1): identity at r = 1, slope c."""
    return 1.0 + c * (r - 1.0)


def derive_schedule(models, c: float = 1.5, use_abs: bool = True) -> list:
    """Per-layer (gamma, eta) factors from observed class-mean ratios.

    For each layer, r = sum-over-kernels of near-class mean divided by the
    same sum for the center (resp. diagonal) class, averaged over models.
    gamma = 1 + c(r_center - 1), eta = 1/(1 + c(r_diag - 1)): centers that
    already dominate their near ring (r < 1) earn gamma < 1, i.e. less
    center penalty.
    """
    if not models:
        raise ValueError("need at least one model")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    per_model = [eligible_layers(m) for m in models]
    counts = {len(layers) for layers in per_model}
    if len(counts) != 1:
        raise ValueError(f"models disagree on eligible layer count: {sorted(counts)}")
    entries = []
    for idx in range(counts.pop()):
        ks = {layers[idx].k for layers in per_model}
        if len(ks) != 1:
            raise ValueError(f"models disagree on kernel size at layer {idx}: {sorted(ks)}")
        classes = index_classes(ks.pop())
        r_center, r_diag = [], []
        for layers in per_model:
            layer = layers[idx]
            stack = layer.kernel_stack()
            sums = {
                d: float(_class_means(stack, classes.cells(d), use_abs).sum())
                for d in (CENTER_CLASS, NEAR_CLASS, DIAG_CLASS)
            }
            for d in (CENTER_CLASS, DIAG_CLASS):
                if sums[d] <= 0:
                    raise ValueError(
                        f"layer {layer.name!r}: non-positive {class_label(d)} mean sum"
                    )
            r_center.append(sums[NEAR_CLASS] / sums[CENTER_CLASS])
            r_diag.append(sums[NEAR_CLASS] / sums[DIAG_CLASS])
        gamma = affine_modulation(float(np.mean(r_center)), c)
        eta_denom = affine_modulation(float(np.mean(r_diag)), c)
        if gamma <= 0 or eta_denom <= 0:
            raise ValueError(
                f"layer {per_model[0][idx].name!r}: modulation produced a "
                "non-positive factor; lower c"
            )
        entries.append(ScheduleEntry(per_model[0][idx].name, gamma, 1.0 / eta_denom, c))
    return entries


def format_schedule(entries) -> str:
    """CSV with header layer,gamma,eta,c; floats via repr for lossless round trips."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["layer", "gamma", "eta", "c"])
    for e in entries:
        writer.writerow([e.layer, repr(e.gamma), repr(e.eta), repr(e.c)])
    return buf.getvalue()


def parse_schedule(text: str) -> list:
    """Inverse of format_schedule."""
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty schedule") from None
    if header != ["layer", "gamma", "eta", "c"]:
        raise ValueError(f"bad schedule header {header!r}")
    entries = []
    for row in reader:
        if not row:
            continue
        if len(row) != 4:
            raise ValueError(f"bad schedule row {row!r}")
        entries.append(ScheduleEntry(row[0], float(row[1]), float(row[2]), float(row[3])))
    return entries
