"""A small from-scratch convolutional network with manual gradients.

Activations are NHWC, conv weights HWIO with shape (3, 3, c_in, c_out).
Convolutions use the cross-correlation orientation (no kernel flip) with
same zero padding and stride 1, so a delta input stamps the flipped
kernel around the delta.  Each conv block runs conv, batch norm, ReLU,
then 2x2 max pooling; one dense layer produces class logits trained with
softmax cross entropy.  Updates are SGD with momentum:

    buf = momentum * buf + grad
    w  -= lr * buf

Only the spatial conv kernels carry a regularization penalty, in both
modes, so the uniform-vs-weighted comparison isolates the spatial
weighting itself.  Uniform mode runs the weighted code path with the
neutral factors (1, 1), which is arithmetically identical to plain L2.
Batch norm uses batch statistics while training and running averages in
eval mode (biased variance in both, momentum 0.9, eps 1e-5).  Every
random draw (init, shuffles, flips, synthetic data) flows through one
seeded numpy Generator, so runs are bit-reproducible.
"""

import dataclasses

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import logsumexp

from locoreg.regularizer import factor_grid, normalization_Z
from locoreg.stats import KernelLayer, KernelSet

BN_MOMENTUM = 0.9
BN_EPS = 1e-5
REG_MODES = ("uniform", "loco")


@dataclasses.dataclass(frozen=True)
class TinyNetConfig:
    """Architecture: one conv block per channel count, then a dense head."""

    input_hw: int = 16
    in_channels: int = 1
    conv_channels: tuple = (8, 16)
    n_classes: int = 4
    seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self):
        if not self.conv_channels or any(c < 1 for c in self.conv_channels):
            raise ValueError("conv_channels must be positive and non-empty")
        if self.n_classes < 2:
            raise ValueError("need at least two classes")
        if self.in_channels < 1:
            raise ValueError("in_channels must be positive")
        if not self.init_scale > 0:
            raise ValueError("init_scale must be positive")
        hw = self.input_hw
        for i in range(len(self.conv_channels)):
            if hw < 2 or hw % 2:
                raise ValueError(
                    f"spatial size {hw} cannot pass 2x2 pooling at block {i}"
                )
            hw //= 2
        if hw < 1:
            raise ValueError("spatial dims collapse before the dense head")

    @property
    def feature_hw(self) -> int:
        return self.input_hw >> len(self.conv_channels)

    @property
    def n_features(self) -> int:
        return self.feature_hw * self.feature_hw * self.conv_channels[-1]


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Optimizer, schedule, and regularization choices for a run."""

    lr: float = 0.05
    lr_decay: float = 1.0
    decay_epochs: tuple = ()
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 5
    lam: float = 5e-4
    reg_mode: str = "uniform"
    loco_factors: tuple = ()  # (gamma, eta) per conv layer; a single pair broadcasts
    hflip: bool = True

    def __post_init__(self):
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not self.lr > 0 or not self.lr_decay > 0:
            raise ValueError("learning rates must be positive")
        if self.reg_mode not in REG_MODES:
            raise ValueError(f"reg_mode must be one of {REG_MODES}")
        if self.reg_mode == "loco" and not self.loco_factors:
            raise ValueError("loco mode needs at least one (gamma, eta) pair")

    def learning_rate(self, epoch: int) -> float:
        drops = sum(1 for d in self.decay_epochs if d <= epoch)
        return self.lr * self.lr_decay**drops


@dataclasses.dataclass(frozen=True)
class TrainReport:
    """Per-epoch curves plus the final conv kernels."""

    train_losses: tuple
    data_losses: tuple
    reg_losses: tuple
    test_errors: tuple
    kernels: KernelSet


@dataclasses.dataclass(frozen=True)
class Dataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    name: str = None

    def __post_init__(self):
        for x, y, part in (
            (self.x_train, self.y_train, "train"),
            (self.x_test, self.y_test, "test"),
        ):
            if x.ndim != 4:
                raise ValueError(f"{part} images must be NHWC, got {x.shape}")
            if len(x) == 0:
                raise ValueError(f"{part} split is empty")
            if y.shape != (len(x),):
                raise ValueError(f"{part} labels do not match images")


@dataclasses.dataclass
class TinyNet:
    cfg: TinyNetConfig
    params: dict
    state: dict
    bufs: dict


def layer_factors(tcfg: TrainConfig, n_convs: int) -> tuple:
    """Resolve per-conv-layer (gamma, eta) pairs for either reg mode."""
    if tcfg.reg_mode == "uniform":
        return ((1.0, 1.0),) * n_convs
    pairs = tuple((float(g), float(e)) for g, e in tcfg.loco_factors)
    if len(pairs) == 1:
        pairs = pairs * n_convs
    if len(pairs) != n_convs:
        raise ValueError(
            f"{len(pairs)} factor pairs for {n_convs} conv layers"
        )
    return pairs


def init_params(cfg: TinyNetConfig, rng) -> dict:
    """He-style init for convs and the dense head; BN starts at identity."""
    params = {}
    cin = cfg.in_channels
    for i, cout in enumerate(cfg.conv_channels):
        std = cfg.init_scale * np.sqrt(2.0 / (9 * cin))
        params[f"conv{i}"] = rng.standard_normal((3, 3, cin, cout)) * std
        params[f"bn{i}_gamma"] = np.ones(cout)
        params[f"bn{i}_beta"] = np.zeros(cout)
        cin = cout
    std = cfg.init_scale * np.sqrt(2.0 / cfg.n_features)
    params["dense_w"] = rng.standard_normal((cfg.n_features, cfg.n_classes)) * std
    params["dense_b"] = np.zeros(cfg.n_classes)
    return params


def init_state(cfg: TinyNetConfig) -> dict:
    state = {}
    for i, cout in enumerate(cfg.conv_channels):
        state[f"bn{i}_mean"] = np.zeros(cout)
        state[f"bn{i}_var"] = np.ones(cout)
    return state


def new_network(cfg: TinyNetConfig, rng=None) -> TinyNet:
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    params = init_params(cfg, rng)
    bufs = {k: np.zeros_like(v) for k, v in params.items()}
    return TinyNet(cfg, params, init_state(cfg), bufs)


def conv_forward(x, w):
    """Same-padded stride-1 cross-correlation of NHWC input with HWIO weights."""
    n, h, width, cin = x.shape
    if w.shape[:3] != (3, 3, cin):
        raise ValueError(f"weights {w.shape} do not fit input {x.shape}")
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))  # (n, h, w, cin, 3, 3)
    out = np.einsum("nhwcuv,uvcf->nhwf", win, w, optimize=True)
    return out, win


def conv_backward(dy, win, w, x_shape):
    dw = np.einsum("nhwcuv,nhwf->uvcf", win, dy, optimize=True)
    n, h, width, cin = x_shape
    dxp = np.zeros((n, h + 2, width + 2, cin))
    for u in range(3):
        for v in range(3):
            dxp[:, u : u + h, v : v + width, :] += np.tensordot(
                dy, w[u, v], axes=([3], [1])
            )
    return dw, dxp[:, 1 : h + 1, 1 : width + 1, :]


def bn_forward(x, gamma, beta, running_mean, running_var, mode):
    if mode == "train":
        mean = x.mean(axis=(0, 1, 2))
        var = x.var(axis=(0, 1, 2))
        new_mean = BN_MOMENTUM * running_mean + (1 - BN_MOMENTUM) * mean
        new_var = BN_MOMENTUM * running_var + (1 - BN_MOMENTUM) * var
    else:
        mean, var = running_mean, running_var
        new_mean, new_var = running_mean, running_var
    inv = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean) * inv
    return gamma * xhat + beta, (xhat, gamma, inv), (new_mean, new_var)


def bn_backward(dy, cache):
    xhat, gamma, inv = cache
    m = xhat.shape[0] * xhat.shape[1] * xhat.shape[2]
    dgamma = np.einsum("nhwc,nhwc->c", dy, xhat)
    dbeta = dy.sum(axis=(0, 1, 2))
    dxhat = dy * gamma
    # batch statistics are functions of x, hence the two correction sums
    dx = (
        inv
        / m
        * (m * dxhat - dxhat.sum(axis=(0, 1, 2)) - xhat * np.einsum("nhwc,nhwc->c", dxhat, xhat))
    )
    return dx, dgamma, dbeta


def maxpool_forward(x):
    n, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    tiles = (
        x.reshape(n, h2, 2, w2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, h2, w2, c, 4)
    )
    idx = tiles.argmax(axis=-1)  # first max wins on ties
    out = np.take_along_axis(tiles, idx[..., None], axis=-1)[..., 0]
    return out, (idx, x.shape)


def maxpool_backward(dy, cache):
    idx, (n, h, w, c) = cache
    h2, w2 = h // 2, w // 2
    dtiles = np.zeros((n, h2, w2, c, 4))
    np.put_along_axis(dtiles, idx[..., None], dy[..., None], axis=-1)
    return (
        dtiles.reshape(n, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(n, h, w, c)
    )


def softmax(logits):
    return np.exp(logits - logsumexp(logits, axis=1, keepdims=True))


def cross_entropy(logits, labels):
    """Mean negative log-likelihood and its gradient in the logits."""
    n = len(labels)
    lse = logsumexp(logits, axis=1)
    loss = float(np.mean(lse - logits[np.arange(n), labels]))
    dlogits = softmax(logits)
    dlogits[np.arange(n), labels] -= 1.0
    return loss, dlogits / n


def forward(net: TinyNet, x, mode: str = "train"):
    """Run the stack; returns logits, layer caches, and updated BN state."""
    if x.ndim != 4 or x.shape[1:] != (net.cfg.input_hw, net.cfg.input_hw, net.cfg.in_channels):
        raise ValueError(
            f"batch shape {x.shape} does not match configured input "
            f"({net.cfg.input_hw}, {net.cfg.input_hw}, {net.cfg.in_channels})"
        )
    caches = []
    new_state = {}
    out = x
    for i in range(len(net.cfg.conv_channels)):
        x_in = out
        conv_out, win = conv_forward(x_in, net.params[f"conv{i}"])
        bn_out, bn_cache, (rm, rv) = bn_forward(
            conv_out,
            net.params[f"bn{i}_gamma"],
            net.params[f"bn{i}_beta"],
            net.state[f"bn{i}_mean"],
            net.state[f"bn{i}_var"],
            mode,
        )
        new_state[f"bn{i}_mean"], new_state[f"bn{i}_var"] = rm, rv
        relu_out = np.maximum(bn_out, 0.0)
        out, pool_cache = maxpool_forward(relu_out)
        caches.append((x_in.shape, win, bn_cache, bn_out, pool_cache))
    flat = out.reshape(len(out), -1)
    logits = flat @ net.params["dense_w"] + net.params["dense_b"]
    caches.append((flat, out.shape))
    return logits, caches, new_state


def regularization(net: TinyNet, lam: float, factors) -> tuple:
    """Penalty over all conv kernels and its per-parameter gradients."""
    loss = 0.0
    grads = {}
    for i, (gamma, eta) in enumerate(factors):
        w = net.params[f"conv{i}"]
        grid = factor_grid(gamma, eta)[:, :, None, None]
        z = normalization_Z(gamma, eta)
        loss += float(lam / z * np.sum(grid * (w * w)))
        grads[f"conv{i}"] = 2.0 * lam / z * grid * w
    return loss, grads


def loss_and_grads(net: TinyNet, x, y, lam: float, factors, mode: str = "train"):
    """Total loss (data + penalty), gradients for every parameter, BN state."""
    logits, caches, new_state = forward(net, x, mode)
    data_loss, dlogits = cross_entropy(logits, y)
    reg_loss, grads = regularization(net, lam, factors)

    flat, pooled_shape = caches[-1]
    grads["dense_w"] = flat.T @ dlogits
    grads["dense_b"] = dlogits.sum(axis=0)
    dflat = dlogits @ net.params["dense_w"].T
    dout = dflat.reshape(pooled_shape)

    for i in reversed(range(len(net.cfg.conv_channels))):
        x_shape, win, bn_cache, bn_out, pool_cache = caches[i]
        drelu = maxpool_backward(dout, pool_cache)
        dbn = drelu * (bn_out > 0)
        dconv, dgamma, dbeta = bn_backward(dbn, bn_cache)
        dw, dout = conv_backward(dconv, win, net.params[f"conv{i}"], x_shape)
        grads[f"conv{i}"] = grads.get(f"conv{i}", 0.0) + dw
        grads[f"bn{i}_gamma"] = dgamma
        grads[f"bn{i}_beta"] = dbeta

    return data_loss + reg_loss, data_loss, reg_loss, grads, new_state


def train_step(net: TinyNet, x, y, lr: float, momentum: float, lam: float, factors):
    """One SGD+momentum update in place; returns (total, data, reg) losses."""
    total, data_loss, reg_loss, grads, new_state = loss_and_grads(net, x, y, lam, factors)
    if not np.isfinite(total):
        raise FloatingPointError(
            f"non-finite training loss {total!r} (data {data_loss!r}, reg {reg_loss!r})"
        )
    for name in net.params:
        net.bufs[name] = momentum * net.bufs[name] + grads[name]
        net.params[name] = net.params[name] - lr * net.bufs[name]
    net.state.update(new_state)
    return total, data_loss, reg_loss


def predict(net: TinyNet, x) -> np.ndarray:
    logits, _, _ = forward(net, x, mode="eval")
    return logits.argmax(axis=1)


def error_rate(net: TinyNet, x, y) -> float:
    return float(np.mean(predict(net, x) != y))


def snapshot_kernels(net: TinyNet, model: str, dataset: str = None) -> KernelSet:
    layers = [
        KernelLayer(f"conv{i + 1}", i, net.params[f"conv{i}"].copy())
        for i in range(len(net.cfg.conv_channels))
    ]
    return KernelSet(model, layers, dataset)


def train(cfg: TinyNetConfig, tcfg: TrainConfig, data: Dataset) -> TrainReport:
    """Full training run, bit-reproducible for a fixed cfg.seed."""
    rng = np.random.default_rng(cfg.seed)
    net = new_network(cfg, rng)
    factors = layer_factors(tcfg, len(cfg.conv_channels))
    n = len(data.x_train)

    losses, data_losses, reg_losses, test_errors = [], [], [], []
    for epoch in range(tcfg.epochs):
        lr = tcfg.learning_rate(epoch)
        order = rng.permutation(n)
        sums = np.zeros(3)
        for start in range(0, n, tcfg.batch_size):
            idx = order[start : start + tcfg.batch_size]
            xb = data.x_train[idx]
            if tcfg.hflip:
                flip = rng.random(len(idx)) < 0.5
                xb = np.where(flip[:, None, None, None], xb[:, :, ::-1, :], xb)
            step = train_step(net, xb, data.y_train[idx], lr, tcfg.momentum, tcfg.lam, factors)
            sums += np.asarray(step) * len(idx)
        losses.append(float(sums[0] / n))
        data_losses.append(float(sums[1] / n))
        reg_losses.append(float(sums[2] / n))
        test_errors.append(error_rate(net, data.x_test, data.y_test))

    kernels = snapshot_kernels(net, f"tinycnn-{tcfg.reg_mode}", data.name)
    return TrainReport(
        tuple(losses), tuple(data_losses), tuple(reg_losses), tuple(test_errors), kernels
    )


def make_shapes(
    n_train: int, n_test: int, hw: int = 16, seed: int = 0, noise: float = 0.1
) -> Dataset:
    """Four-class shape images: filled square, hollow square, disk, cross.

    Shapes get a random center, size, and brightness plus Gaussian pixel
    noise.  All four classes are mirror-symmetric, so horizontal flips
    preserve labels.
    """
    if hw < 8:
        raise ValueError("images smaller than 8 pixels leave no room for shapes")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:hw, 0:hw]
    s_hi = min(4, (hw - 4) // 2)  # keep shape plus a 1-pixel border inside

    def render(count):
        x = np.zeros((count, hw, hw, 1))
        y = np.arange(count) % 4
        for i in range(count):
            s = int(rng.integers(2, s_hi + 1))
            r = int(rng.integers(s + 1, hw - s - 1))
            c = int(rng.integers(s + 1, hw - s - 1))
            a = rng.uniform(0.8, 1.2)
            img = np.zeros((hw, hw))
            if y[i] == 0:
                img[r - s : r + s + 1, c - s : c + s + 1] = a
            elif y[i] == 1:
                img[r - s : r + s + 1, c - s : c + s + 1] = a
                img[r - s + 1 : r + s, c - s + 1 : c + s] = 0.0
            elif y[i] == 2:
                img[(yy - r) ** 2 + (xx - c) ** 2 <= s * s] = a
            else:
                img[r - s : r + s + 1, c] = a
                img[r, c - s : c + s + 1] = a
            x[i, :, :, 0] = img + rng.normal(0.0, noise, (hw, hw))
        return x, y

    x_train, y_train = render(n_train)
    x_test, y_test = render(n_test)
    return Dataset(x_train, y_train, x_test, y_test, name="synthetic-shapes")
