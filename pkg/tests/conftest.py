import numpy as np
import pytest

# 6x16 map with two strict peaks (a 6 at (2, 6) and a 5 at (2, 11)) riding
# on a broad plateau of 2s and 3s centered lower, around rows 3-5.  The
# plateau region out-sums either peak's surroundings, so sum-maximizing
# windows and cohesion-maximizing windows land in different places.
TWO_PEAK_MAP = np.array(
    [
        [0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 1, 2, 2, 1, 0, 2, 3, 1, 1, 1, 0],
        [1, 0, 0, 0, 1, 2, 6, 3, 1, 1, 2, 5, 1, 2, 1, 0],
        [0, 0, 0, 0, 1, 1, 3, 2, 2, 3, 2, 3, 2, 0, 0, 0],
        [0, 1, 0, 0, 0, 1, 2, 2, 2, 2, 3, 2, 2, 1, 0, 0],
        [0, 0, 0, 1, 0, 1, 1, 1, 2, 3, 3, 2, 1, 1, 0, 0],
    ],
    dtype=float,
)


@pytest.fixture
def two_peak_map():
    return TWO_PEAK_MAP.copy()


# classic reference kernels: a blur whose weights decay with distance from
# the center, and an edge detector whose center dominates in magnitude
GAUSSIAN_KERNEL = np.array(
    [
        [0.06, 0.12, 0.06],
        [0.12, 0.25, 0.12],
        [0.06, 0.12, 0.06],
    ]
)
LAPLACIAN_KERNEL = np.array(
    [
        [-1.0, -1.0, -1.0],
        [-1.0, 8.0, -1.0],
        [-1.0, -1.0, -1.0],
    ]
)


@pytest.fixture
def gaussian_kernel():
    return GAUSSIAN_KERNEL.copy()


@pytest.fixture
def laplacian_kernel():
    return LAPLACIAN_KERNEL.copy()


def stack_to_layer_weights(stack):
    """(n, k, k) kernel stack -> (k, k, 1, n) layer weight tensor."""
    return np.moveaxis(np.asarray(stack, dtype=float), 0, -1)[:, :, None, :]
