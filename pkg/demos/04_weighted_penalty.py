"""The distance-weighted L2 penalty and its neutral limit.

Each 3x3 kernel cell pays rent proportional to a factor chosen by its
distance from the center: gamma for the center, 1 for the edge-adjacent
ring, eta for the corners, all normalized by the mean factor Z so the
overall pressure stays comparable to plain weight decay.  gamma < 1 with
eta > 1 makes outer mass expensive and center mass cheap.
"""

import numpy as np

from locoreg.regularizer import (
    Kernel,
    RegSpec,
    distance_class_loss,
    factor_grid,
    format_regspec,
    loco_grad,
    loco_loss,
    normalization_Z,
    parse_regspec,
    squared_distance_classes,
)


def main():
    for gamma, eta in ((1.0, 1.0), (0.5, 2.0), (0.7, 0.77)):
        z = normalization_Z(gamma, eta)
        print(f"gamma={gamma} eta={eta}: Z={z:.4f}")
        print(factor_grid(gamma, eta))

    rng = np.random.default_rng(0)
    kernel = Kernel(rng.standard_normal((3, 3)))
    lam = 5e-4

    neutral = RegSpec(lam, 1.0, 1.0)
    print("\nneutral factors reproduce plain L2 exactly")
    print("  weighted loss:", loco_loss(kernel, neutral))
    print("  lam * sum w^2:", lam * np.sum(kernel.weights**2))
    print(
        "  gradients equal:",
        np.array_equal(loco_grad(kernel, neutral).weights, 2.0 * lam * kernel.weights),
    )

    spread = RegSpec(lam, 0.5, 2.0)
    print("\nper-cell price of a unit weight (lam=1), gamma=0.5 eta=2")
    prices = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            basis = np.zeros((3, 3))
            basis[i, j] = 1.0
            prices[i, j] = loco_loss(Kernel(basis), RegSpec(1.0, 0.5, 2.0))
    print(prices)
    print("weighted loss on the random kernel:", loco_loss(kernel, spread))

    print("\nlarger kernels use squared-distance classes")
    print(squared_distance_classes(5))
    k5 = Kernel(rng.standard_normal((5, 5)))
    factors = {0: 0.5, 1: 1.0, 2: 2.0, 4: 2.5, 5: 3.0, 8: 4.0}
    print("5x5 class-factor loss:", distance_class_loss(k5, lam, factors))

    print("\nspecs serialize to a small key-value block")
    text = format_regspec(spread)
    print(text)
    print("round trip ->", parse_regspec(text))


if __name__ == "__main__":
    main()
