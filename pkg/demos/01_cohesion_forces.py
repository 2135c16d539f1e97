"""Pairwise cohesion on a 3x3 mass grid, and when the center stops winning.

Every pair of cells attracts like point masses: c0 * m * m' / d^q.  The
demo sums those forces, differentiates them per cell, and then asks the
key structural question: over every corner of the box [1, 1+eps]^9, does
the center always feel at least as much pull as its neighbors?
"""

import numpy as np

from locoreg.cohesion import (
    DOMINANCE_CASES,
    ForceParams,
    MassGrid,
    cohesion_gradient,
    critical_epsilon,
    pairwise_force,
    total_cohesion,
    verify_center_dominance,
)


def main():
    params = ForceParams()  # c0=1, inverse-square
    print("single pair: masses 2 and 3 at distance 1 ->", pairwise_force(2.0, 3.0, 1.0, params))

    grid = MassGrid(np.ones((3, 3)))
    print("\nuniform 3x3 grid")
    print("total cohesion:", total_cohesion(grid, params))
    for cell in ((1, 1), (0, 1), (0, 0)):
        print(f"gradient at {cell}:", cohesion_gradient(grid, cell, params))

    # load one neighbor cell and watch the pull shift toward it
    tilted = np.ones((3, 3))
    tilted[0, 1] = 1.5
    grid = MassGrid(tilted)
    print("\nneighbor (0,1) raised to 1.5")
    print("center gradient:  ", cohesion_gradient(grid, (1, 1), params))
    print("neighbor gradient:", cohesion_gradient(grid, (0, 1), params))

    print("\ncenter dominance over the 512 box vertices")
    for eps in (0.3, 0.6, 0.675, 0.7):
        report = verify_center_dominance(eps)
        print(f"  eps={eps:<6} violations={len(report.violations)}")

    print("\ncritical half-widths (binary search to 1e-9)")
    for case in DOMINANCE_CASES:
        print(f"  {case:<28} {critical_epsilon(case):.9f}")

    report = verify_center_dominance(0.7)
    worst = report.violations[0]
    print("\nfirst violating vertex at eps=0.7")
    print("  masses (row-major):", worst.masses)
    print(f"  {worst.kind}: cells {worst.first} vs {worst.second}, gap {worst.gap:.4f}")


if __name__ == "__main__":
    main()
