"""How the random-feature inner product converges to the Gaussian kernel.

Draws 200 point pairs in [0, 1]^5 and reports, for increasing feature
counts L, the worst-case gap between phi(x)'phi(x') and the exact kernel
exp(-||x - x'||^2 / (2 sigma^2)).  Error shrinks roughly like 1/sqrt(L).
"""

import numpy as np

from dkl import rf

SIGMA = 1.0
DIM = 5


def main():
    rng = np.random.default_rng(0)
    pairs = rng.uniform(0.0, 1.0, size=(200, 2, DIM))
    print(f"Gaussian kernel, sigma = {SIGMA}, {len(pairs)} pairs in [0,1]^{DIM}")
    print(f"{'L':>7}  {'max |approx - exact|':>20}")
    for L in (10, 100, 1000, 10_000):
        fmap = rf.build_feature_map(seed=1, L=L, d=DIM, sigma=SIGMA)
        worst = max(
            abs(rf.approx_kernel(fmap, x, xp)
                - rf.exact_gaussian_kernel(x, xp, SIGMA))
            for x, xp in pairs
        )
        print(f"{L:>7}  {worst:>20.5f}")


if __name__ == "__main__":
    main()
