"""Incidence spectra and the ADMM penalty upper bound on small graphs.

For a few hand-sized topologies, prints the largest singular value of the
unsigned incidence matrix, the smallest nonzero singular value of the
signed one, and the resulting upper bound on the penalty rho for a
problem with given strong-convexity and smoothness constants.
"""

from dkl import graph

GRAPHS = {
    "single edge": (2, [(0, 1)]),
    "path-3": (3, [(0, 1), (1, 2)]),
    "triangle": (3, [(0, 1), (1, 2), (0, 2)]),
    "star-5": (5, [(0, i) for i in range(1, 5)]),
}

# modest curvature: strongly convex with m = 0.1, smooth with M = 1.0
M_LOWER, M_UPPER = 0.1, 1.0


def main():
    print(f"{'graph':<12} {'sigma_max(S+)':>14} {'sigma_min(S-)':>14} "
          f"{'rho bound':>12}")
    for name, (n, edges) in GRAPHS.items():
        g = graph.make_graph(n, edges)
        spec = graph.spectral_constants(g)
        bound = graph.rho_upper_bound(M_LOWER, M_UPPER, spec,
                                      eta1=0.1, eta2=0.01, eta3=1e-3, nu=2.0)
        bound_s = "infeasible" if bound is None else f"{bound:.6f}"
        print(f"{name:<12} {spec.sigma_max_unsigned:>14.6f} "
              f"{spec.sigma_min_signed_nonzero:>14.6f} {bound_s:>12}")


if __name__ == "__main__":
    main()
