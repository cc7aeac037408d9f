"""Network topologies, incidence matrices, and the ADMM penalty bound.

Graphs are undirected, simple, and connected.  The signed and unsigned
edge-node incidence matrices follow the standard decentralized-ADMM
convention: for edge e = (i, n) with i < n, the signed matrix has +1 at
(e, i) and -1 at (e, n); the unsigned matrix has +1 at both.  Their spectra
(largest singular value of the unsigned matrix, smallest non-zero singular
value of the signed matrix) enter the admissible range for the consensus
penalty parameter rho.
"""

from dataclasses import dataclass

import numpy as np

MAX_CONNECTIVITY_ATTEMPTS = 10_000


@dataclass(frozen=True)
class Graph:
    """Undirected simple connected graph over agents 0..n_agents-1."""

    n_agents: int
    edges: tuple  # sorted tuple of (i, n) pairs with i < n
    adjacency: np.ndarray
    neighbor_lists: tuple  # per-agent sorted tuple of neighbor ids

    @property
    def n_edges(self):
        return len(self.edges)

    def degree(self, i):
        return len(self.neighbor_lists[i])


def _is_connected(n, neighbor_lists):
    if n == 1:
        return True
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in neighbor_lists[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n


def make_graph(n_agents, edges):
    """Build and validate a :class:`Graph` from an iterable of pairs."""
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1, got {n_agents}")
    canon = set()
    for i, n in edges:
        i, n = int(i), int(n)
        if i == n:
            raise ValueError(f"self-loop at agent {i}")
        if not (0 <= i < n_agents and 0 <= n < n_agents):
            raise ValueError(f"edge ({i}, {n}) out of range for N={n_agents}")
        canon.add((min(i, n), max(i, n)))
    edges = tuple(sorted(canon))
    adjacency = np.zeros((n_agents, n_agents))
    for i, n in edges:
        adjacency[i, n] = adjacency[n, i] = 1.0
    neighbor_lists = tuple(
        tuple(int(v) for v in np.flatnonzero(adjacency[i]))
        for i in range(n_agents)
    )
    if not _is_connected(n_agents, neighbor_lists):
        raise ValueError("graph is not connected")
    return Graph(n_agents=int(n_agents), edges=edges, adjacency=adjacency,
                 neighbor_lists=neighbor_lists)


def random_connected_graph(n, p, seed):
    """Sample an Erdos-Renyi graph, resampling until connected.

    Each unordered pair is included independently with probability ``p``.
    Disconnected samples are redrawn with a sub-seed (seed, attempt) so the
    result is deterministic in (n, p, seed); gives up after
    ``MAX_CONNECTIVITY_ATTEMPTS`` resamples.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must be in (0, 1], got {p}")
    if n == 1:
        return make_graph(1, [])
    for attempt in range(MAX_CONNECTIVITY_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        edges = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < p
        ]
        try:
            return make_graph(n, edges)
        except ValueError:
            continue
    raise ValueError(
        f"no connected graph found in {MAX_CONNECTIVITY_ATTEMPTS} attempts "
        f"(n={n}, p={p}, seed={seed})"
    )


def load_edge_list(path, n_agents=None):
    """Load a graph from a text file of whitespace-separated 0-based pairs.

    ``n_agents`` defaults to one plus the largest agent id seen.
    """
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i n', got {line!r}")
            try:
                i, n = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer agent id") from None
            edges.append((i, n))
    if n_agents is None:
        if not edges:
            raise ValueError(f"{path}: empty edge list")
        n_agents = max(max(e) for e in edges) + 1
    return make_graph(n_agents, edges)


def incidence_matrices(g):
    """Signed/unsigned edge-node incidence matrices, rows in sorted edge order.

    Returns ``(S_plus, S_minus)``, each of shape (E, N).  The lower-index
    endpoint carries +1 in the signed matrix; singular values do not depend
    on this orientation choice.
    """
    if g.n_edges == 0:
        raise ValueError("graph has no edges")
    E, N = g.n_edges, g.n_agents
    s_plus = np.zeros((E, N))
    s_minus = np.zeros((E, N))
    for e, (i, n) in enumerate(g.edges):
        s_plus[e, i] = s_plus[e, n] = 1.0
        s_minus[e, i] = 1.0
        s_minus[e, n] = -1.0
    return s_plus, s_minus


@dataclass(frozen=True)
class SpectralConstants:
    """Incidence-matrix spectra used in the penalty feasibility bound."""

    sigma_max_unsigned: float
    sigma_min_signed_nonzero: float


def spectral_constants(g, rank_rtol=1e-10):
    """Largest unsigned and smallest non-zero signed singular values."""
    s_plus, s_minus = incidence_matrices(g)
    sv_plus = np.linalg.svd(s_plus, compute_uv=False)
    sv_minus = np.linalg.svd(s_minus, compute_uv=False)
    nonzero = sv_minus[sv_minus > rank_rtol * sv_minus[0]]
    return SpectralConstants(
        sigma_max_unsigned=float(sv_plus[0]),
        sigma_min_signed_nonzero=float(nonzero[-1]),
    )


def rho_upper_bound(m, M, spec, eta1=1.0, eta2=1.0, eta3=0.1, nu=2.0):
    """Upper limit on the consensus penalty rho certifying linear convergence.

    Returns the minimum of the three closed-form bracket terms, or ``None``
    when the third factor ``m - eta3 * nu * M**2 / sigma_min**2`` is
    non-positive (no positive rho is certified for this constant choice).

    Parameters
    ----------
    m, M : float
        Minimum strong-convexity and maximum gradient-Lipschitz constants of
        the local costs, 0 < m <= M.
    spec : SpectralConstants
    eta1, eta2, eta3 : float
        Free positive constants.
    nu : float
        Free constant, > 1.
    """
    if nu <= 1:
        raise ValueError(f"nu must be > 1, got {nu}")
    if min(m, M, eta1, eta2, eta3) <= 0:
        raise ValueError("m, M, eta1, eta2, eta3 must all be positive")
    if m > M:
        raise ValueError(f"m={m} exceeds M={M}")
    smax2 = spec.sigma_max_unsigned**2
    smin2 = spec.sigma_min_signed_nonzero**2
    third_factor = m - eta3 * nu * M**2 / smin2
    if third_factor <= 0:
        return None
    terms = (
        4.0 * m / eta1,
        (nu - 1.0) * smin2 / (nu * eta3 * smax2),
        third_factor / (eta1 / 4.0 + eta2 * smax2 / 8.0),
    )
    return float(min(terms))
