"""Random Fourier feature maps approximating a Gaussian kernel.

A feature map is a shared, seeded draw of frequencies (and phases for the
cosine-phase variant) that every agent in the network uses to embed its raw
inputs into a common finite-dimensional space.  Frequencies are drawn from
N(0, sigma^-2 I) so that the inner product of mapped points is an unbiased
Monte Carlo estimate of the Gaussian kernel exp(-||x - x'||^2 / (2 sigma^2)).
"""

from dataclasses import dataclass

import numpy as np

PAIRED_TRIG = "paired_trig"
COSINE_PHASE = "cosine_phase"

_VARIANTS = (PAIRED_TRIG, COSINE_PHASE)


def sample_frequencies(seed, L, d, sigma):
    """Draw L i.i.d. frequency rows from N(0, sigma^-2 I_d).

    Uses numpy's PCG64 generator (ziggurat normal transform), so output is
    bit-identical for identical arguments across platforms.

    Parameters
    ----------
    seed : int
        Generator seed shared by all agents.
    L : int
        Number of frequency rows, >= 1.
    d : int
        Input dimension, >= 1.
    sigma : float
        Kernel bandwidth, > 0.  Frequency standard deviation is 1/sigma.

    Returns
    -------
    ndarray of shape (L, d)
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((L, d)) / sigma


@dataclass(frozen=True)
class RandomFeatureMap:
    """Immutable shared feature map.

    Attributes
    ----------
    frequencies : ndarray of shape (L, d)
    phases : ndarray of shape (L,) or None
        Present iff ``variant == COSINE_PHASE``; entries in [0, 2*pi].
    variant : str
        One of ``PAIRED_TRIG`` (feature dimension 2L, unit norm) or
        ``COSINE_PHASE`` (feature dimension L, norm <= sqrt(2)).
    bandwidth : float
    seed : int
    """

    frequencies: np.ndarray
    phases: np.ndarray | None
    variant: str
    bandwidth: float
    seed: int

    @property
    def n_frequencies(self):
        return self.frequencies.shape[0]

    @property
    def input_dim(self):
        return self.frequencies.shape[1]

    @property
    def feature_dim(self):
        L = self.n_frequencies
        return 2 * L if self.variant == PAIRED_TRIG else L


def build_feature_map(seed, L, d, sigma, variant=PAIRED_TRIG):
    """Construct a :class:`RandomFeatureMap` from a shared seed.

    Frequencies are drawn first; for the cosine-phase variant the phases are
    drawn from the same stream immediately after, in index order, which fixes
    a reproducible layout.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    freqs = sample_frequencies(seed, L, d, sigma)
    phases = None
    if variant == COSINE_PHASE:
        rng = np.random.default_rng(seed)
        rng.standard_normal((L, d))  # advance past the frequency draw
        phases = rng.uniform(0.0, 2.0 * np.pi, size=L)
    return RandomFeatureMap(
        frequencies=freqs, phases=phases, variant=variant,
        bandwidth=float(sigma), seed=int(seed),
    )


def _check_dim(fmap, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != fmap.input_dim:
        raise ValueError(
            f"input dimension {x.shape[-1]} does not match map dimension "
            f"{fmap.input_dim}"
        )
    return x


def map_point(fmap, x):
    """Embed a single point into the feature space.

    Paired-trig: sqrt(1/L) * [cos(w_l.x), sin(w_l.x)] interleaved per
    frequency, giving exact unit Euclidean norm.  Cosine-phase:
    sqrt(2/L) * cos(w_l.x + b_l), with norm at most sqrt(2).
    """
    x = _check_dim(fmap, x)
    return map_points(fmap, x[None, :])[:, 0]


def map_points(fmap, X):
    """Embed rows of ``X`` (shape (T, d)); returns a (D, T) design matrix."""
    X = _check_dim(fmap, np.atleast_2d(X))
    proj = fmap.frequencies @ X.T  # (L, T)
    L = fmap.n_frequencies
    if fmap.variant == PAIRED_TRIG:
        out = np.empty((2 * L, X.shape[0]))
        out[0::2] = np.cos(proj)
        out[1::2] = np.sin(proj)
        return out / np.sqrt(L)
    return np.sqrt(2.0 / L) * np.cos(proj + fmap.phases[:, None])


def approx_kernel(fmap, x, xp):
    """Sample-average kernel estimate phi(x).phi(x'); symmetric in (x, x')."""
    return float(map_point(fmap, x) @ map_point(fmap, xp))


def exact_gaussian_kernel(x, xp, sigma):
    """Gaussian kernel exp(-||x - x'||^2 / (2 sigma^2)); value in (0, 1]."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != xp.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {xp.shape}")
    diff = x - xp
    return float(np.exp(-(diff @ diff) / (2.0 * sigma**2)))


def exact_gaussian_gram(X, Xp, sigma):
    """Gaussian Gram matrix between rows of ``X`` and rows of ``Xp``."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xp = np.atleast_2d(np.asarray(Xp, dtype=float))
    if X.shape[1] != Xp.shape[1]:
        raise ValueError("dimension mismatch between point sets")
    sq = (
        np.sum(X**2, axis=1)[:, None]
        + np.sum(Xp**2, axis=1)[None, :]
        - 2.0 * X @ Xp.T
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * sigma**2))
