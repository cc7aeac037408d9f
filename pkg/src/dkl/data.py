"""Synthetic data generation, CSV ingestion, normalization, and partitioning.

The synthetic model draws shared centers c_m ~ N(0, I_d) and weights
b_m ~ U[0, 1] once, then labels each agent's inputs x ~ N(0, I_d) with
y = sum_m b_m exp(-||c_m - x||^2 / (2 sigma_gen^2)) + e, e ~ N(0, noise^2).
Feature normalization is min-max over the *pooled* dataset (across agents),
computed before any splitting; the stored column ranges apply the same
affine map to held-out data.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import rf


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic regression model."""

    n_centers: int = 50
    input_dim: int = 5
    gen_bandwidth: float = 5.0
    noise_std: float = math.sqrt(0.1)
    per_agent_range: tuple = (4000, 6000)  # inclusive sample-count bounds
    seed: int = 0

    def __post_init__(self):
        if self.n_centers < 1 or self.input_dim < 1:
            raise ValueError("n_centers and input_dim must be >= 1")
        if self.gen_bandwidth <= 0:
            raise ValueError("gen_bandwidth must be > 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        lo, hi = self.per_agent_range
        if lo < 1 or lo > hi:
            raise ValueError("per_agent_range must satisfy 1 <= min <= max")


def generate_synthetic(spec, n_agents):
    """Generate one dataset per agent from a single shared center draw.

    Returns a list of ``(features, labels)`` pairs, raw (un-normalized).
    Deterministic for a fixed ``spec.seed``.
    """
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1, got {n_agents}")
    rng = np.random.default_rng(spec.seed)
    weights = rng.uniform(0.0, 1.0, size=spec.n_centers)
    centers = rng.standard_normal((spec.n_centers, spec.input_dim))
    lo, hi = spec.per_agent_range
    out = []
    for _ in range(n_agents):
        t_i = int(rng.integers(lo, hi + 1))
        x = rng.standard_normal((t_i, spec.input_dim))
        gram = rf.exact_gaussian_gram(x, centers, spec.gen_bandwidth)
        y = gram @ weights
        if spec.noise_std > 0:
            y = y + spec.noise_std * rng.standard_normal(t_i)
        out.append((x, y))
    return out


def minmax_normalize(feature_arrays):
    """Min-max normalize feature columns jointly across all agents.

    Parameters
    ----------
    feature_arrays : list of ndarray (T_i, d)

    Returns
    -------
    (normalized, mins, maxs)
        ``normalized`` mirrors the input list with every column affinely
        mapped to [0, 1] using the pooled column ranges; constant columns
        map to zero.  ``mins``/``maxs`` are retained for held-out data.
    """
    if not feature_arrays or sum(a.shape[0] for a in feature_arrays) == 0:
        raise ValueError("no samples to normalize")
    pooled = np.vstack([np.atleast_2d(a) for a in feature_arrays])
    mins = pooled.min(axis=0)
    maxs = pooled.max(axis=0)
    return (
        [apply_minmax(a, mins, maxs) for a in feature_arrays],
        mins,
        maxs,
    )


def apply_minmax(features, mins, maxs):
    """Apply stored column ranges; constant columns map to zero."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    span = maxs - mins
    safe = np.where(span > 0, span, 1.0)
    out = (features - mins) / safe
    out[:, span == 0] = 0.0
    return out


def train_test_split(features, labels, fraction, seed):
    """Seeded shuffle then split at floor(fraction * T).

    Returns ``(train_x, train_y, test_x, test_y)``; the index sets are
    disjoint and exhaustive.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=float).ravel()
    t = labels.shape[0]
    if t < 2:
        raise ValueError("need at least 2 samples to split")
    perm = np.random.default_rng(seed).permutation(t)
    cut = int(fraction * t)
    tr, te = perm[:cut], perm[cut:]
    return features[tr], labels[tr], features[te], labels[te]


def load_csv(path, has_header=False):
    """Load a numeric CSV; last column is the label.

    Raises ValueError naming the offending line on ragged rows, non-numeric
    cells, or empty files.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1 and has_header:
                continue
            if not row:
                continue
            if rows and len(row) != len(rows[0]):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(rows[0])} columns, "
                    f"got {len(row)}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-numeric cell in {row!r}"
                ) from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if len(rows[0]) < 2:
        raise ValueError(f"{path}: rows need at least one feature and a label")
    data = np.asarray(rows, dtype=float)
    return data[:, :-1], data[:, -1]


@dataclass(frozen=True)
class PartitionPlan:
    """Assignment of pooled samples to agents as contiguous shuffled blocks.

    Sizes must be balanced: (max - min) / min < 10.
    """

    n_agents: int
    sizes: tuple
    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1 or len(self.sizes) != self.n_agents:
            raise ValueError("sizes must list one entry per agent")
        if min(self.sizes) < 1:
            raise ValueError("every agent needs at least one sample")
        lo, hi = min(self.sizes), max(self.sizes)
        if (hi - lo) / lo >= 10:
            raise ValueError(
                f"unbalanced partition: (max-min)/min = {(hi - lo) / lo:.2f} >= 10"
            )
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")


def equal_partition_sizes(total, n_agents):
    """Largest equal block sizes; the remainder is dropped downstream."""
    if total < n_agents:
        raise ValueError(f"cannot split {total} samples over {n_agents} agents")
    return tuple([total // n_agents] * n_agents)


def partition_to_agents(features, labels, plan):
    """Seeded shuffle, then contiguous blocks of the planned sizes.

    Leftover samples beyond ``sum(plan.sizes)`` are dropped.  Returns a list
    of ``(features, labels)`` pairs.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=float).ravel()
    total = labels.shape[0]
    if sum(plan.sizes) > total:
        raise ValueError(
            f"partition sizes sum to {sum(plan.sizes)} but only {total} "
            f"samples are available"
        )
    perm = np.random.default_rng(plan.seed).permutation(total)
    out = []
    start = 0
    for size in plan.sizes:
        idx = perm[start:start + size]
        out.append((features[idx], labels[idx]))
        start += size
    return out
