"""Centralized closed-form solutions and generalization diagnostics.

These are desk-scale ground-truth references: the exact feature-space ridge
optimum that the decentralized iterations should approach, the full-Gram
kernel ridge solution, and the effective-degrees-of-freedom machinery that
sizes the random-feature budget.  Gram-matrix routines refuse inputs beyond
``MAX_GRAM_SIZE`` samples; they are oracles, not production solvers.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import rf

MAX_GRAM_SIZE = 5000


def stacked_design(agents):
    """Row-stacked scaled design Phi_tilde (T x D) and labels y_tilde (T,).

    Agent i's block is its design transposed and scaled by 1/sqrt(T_i), so
    the normal equations of ||y_tilde - Phi_tilde theta||^2 + lambda
    ||theta||^2 reproduce the sum of local costs.
    """
    blocks = []
    ys = []
    for a in agents:
        s = 1.0 / math.sqrt(a.n_train)
        blocks.append(s * a.rf_design.T)
        ys.append(s * a.labels)
    return np.vstack(blocks), np.concatenate(ys)


def centralized_rf_solution(agents, lam):
    """Exact minimizer of the summed local costs in feature space.

    Solves (Phi_tilde^T Phi_tilde + lambda I) theta = Phi_tilde^T y_tilde.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not agents:
        raise ValueError("empty agent list")
    phi, y = stacked_design(agents)
    D = phi.shape[1]
    system = phi.T @ phi + lam * np.eye(D)
    return scipy.linalg.solve(system, phi.T @ y, assume_a="pos")


@dataclass(frozen=True)
class CentralizedSolution:
    """Feature-space optimum plus the regularization that produced it."""

    theta_star: np.ndarray
    lam: float
    residual: float  # relative normal-equation residual

    @classmethod
    def from_agents(cls, agents, lam):
        theta = centralized_rf_solution(agents, lam)
        phi, y = stacked_design(agents)
        lhs = phi.T @ (phi @ theta) + lam * theta
        rhs = phi.T @ y
        denom = max(1.0, float(np.linalg.norm(rhs)))
        return cls(theta_star=theta, lam=float(lam),
                   residual=float(np.linalg.norm(lhs - rhs)) / denom)


@dataclass(frozen=True)
class KrrSolution:
    """Full-Gram kernel ridge coefficients.

    ``pseudo_inverse`` flags that the direct solve reported near-singularity
    and a jittered least-squares fallback was used.
    """

    alpha: np.ndarray
    lam: float
    bandwidth: float
    train_features: np.ndarray
    pseudo_inverse: bool

    def predict(self, X):
        return rf.exact_gaussian_gram(
            np.atleast_2d(X), self.train_features, self.bandwidth) @ self.alpha


def centralized_krr_solution(features, labels, lam, sigma, agent_sizes):
    """Kernel ridge regression over the pooled dataset.

    Minimizes sum_i (1/T_i) ||y_i - K_i^T alpha||^2 + lambda alpha^T K alpha
    where K_i holds the kernel similarities between all T samples and agent
    i's block.  With K_tilde the row-block scaling of K by 1/sqrt(T_i), the
    normal equations are (K_tilde^T K_tilde + lambda K) alpha = K_tilde^T
    y_tilde.  Near-singular systems fall back to a jittered least-squares
    solve, flagged on the result.

    Parameters
    ----------
    features : ndarray (T, d)
        Pooled samples, agent blocks contiguous.
    labels : ndarray (T,)
    lam : float
        Sum of the per-agent regularization weights.
    sigma : float
        Gaussian kernel bandwidth.
    agent_sizes : sequence of int
        Block sizes T_i; must sum to T.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=float).ravel()
    T = features.shape[0]
    if T > MAX_GRAM_SIZE:
        raise ValueError(
            f"T={T} exceeds the Gram oracle limit of {MAX_GRAM_SIZE}")
    if sum(agent_sizes) != T:
        raise ValueError("agent sizes must sum to the total sample count")
    K = rf.exact_gaussian_gram(features, features, sigma)
    scale = np.concatenate(
        [np.full(t, 1.0 / math.sqrt(t)) for t in agent_sizes])
    k_tilde = scale[:, None] * K  # row-block scaling
    y_tilde = scale * labels
    system = k_tilde.T @ k_tilde + lam * K
    rhs = k_tilde.T @ y_tilde
    pseudo = False
    try:
        alpha = scipy.linalg.solve(system, rhs, assume_a="sym")
        if not np.all(np.isfinite(alpha)):
            raise np.linalg.LinAlgError
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        jitter = 1e-12 * np.trace(K) / T
        alpha, *_ = np.linalg.lstsq(
            system + jitter * np.eye(T), rhs, rcond=None)
        pseudo = True
    return KrrSolution(alpha=alpha, lam=float(lam), bandwidth=float(sigma),
                       train_features=features, pseudo_inverse=pseudo)


def effective_dof(K, lam):
    """Tr(K (K + lambda T I)^-1), the effective degrees of freedom.

    ``K`` must be symmetric PSD; the value lies in [0, T).
    """
    K = np.asarray(K, dtype=float)
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("K must be square")
    if not np.allclose(K, K.T, atol=1e-10):
        raise ValueError("K must be symmetric")
    T = K.shape[0]
    eigs = np.linalg.eigvalsh(K)
    eigs = np.clip(eigs, 0.0, None)
    return float(np.sum(eigs / (eigs + lam * T)))


def required_feature_count(d_eff, lam, eps, delta_p):
    """Feature budget ceil((1/lambda)(1/eps^2 + 2/(3 eps)) log(16 d / delta)).

    Monotone increasing in ``d_eff`` and decreasing in ``lam``, ``eps``,
    ``delta_p``; floored at zero when the log term is non-positive.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not (0.0 < delta_p < 1.0):
        raise ValueError(f"delta_p must be in (0, 1), got {delta_p}")
    if d_eff <= 0:
        raise ValueError(f"d_eff must be > 0, got {d_eff}")
    value = (1.0 / lam) * (1.0 / eps**2 + 2.0 / (3.0 * eps)) \
        * math.log(16.0 * d_eff / delta_p)
    return max(0, math.ceil(value))
