"""Local ridge objective in feature space and its closed-form ADMM step.

Each agent i holds T_i samples whose feature embeddings form the columns of
a D x T_i design matrix Phi_i.  Its local cost is

    (1/T_i) ||y_i - Phi_i^T theta||^2 + (lambda/N) ||theta||^2,

whose Hessian (2/T_i) Phi_i Phi_i^T + (2 lambda / N) I is constant, so the
per-round ADMM subproblem is a linear solve against a matrix that never
changes across iterations.  That matrix is factorized once per agent.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import rf


@dataclass(frozen=True)
class AgentDataset:
    """One agent's normalized data and its precomputed feature designs.

    ``rf_design`` has shape (D, T_i) with column t equal to the feature
    embedding of training row t; ``rf_design_test`` likewise for the
    held-out split.
    """

    features: np.ndarray        # (T_i, d), entries in [0, 1]
    labels: np.ndarray          # (T_i,)
    rf_design: np.ndarray       # (D, T_i)
    test_features: np.ndarray   # (T_test, d)
    test_labels: np.ndarray     # (T_test,)
    rf_design_test: np.ndarray  # (D, T_test)

    @property
    def n_train(self):
        return self.labels.shape[0]

    @property
    def n_test(self):
        return self.test_labels.shape[0]

    @property
    def feature_dim(self):
        return self.rf_design.shape[0]


def make_agent_dataset(fmap, features, labels, test_features=None,
                       test_labels=None):
    """Build an :class:`AgentDataset`, embedding both splits with ``fmap``."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=float).ravel()
    if features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree on sample count")
    if labels.shape[0] < 1:
        raise ValueError("agent dataset needs at least one sample")
    if test_features is None:
        test_features = np.empty((0, features.shape[1]))
        test_labels = np.empty(0)
    test_features = np.atleast_2d(np.asarray(test_features, dtype=float))
    test_labels = np.asarray(test_labels, dtype=float).ravel()
    design = rf.map_points(fmap, features)
    design_test = (
        rf.map_points(fmap, test_features)
        if test_features.shape[0] > 0
        else np.empty((design.shape[0], 0))
    )
    return AgentDataset(
        features=features,
        labels=labels,
        rf_design=design,
        test_features=test_features,
        test_labels=test_labels,
        rf_design_test=design_test,
    )


def _check_theta(theta, a):
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape[0] != a.feature_dim:
        raise ValueError(
            f"theta has dimension {theta.shape[0]}, expected {a.feature_dim}"
        )
    return theta


def local_cost(theta, a, lam, N):
    """(1/T_i) ||y - Phi^T theta||^2 + (lambda/N) ||theta||^2."""
    theta = _check_theta(theta, a)
    resid = a.labels - a.rf_design.T @ theta
    return float(resid @ resid / a.n_train + (lam / N) * (theta @ theta))


def local_gradient(theta, a, lam, N):
    """Gradient (2/T_i) Phi (Phi^T theta - y) + (2 lambda / N) theta."""
    theta = _check_theta(theta, a)
    return (2.0 / a.n_train) * (a.rf_design @ (a.rf_design.T @ theta - a.labels)) \
        + (2.0 * lam / N) * theta


def hessian(a, lam, N):
    """Exact constant Hessian of :func:`local_cost`."""
    D = a.feature_dim
    return (2.0 / a.n_train) * (a.rf_design @ a.rf_design.T) \
        + (2.0 * lam / N) * np.eye(D)


def convexity_constants(agents, lam, N):
    """(m, M): min/max Hessian eigenvalues over all agents' local costs.

    These are the strong-convexity and gradient-Lipschitz constants of the
    implemented quadratic costs; m >= 2 lambda / N > 0.
    """
    if not agents:
        raise ValueError("empty agent list")
    m = np.inf
    M = -np.inf
    for a in agents:
        eigs = np.linalg.eigvalsh(hessian(a, lam, N))
        m = min(m, eigs[0])
        M = max(M, eigs[-1])
    return float(m), float(M)


@dataclass(frozen=True)
class LocalSolveContext:
    """Cached SPD factorization of one agent's per-round system matrix.

    system_matrix = (2/T_i) Phi Phi^T + (2 lambda/N + 2 rho |N_i|) I,
    rhs_base = (2/T_i) Phi y.  Both are iteration-independent.
    """

    system_matrix: np.ndarray
    factorization: tuple
    rhs_base: np.ndarray


def build_solve_context(a, lam, N, rho, degree):
    """Assemble and factorize an agent's ADMM subproblem matrix once."""
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if rho == 0 and lam <= 0:
        raise ValueError("need rho > 0 or lambda > 0 for a definite system")
    system = hessian(a, lam, N) + 2.0 * rho * degree * np.eye(a.feature_dim)
    factorization = cho_factor(system)
    rhs_base = (2.0 / a.n_train) * (a.rf_design @ a.labels)
    return LocalSolveContext(system_matrix=system, factorization=factorization,
                             rhs_base=rhs_base)


def local_solve(ctx, gamma, aggregate):
    """Unique minimizer of the local ADMM subproblem.

    Solves system_matrix @ theta = rhs_base - gamma + aggregate, where the
    caller supplies aggregate = rho * sum_n (theta_hat_i + theta_hat_n).
    """
    gamma = np.asarray(gamma, dtype=float).ravel()
    aggregate = np.asarray(aggregate, dtype=float).ravel()
    D = ctx.rhs_base.shape[0]
    if gamma.shape[0] != D or aggregate.shape[0] != D:
        raise ValueError("gamma/aggregate dimension mismatch with context")
    return cho_solve(ctx.factorization, ctx.rhs_base - gamma + aggregate)
