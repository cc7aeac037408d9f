"""Synchronous round engine: consensus ADMM, censored ADMM, and diffusion.

Three update modes over a fixed graph, all with exact transmission
accounting (one transmission = one agent broadcasting its parameter vector
to all neighbors in one round):

* ``dkla``: every agent solves its local quadratic subproblem, broadcasts,
  then takes a dual ascent step.  N transmissions per round.
* ``coke``: same primal/dual updates against *cached* neighbor broadcasts;
  an agent transmits only when its parameter moved at least h(k) = v mu^k
  since its last broadcast.  Between 0 and N transmissions per round.
* ``cta``: combine-then-adapt diffusion; each agent averages neighbor
  parameters with Metropolis weights and takes one gradient step.  N
  transmissions per round, no dual variables.

Rounds are synchronous: all primal solves use the previous round's
broadcasts, then broadcasts happen, then dual updates use the new values.
Neighbor sums accumulate in ascending agent-id order so traces are
bit-reproducible.
"""

from dataclasses import dataclass, field

import numpy as np

from . import model

DKLA = "dkla"
COKE = "coke"
CTA = "cta"

MODES = (DKLA, COKE, CTA)


@dataclass
class AgentState:
    """One agent's mutable per-round variables (all start at zero)."""

    theta: np.ndarray
    dual: np.ndarray
    last_broadcast: np.ndarray
    neighbor_cache: dict  # neighbor id -> last received parameter vector
    transmissions: int = 0


def init_states(graph, D):
    """Zero-initialized states with caches keyed by each agent's neighbors."""
    return [
        AgentState(
            theta=np.zeros(D),
            dual=np.zeros(D),
            last_broadcast=np.zeros(D),
            neighbor_cache={n: np.zeros(D) for n in graph.neighbor_lists[i]},
        )
        for i in range(graph.n_agents)
    ]


@dataclass(frozen=True)
class CensoringSchedule:
    """Decaying broadcast threshold h(k) = v * mu**k."""

    v: float
    mu: float

    def __post_init__(self):
        if self.v < 0:
            raise ValueError(f"v must be >= 0, got {self.v}")
        if not (0.0 < self.mu < 1.0):
            raise ValueError(f"mu must be in (0, 1), got {self.mu}")

    def threshold(self, k):
        return self.v * self.mu**k


def _neighbor_aggregate(state, neighbors, rho, own):
    # fixed ascending-id accumulation order for cross-run determinism
    agg = np.zeros_like(own)
    for n in neighbors:
        agg += own + state.neighbor_cache[n]
    return rho * agg


def dkla_round(states, graph, contexts, rho, k):
    """One synchronous ADMM round; every agent broadcasts.

    Returns the number of transmissions this round (always N).
    """
    new_thetas = []
    for i, st in enumerate(states):
        agg = _neighbor_aggregate(st, graph.neighbor_lists[i], rho, st.theta)
        new_thetas.append(model.local_solve(contexts[i], st.dual, agg))
    # broadcast barrier: everyone transmits the round-k value
    for i, st in enumerate(states):
        st.theta = new_thetas[i]
        st.last_broadcast = new_thetas[i]
        st.transmissions += 1
    for i, st in enumerate(states):
        for n in graph.neighbor_lists[i]:
            st.neighbor_cache[n] = states[n].theta
    # dual ascent with round-k values
    for i, st in enumerate(states):
        diff = np.zeros_like(st.theta)
        for n in graph.neighbor_lists[i]:
            diff += st.theta - st.neighbor_cache[n]
        st.dual = st.dual + rho * diff
    return len(states)


def coke_round(states, graph, contexts, rho, schedule, k):
    """One synchronous censored-ADMM round.

    The primal solve uses cached broadcasts from round k-1; each agent then
    transmits only if its parameter moved at least ``schedule.threshold(k)``
    since its last broadcast.  Returns the number of transmissions.
    """
    h_k = schedule.threshold(k)
    new_thetas = []
    for i, st in enumerate(states):
        agg = _neighbor_aggregate(
            st, graph.neighbor_lists[i], rho, st.last_broadcast)
        new_thetas.append(model.local_solve(contexts[i], st.dual, agg))
    sent = []
    for i, st in enumerate(states):
        st.theta = new_thetas[i]
        xi = st.last_broadcast - st.theta
        if np.linalg.norm(xi) - h_k >= 0.0:
            st.last_broadcast = st.theta
            st.transmissions += 1
            sent.append(i)
    sent_set = set(sent)
    for i, st in enumerate(states):
        for n in graph.neighbor_lists[i]:
            if n in sent_set:
                st.neighbor_cache[n] = states[n].theta
    for i, st in enumerate(states):
        diff = np.zeros_like(st.theta)
        for n in graph.neighbor_lists[i]:
            diff += st.last_broadcast - st.neighbor_cache[n]
        st.dual = st.dual + rho * diff
    return len(sent)


def metropolis_weights(graph):
    """Symmetric doubly-stochastic combination weights.

    w_in = 1 / (1 + max(deg_i, deg_n)) for neighbors, self-weight makes
    each row sum to one.
    """
    N = graph.n_agents
    W = np.zeros((N, N))
    for i in range(N):
        for n in graph.neighbor_lists[i]:
            W[i, n] = 1.0 / (1.0 + max(graph.degree(i), graph.degree(n)))
        W[i, i] = 1.0 - W[i].sum()
    return W


def cta_round(states, graph, weights, agents, lam, eta, k):
    """One combine-then-adapt diffusion round; every agent broadcasts.

    psi_i = sum_n w_in theta_n (over neighbors and self, previous round),
    then theta_i = psi_i - eta * grad(local cost at psi_i).  Returns N.
    """
    if not np.allclose(weights.sum(axis=1), 1.0, atol=1e-12):
        raise ValueError("combination weight rows must sum to 1")
    N = graph.n_agents
    new_thetas = []
    for i, st in enumerate(states):
        psi = weights[i, i] * st.theta
        for n in graph.neighbor_lists[i]:
            psi += weights[i, n] * st.neighbor_cache[n]
        grad = model.local_gradient(psi, agents[i], lam, N)
        new_thetas.append(psi - eta * grad)
    for i, st in enumerate(states):
        st.theta = new_thetas[i]
        st.last_broadcast = new_thetas[i]
        st.transmissions += 1
    for i, st in enumerate(states):
        for n in graph.neighbor_lists[i]:
            st.neighbor_cache[n] = states[n].theta
    return N


def run(graph, agents, mode, *, lam, rho=None, eta=None, schedule=None,
        max_iterations=1000, theta_star=None, consensus_tol=None,
        optimality_tol=None, divergence_factor=1e6):
    """Execute synchronous rounds and record a per-iteration trace.

    Parameters
    ----------
    graph : Graph
    agents : list of AgentDataset
        All built with the same shared feature map.
    mode : str
        One of ``dkla``, ``coke``, ``cta``.
    lam : float
        Global regularization weight (each agent uses lambda / N).
    rho : float
        ADMM penalty, required for dkla/coke.
    eta : float
        Diffusion step size in (0, 1], required for cta.
    schedule : CensoringSchedule
        Required for coke.
    theta_star : ndarray, optional
        Centralized optimum; enables the optimality-residual column.
    consensus_tol, optimality_tol : float, optional
        Early-stop tolerances; both must be satisfied (when given) to stop
        before ``max_iterations``.  Off by default.
    divergence_factor : float
        Abort with status ``diverged`` if train MSE exceeds this multiple of
        its initial value.

    Returns
    -------
    RunTrace
    """
    from .experiment import RunTrace, compute_mse, consensus_residual

    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode in (DKLA, COKE) and (rho is None or rho <= 0):
        raise ValueError(f"{mode} requires rho > 0")
    if mode == COKE and schedule is None:
        raise ValueError("coke requires a censoring schedule")
    if mode == CTA:
        if eta is None or not (0.0 < eta <= 1.0):
            raise ValueError("cta requires eta in (0, 1]")
    if max_iterations < 0:
        raise ValueError("max_iterations must be >= 0")

    N = graph.n_agents
    D = agents[0].feature_dim
    states = init_states(graph, D)
    contexts = None
    weights = None
    if mode in (DKLA, COKE):
        contexts = [
            model.build_solve_context(agents[i], lam, N, rho, graph.degree(i))
            for i in range(N)
        ]
    else:
        weights = metropolis_weights(graph)

    trace = RunTrace(mode=mode)
    has_test = any(a.n_test > 0 for a in agents)

    def record(k, cum_tx):
        opt = None
        if theta_star is not None:
            opt = max(
                float(np.linalg.norm(st.theta - theta_star)) for st in states)
        trace.append(
            iteration=k,
            mse_train=compute_mse(states, agents, "train"),
            mse_test=compute_mse(states, agents, "test") if has_test else None,
            consensus_residual=consensus_residual(states),
            optimality_residual=opt,
            cum_transmissions=cum_tx,
        )

    cum_tx = 0
    record(0, cum_tx)
    initial_mse = trace.mse_train[0]
    for k in range(1, max_iterations + 1):
        if mode == DKLA:
            cum_tx += dkla_round(states, graph, contexts, rho, k)
        elif mode == COKE:
            cum_tx += coke_round(states, graph, contexts, rho, schedule, k)
        else:
            cum_tx += cta_round(states, graph, weights, agents, lam, eta, k)
        record(k, cum_tx)
        if initial_mse > 0 and trace.mse_train[-1] > divergence_factor * initial_mse:
            trace.status = "diverged"
            break
        if consensus_tol is not None or optimality_tol is not None:
            ok = True
            if consensus_tol is not None:
                ok = ok and trace.consensus_residual[-1] <= consensus_tol
            if optimality_tol is not None:
                ok = ok and (
                    trace.optimality_residual[-1] is not None
                    and trace.optimality_residual[-1] <= optimality_tol
                )
            if ok:
                break
    trace.per_agent_transmissions = [st.transmissions for st in states]
    trace.final_states = states
    return trace
