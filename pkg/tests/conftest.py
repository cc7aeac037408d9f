"""Shared fixtures: the small reference problem used across test modules.

The "desk instance" is a fixed 5-agent synthetic regression problem (100
samples per agent, 5 input dimensions, 50 paired-trig frequencies) with a
seeded connected topology.  Everything is deterministic, so tests can pin
numeric outcomes.
"""

import numpy as np
import pytest

from dkl import data, graph, model, oracle, rf

DESK = {
    "n_agents": 5,
    "t_per_agent": 100,
    "input_dim": 5,
    "rf_L": 50,
    "rf_sigma": 0.15,
    "rf_seed": 5,
    "lam": 1e-3,
    "rho": 1e-2,
    "topology_p": 0.5,
    "topology_seed": 4,
    "data_seed": 1,
    "split_seed": 3,
    "gen_bandwidth": 0.2,
    "noise_std": 1e-3,
    "train_fraction": 0.7,
}


def build_desk_instance():
    """Construct (graph, agents, fmap, theta_star) for the desk instance."""
    spec = data.SyntheticSpec(
        n_centers=50,
        input_dim=DESK["input_dim"],
        gen_bandwidth=DESK["gen_bandwidth"],
        noise_std=DESK["noise_std"],
        per_agent_range=(DESK["t_per_agent"], DESK["t_per_agent"]),
        seed=DESK["data_seed"],
    )
    raw = data.generate_synthetic(spec, DESK["n_agents"])
    normalized, _, _ = data.minmax_normalize([x for x, _ in raw])
    g = graph.random_connected_graph(
        DESK["n_agents"], DESK["topology_p"], DESK["topology_seed"])
    fmap = rf.build_feature_map(
        DESK["rf_seed"], DESK["rf_L"], DESK["input_dim"], DESK["rf_sigma"])
    agents = []
    for (_, y), x in zip(raw, normalized):
        tr_x, tr_y, te_x, te_y = data.train_test_split(
            x, y, DESK["train_fraction"], DESK["split_seed"])
        agents.append(model.make_agent_dataset(fmap, tr_x, tr_y, te_x, te_y))
    theta_star = oracle.centralized_rf_solution(agents, DESK["lam"])
    return g, agents, fmap, theta_star


@pytest.fixture(scope="session")
def desk():
    g, agents, fmap, theta_star = build_desk_instance()
    return {
        "graph": g,
        "agents": agents,
        "fmap": fmap,
        "theta_star": theta_star,
        **DESK,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(0)
