"""Experiment harness: metrics, configuration, traces, and result emission.

Config files are flat ``key = value`` text with dotted section prefixes
(``#`` comments allowed); the full key list is documented in the README.
Each run emits one trace CSV per mode with the fixed column order

    iter,mse_train,mse_test,consensus_residual,optimality_residual,cum_transmissions

(floats printed with repr-faithful precision, so reruns diff byte-exactly)
plus a ``summary.json`` whose final-row values are copied, not recomputed.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import data as data_mod
from . import graph as graph_mod
from . import model, oracle, rf, solver

FORMAT_VERSION = 1

TRACE_COLUMNS = (
    "iter", "mse_train", "mse_test", "consensus_residual",
    "optimality_residual", "cum_transmissions",
)


def compute_mse(states, agents, which="train"):
    """Pooled mean squared error, each agent predicting on its own shard.

    MSE = (1/T) sum_i ||y_i - design_i^T theta_i||^2 over the chosen split.
    """
    total_sq = 0.0
    total_n = 0
    for st, a in zip(states, agents):
        if which == "train":
            design, y = a.rf_design, a.labels
        elif which == "test":
            design, y = a.rf_design_test, a.test_labels
        else:
            raise ValueError(f"unknown split {which!r}")
        resid = y - design.T @ st.theta
        total_sq += float(resid @ resid)
        total_n += y.shape[0]
    if total_n == 0:
        raise ValueError(f"empty {which} split")
    return total_sq / total_n


def consensus_residual(states):
    """Maximum pairwise distance between agents' parameter vectors."""
    if not states:
        raise ValueError("no agent states")
    worst = 0.0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            worst = max(worst, float(
                np.linalg.norm(states[i].theta - states[j].theta)))
    return worst


@dataclass
class RunTrace:
    """Per-iteration metrics of one solver run."""

    mode: str
    iterations: list = field(default_factory=list)
    mse_train: list = field(default_factory=list)
    mse_test: list = field(default_factory=list)
    consensus_residual: list = field(default_factory=list)
    optimality_residual: list = field(default_factory=list)  # float or None
    cum_transmissions: list = field(default_factory=list)
    per_agent_transmissions: list = field(default_factory=list)
    status: str = "ok"
    final_states: list = field(default_factory=list)

    def append(self, iteration, mse_train, mse_test, consensus_residual,
               optimality_residual, cum_transmissions):
        if self.iterations and iteration != self.iterations[-1] + 1:
            raise ValueError("iterations must increase by one")
        if self.cum_transmissions and cum_transmissions < self.cum_transmissions[-1]:
            raise ValueError("cumulative transmissions must be non-decreasing")
        self.iterations.append(iteration)
        self.mse_train.append(mse_train)
        self.mse_test.append(mse_test)
        self.consensus_residual.append(consensus_residual)
        self.optimality_residual.append(optimality_residual)
        self.cum_transmissions.append(cum_transmissions)

    def write_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for row in zip(self.iterations, self.mse_train, self.mse_test,
                           self.consensus_residual, self.optimality_residual,
                           self.cum_transmissions):
                k, tr, te, cons, opt, tx = row
                opt_s = "NA" if opt is None else repr(float(opt))
                te_s = "NA" if te is None else repr(float(te))
                fh.write(
                    f"{k},{float(tr)!r},{te_s},{float(cons)!r},"
                    f"{opt_s},{tx}\n"
                )

    def final_row(self):
        return {
            "iter": self.iterations[-1],
            "mse_train": self.mse_train[-1],
            "mse_test": self.mse_test[-1],
            "consensus_residual": self.consensus_residual[-1],
            "optimality_residual": self.optimality_residual[-1],
            "cum_transmissions": self.cum_transmissions[-1],
        }


class ConfigError(ValueError):
    """Invalid or missing configuration."""


def parse_config_text(text, origin="<config>"):
    """Parse flat dotted ``key = value`` lines into a dict of strings."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters (see README for the key list)."""

    source: str                 # "synthetic" | "csv"
    n_agents: int
    synthetic: data_mod.SyntheticSpec | None
    csv_path: str | None
    csv_has_header: bool
    train_fraction: float
    split_seed: int
    partition_seed: int
    edge_list: str | None
    topology_p: float
    topology_seed: int
    rf_L: int
    rf_sigma: float
    rf_variant: str
    rf_seed: int
    lam: float
    rho: float
    eta: float
    censor_v: float
    censor_mu: float
    max_iterations: int
    modes: tuple
    consensus_tol: float | None
    optimality_tol: float | None
    eta1: float
    eta2: float
    eta3: float
    nu: float
    oracle_eps: float
    oracle_delta: float


def _get(raw, key, cast, default=None, required=False):
    if key not in raw:
        if required:
            raise ConfigError(f"missing required config key {key!r}")
        return default
    try:
        value = raw[key]
        if cast is bool:
            if value.lower() not in ("true", "false"):
                raise ValueError
            return value.lower() == "true"
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {raw[key]!r}") from None


def load_config(path):
    """Read and validate a config file into an :class:`ExperimentConfig`."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        return load_config_text(fh.read(), origin=path)


def load_config_text(text, origin="<config>"):
    """Validate config text (``key = value`` lines) into an :class:`ExperimentConfig`."""
    raw = parse_config_text(text, origin=origin)

    source = _get(raw, "data.source", str, required=True)
    if source not in ("synthetic", "csv"):
        raise ConfigError(f"data.source must be synthetic or csv, got {source!r}")
    n_agents = _get(raw, "network.n_agents", int, required=True)

    synthetic = None
    csv_path = None
    if source == "synthetic":
        try:
            synthetic = data_mod.SyntheticSpec(
                n_centers=_get(raw, "data.n_centers", int, 50),
                input_dim=_get(raw, "data.input_dim", int, 5),
                gen_bandwidth=_get(raw, "data.gen_bandwidth", float, 5.0),
                noise_std=_get(raw, "data.noise_std", float, math.sqrt(0.1)),
                per_agent_range=(
                    _get(raw, "data.t_min", int, 4000),
                    _get(raw, "data.t_max", int, 6000),
                ),
                seed=_get(raw, "data.seed", int, 0),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        csv_path = _get(raw, "data.csv_path", str, required=True)

    modes_raw = _get(raw, "run.modes", str, "dkla")
    modes = tuple(m.strip() for m in modes_raw.split(",") if m.strip())
    if modes == ("all",):
        modes = solver.MODES
    for m in modes:
        if m not in solver.MODES:
            raise ConfigError(f"unknown mode {m!r} in run.modes")

    variant = _get(raw, "rf.variant", str, rf.PAIRED_TRIG)
    if variant not in (rf.PAIRED_TRIG, rf.COSINE_PHASE):
        raise ConfigError(f"unknown rf.variant {variant!r}")

    cfg = ExperimentConfig(
        source=source,
        n_agents=n_agents,
        synthetic=synthetic,
        csv_path=csv_path,
        csv_has_header=_get(raw, "data.csv_has_header", bool, False),
        train_fraction=_get(raw, "data.train_fraction", float, 0.7),
        split_seed=_get(raw, "data.split_seed", int, 1),
        partition_seed=_get(raw, "data.partition_seed", int, 2),
        edge_list=_get(raw, "network.edge_list", str, None),
        topology_p=_get(raw, "network.p", float, 0.3),
        topology_seed=_get(raw, "network.seed", int, 3),
        rf_L=_get(raw, "rf.L", int, 100),
        rf_sigma=_get(raw, "rf.sigma", float, 1.0),
        rf_variant=variant,
        rf_seed=_get(raw, "rf.seed", int, 4),
        lam=_get(raw, "train.lambda", float, 1e-3),
        rho=_get(raw, "train.rho", float, 1e-2),
        eta=_get(raw, "train.eta", float, 0.99),
        censor_v=_get(raw, "train.censor_v", float, 1.0),
        censor_mu=_get(raw, "train.censor_mu", float, 0.95),
        max_iterations=_get(raw, "train.max_iterations", int, 1000),
        modes=modes,
        consensus_tol=_get(raw, "train.consensus_tol", float, None),
        optimality_tol=_get(raw, "train.optimality_tol", float, None),
        eta1=_get(raw, "rho_bound.eta1", float, 1.0),
        eta2=_get(raw, "rho_bound.eta2", float, 1.0),
        eta3=_get(raw, "rho_bound.eta3", float, 0.1),
        nu=_get(raw, "rho_bound.nu", float, 2.0),
        oracle_eps=_get(raw, "oracle.epsilon", float, 0.5),
        oracle_delta=_get(raw, "oracle.delta", float, 0.05),
    )
    if cfg.rf_L < 1 or cfg.rf_sigma <= 0:
        raise ConfigError("rf.L must be >= 1 and rf.sigma > 0")
    if cfg.lam <= 0 or cfg.rho <= 0:
        raise ConfigError("train.lambda and train.rho must be > 0")
    if not (0.0 < cfg.eta <= 1.0):
        raise ConfigError("train.eta must be in (0, 1]")
    if cfg.max_iterations < 0:
        raise ConfigError("train.max_iterations must be >= 0")
    return cfg


def build_problem(cfg):
    """Materialize (graph, agents, feature map, raw per-agent data) for a run."""
    if cfg.source == "synthetic":
        raw_agents = data_mod.generate_synthetic(cfg.synthetic, cfg.n_agents)
        normalized, _, _ = data_mod.minmax_normalize(
            [x for x, _ in raw_agents])
    else:
        features, labels = data_mod.load_csv(
            cfg.csv_path, has_header=cfg.csv_has_header)
        # normalize the pooled dataset before splitting it across agents
        (features,), _, _ = data_mod.minmax_normalize([features])
        plan = data_mod.PartitionPlan(
            n_agents=cfg.n_agents,
            sizes=data_mod.equal_partition_sizes(labels.shape[0], cfg.n_agents),
            train_fraction=cfg.train_fraction,
            seed=cfg.partition_seed,
        )
        raw_agents = data_mod.partition_to_agents(features, labels, plan)
        normalized = [x for x, _ in raw_agents]

    if cfg.edge_list:
        g = graph_mod.load_edge_list(cfg.edge_list, n_agents=cfg.n_agents)
    else:
        g = graph_mod.random_connected_graph(
            cfg.n_agents, cfg.topology_p, cfg.topology_seed)

    d = normalized[0].shape[1]
    fmap = rf.build_feature_map(
        cfg.rf_seed, cfg.rf_L, d, cfg.rf_sigma, variant=cfg.rf_variant)

    agents = []
    for i, ((_, y), x) in enumerate(zip(raw_agents, normalized)):
        tr_x, tr_y, te_x, te_y = data_mod.train_test_split(
            x, y, cfg.train_fraction, cfg.split_seed + i)
        agents.append(model.make_agent_dataset(fmap, tr_x, tr_y, te_x, te_y))
    return g, agents, fmap


def run_experiment(cfg, out_dir):
    """Run all configured modes, writing trace CSVs and a summary.

    Returns ``(summary_dict, traces)``.  The optimality-residual column is
    populated only when the centralized oracle is affordable (total training
    samples within the Gram guard).
    """
    os.makedirs(out_dir, exist_ok=True)
    g, agents, fmap = build_problem(cfg)

    total_train = sum(a.n_train for a in agents)
    theta_star = None
    if total_train <= oracle.MAX_GRAM_SIZE:
        theta_star = oracle.centralized_rf_solution(agents, cfg.lam)

    summary = {
        "format_version": FORMAT_VERSION,
        "n_agents": g.n_agents,
        "n_edges": g.n_edges,
        "feature_dim": agents[0].feature_dim,
        "total_train_samples": total_train,
        "modes": {},
    }
    traces = {}
    for mode in cfg.modes:
        trace = solver.run(
            g, agents, mode,
            lam=cfg.lam,
            rho=cfg.rho,
            eta=cfg.eta,
            schedule=solver.CensoringSchedule(cfg.censor_v, cfg.censor_mu),
            max_iterations=cfg.max_iterations,
            theta_star=theta_star,
            consensus_tol=cfg.consensus_tol,
            optimality_tol=cfg.optimality_tol,
        )
        trace_path = os.path.join(out_dir, f"trace_{mode}.csv")
        trace.write_csv(trace_path)
        final = trace.final_row()
        summary["modes"][mode] = {
            "status": trace.status,
            "final": final,
            "total_transmissions": final["cum_transmissions"],
            "per_agent_transmissions": trace.per_agent_transmissions,
            "trace_csv": os.path.basename(trace_path),
        }
        traces[mode] = trace

    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary, traces
