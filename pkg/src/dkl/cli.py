"""Command-line interface.

Subcommands:

* ``run --config <path> [--mode dkla|coke|cta|all] [--out <dir>]``
* ``oracle --config <path>``: centralized optimum residual, effective
  degrees of freedom, and the feature budget for the configured (eps, delta).
* ``spectra --config <path>``: incidence spectra, curvature constants, and
  the penalty upper bound for the configured free constants.
* ``gen-data --config <path> --out <csv>``: materialize synthetic data.

Exit codes: 0 success, 1 config error, 2 runtime error, 3 divergence.
"""

import argparse
import sys

import numpy as np

from . import data as data_mod
from . import experiment, graph as graph_mod, model, oracle, rf, solver

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_DIVERGED = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="dkl",
        description="Decentralized kernel ridge regression experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute configured solver modes")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--mode", choices=[*solver.MODES, "all"], default=None)
    p_run.add_argument("--out", default="out")

    p_oracle = sub.add_parser("oracle", help="centralized diagnostics")
    p_oracle.add_argument("--config", required=True)

    p_spec = sub.add_parser("spectra", help="graph spectra and rho bound")
    p_spec.add_argument("--config", required=True)

    p_gen = sub.add_parser("gen-data", help="materialize synthetic data")
    p_gen.add_argument("--config", required=True)
    p_gen.add_argument("--out", required=True)
    return parser


def _cmd_run(args):
    cfg = experiment.load_config(args.config)
    if args.mode is not None:
        modes = solver.MODES if args.mode == "all" else (args.mode,)
        cfg = experiment.ExperimentConfig(
            **{**cfg.__dict__, "modes": tuple(modes)})
    summary, _ = experiment.run_experiment(cfg, args.out)
    diverged = False
    for mode, info in summary["modes"].items():
        final = info["final"]
        print(
            f"{mode}: iters={final['iter']} mse_train={final['mse_train']:.6g} "
            f"mse_test={final['mse_test']:.6g} "
            f"transmissions={final['cum_transmissions']} status={info['status']}"
        )
        diverged = diverged or info["status"] == "diverged"
    print(f"traces written to {args.out}")
    return EXIT_DIVERGED if diverged else EXIT_OK


def _cmd_oracle(args):
    cfg = experiment.load_config(args.config)
    g, agents, fmap = experiment.build_problem(cfg)
    sol = oracle.CentralizedSolution.from_agents(agents, cfg.lam)
    print(f"theta_star dimension: {sol.theta_star.shape[0]}")
    print(f"normal-equation relative residual: {sol.residual:.3e}")

    total = sum(a.n_train for a in agents)
    if total <= oracle.MAX_GRAM_SIZE:
        pooled = np.vstack([a.features for a in agents])
        K = rf.exact_gaussian_gram(pooled, pooled, cfg.rf_sigma)
        d_eff = oracle.effective_dof(K, cfg.lam)
        L_req = oracle.required_feature_count(
            d_eff, cfg.lam, cfg.oracle_eps, cfg.oracle_delta)
        print(f"effective degrees of freedom: {d_eff:.6g}")
        print(
            f"required features (eps={cfg.oracle_eps}, "
            f"delta={cfg.oracle_delta}): {L_req}"
        )
    else:
        print(f"effective degrees of freedom: skipped (T={total} exceeds "
              f"Gram limit {oracle.MAX_GRAM_SIZE})")
    return EXIT_OK


def _cmd_spectra(args):
    cfg = experiment.load_config(args.config)
    g, agents, fmap = experiment.build_problem(cfg)
    spec = graph_mod.spectral_constants(g)
    m, M = model.convexity_constants(agents, cfg.lam, g.n_agents)
    bound = graph_mod.rho_upper_bound(
        m, M, spec, eta1=cfg.eta1, eta2=cfg.eta2, eta3=cfg.eta3, nu=cfg.nu)
    print(f"sigma_max(S+): {spec.sigma_max_unsigned:.12g}")
    print(f"sigma_min_nonzero(S-): {spec.sigma_min_signed_nonzero:.12g}")
    print(f"m (min strong convexity): {m:.12g}")
    print(f"M (max gradient Lipschitz): {M:.12g}")
    if bound is None:
        print(
            f"rho bound: infeasible for (eta1={cfg.eta1}, eta2={cfg.eta2}, "
            f"eta3={cfg.eta3}, nu={cfg.nu})"
        )
    else:
        print(
            f"rho bound (eta1={cfg.eta1}, eta2={cfg.eta2}, eta3={cfg.eta3}, "
            f"nu={cfg.nu}): {bound:.12g}"
        )
    return EXIT_OK


def _cmd_gen_data(args):
    cfg = experiment.load_config(args.config)
    if cfg.source != "synthetic":
        raise experiment.ConfigError(
            "gen-data requires data.source = synthetic")
    raw_agents = data_mod.generate_synthetic(cfg.synthetic, cfg.n_agents)
    with open(args.out, "w", newline="\n") as fh:
        for x, y in raw_agents:
            for row, label in zip(x, y):
                cells = [repr(float(v)) for v in row] + [repr(float(label))]
                fh.write(",".join(cells) + "\n")
    total = sum(y.shape[0] for _, y in raw_agents)
    print(f"wrote {total} samples to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "oracle": _cmd_oracle,
    "spectra": _cmd_spectra,
    "gen-data": _cmd_gen_data,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except experiment.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
