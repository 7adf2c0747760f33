"""Command-line entry point: ``noisyop <subcommand> [options]``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from . import experiments as ex
from .dynamics import run, run_ensemble
from .graph import (
    generate,
    graph_from_edge_rows,
    read_edge_list,
    read_trust_csv,
    trust_matrix,
    features,
    write_edge_list,
    write_trust_csv,
)
from .influence import GrangerConfig, build_influence_network
from .spectral import (
    diversity_degroot,
    diversity_directed_bound,
    diversity_fj,
    marginal_contributions,
    spectrum,
)

logger = logging.getLogger("noisyop")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

# defaults for the single-graph subcommands
_SINGLE = {
    "schema_version": ex.SCHEMA_VERSION,
    "seed": 0,
    "jobs": 1,
    "graph": {"generator": "er", "n": 100, "p": 0.5, "eta": 0.01, "graphs": 1, "connected": True},
    "model": {"dynamics": "degroot", "noise": "iid", "sigma2": 1.0},
    "simulation": {"steps": 500, "burn_in": 100, "replicas": 100},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", type=Path, help="YAML file merged over the defaults")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--scale", choices=("desk", "paper"), default="desk", help="preset size (default: desk)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisyop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="draw random graphs; write edge lists and trust matrices")
    _common(p)

    for name, text in (("simulate", "run an ensemble of noisy opinion trajectories"),
                       ("diversity", "spectrum and closed-form diversity of one trust matrix")):
        p = sub.add_parser(name, help=text)
        _common(p)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--edges", type=Path, help="undirected edge list CSV (src,dst,weight)")
        src.add_argument("--trust", type=Path, help="dense trust matrix CSV")

    p = sub.add_parser("validate-spectral", help="KS validation of the spectral prediction")
    _common(p)

    p = sub.add_parser("sweep", help="parameter sweep with predicted and realized diversity")
    _common(p)
    p.add_argument("--kind", choices=ex.SWEEP_KINDS, help="sweep preset (or sweep.kind in the config)")

    for name, text in (("granger", "build Granger influence networks from opinion panels"),
                       ("regress", "influence networks plus regressions M1-M3")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--panels", type=Path, nargs="+", help="panel CSV files or directories")
        p.add_argument("--format", choices=("long", "wide"), default="long")
        if name == "regress":
            p.add_argument("--synthetic", action="store_true", help="use simulated panels on known graphs")
    return parser


def load_config(args, base: dict) -> dict:
    cfg = base
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ex.ConfigError("config file must contain a mapping")
        cfg = ex.merge(cfg, user)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ex.ConfigError("seed must be an unsigned 64-bit integer")
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    return cfg


def _finish(args, cfg, paths):
    paths = list(paths)
    paths.append(ex.write_manifest(args.out, cfg, paths, args.scale))
    for path in paths:
        print(path)


# -- subcommands --------------------------------------------------------------


def cmd_generate(args):
    cfg = load_config(args, ex.merge(_SINGLE, {"experiment": "generate"}))
    gcfg = cfg["graph"]
    gen = ex.generator_config(gcfg)
    eta = float(gcfg.get("eta", 0.01))
    args.out.mkdir(parents=True, exist_ok=True)
    rows, paths = [], []
    for gi in range(int(gcfg.get("graphs", 1))):
        seed = ex.graph_seed(cfg["seed"], 0, gi)
        g = generate(gen, seed, connected=bool(gcfg.get("connected", True)))
        f = features(g)
        edges, trust = args.out / f"graph_{gi:03d}_edges.csv", args.out / f"graph_{gi:03d}_trust.csv"
        write_edge_list(edges, g)
        write_trust_csv(trust, trust_matrix(g, eta))
        paths += [edges, trust]
        rows.append({"graph": gi, "seed": seed, "n": g.n, "edges": g.num_edges,
                     "avg_shortest_path": f.avg_shortest_path, "avg_clustering": f.avg_clustering,
                     "density": f.density, "avg_degree": f.avg_degree, "connected": f.connected})
    table = ex.Table(("graph", "seed", "n", "edges", "avg_shortest_path", "avg_clustering",
                      "density", "avg_degree", "connected"), rows)
    ex.write_table(args.out / "graphs.csv", table)
    _finish(args, cfg, paths + [args.out / "graphs.csv"])


def _trust_from_args(args, cfg):
    eta = float(cfg["graph"].get("eta", 0.01))
    if args.trust is not None:
        return read_trust_csv(args.trust, eta, directed=True)
    if args.edges is not None:
        return trust_matrix(graph_from_edge_rows(read_edge_list(args.edges)), eta)
    g = generate(ex.generator_config(cfg["graph"]), ex.graph_seed(cfg["seed"], 0, 0),
                 connected=bool(cfg["graph"].get("connected", True)))
    return trust_matrix(g, eta)


def cmd_simulate(args):
    cfg = load_config(args, ex.merge(_SINGLE, {"experiment": "simulate"}))
    a = _trust_from_args(args, cfg)
    model = ex.model_spec(cfg["model"])
    sim = ex.simulation_config(cfg["simulation"], ex.ensemble_seed(cfg["seed"], 0))
    args.out.mkdir(parents=True, exist_ok=True)
    ens = run_ensemble(model, a, sim)
    paths = [args.out / "ensemble.csv"]
    ens.to_csv(paths[0])
    if sim.record == "full-trajectory":
        traj = run(model, a, sim, seed=int(ens.seeds[0]))
        paths.append(args.out / "trajectory.csv")
        traj.to_csv(paths[-1])
    _finish(args, cfg, paths)


def cmd_diversity(args):
    cfg = load_config(args, ex.merge(_SINGLE, {"experiment": "diversity"}))
    a = _trust_from_args(args, cfg)
    spec = spectrum(a)
    args.out.mkdir(parents=True, exist_ok=True)
    model = cfg["model"]
    sigma2 = float(model.get("sigma2", 1.0))
    contrib = marginal_contributions(spec)
    spec_rows = [{"eigenvalue": float(v), "contribution": float(c)} for v, c in zip(spec.eigenvalues, contrib)]
    ex.write_table(args.out / "spectrum.csv", ex.Table(("eigenvalue", "contribution"), spec_rows))
    rows = []
    if spec.is_real:
        rows.append({"kind": "degroot", "sigma2": sigma2, "s": None, "xi2": None,
                     "d": diversity_degroot(spec, sigma2).d})
        if model.get("dynamics") == "fj":
            s, xi2 = float(model.get("s", 1.0)), float(model.get("xi2", 0.0))
            rows.append({"kind": "fj", "sigma2": sigma2, "s": s, "xi2": xi2,
                         "d": diversity_fj(spec, sigma2, xi2, s).d})
    else:
        logger.warning("complex spectrum (max |Im| = %.3g); only the directed bound is reported", spec.max_imag)
    rows.append({"kind": "directed-bound", "sigma2": sigma2, "s": None, "xi2": None,
                 "d": diversity_directed_bound(spec, sigma2).d})
    ex.write_table(args.out / "diversity.csv", ex.Table(("kind", "sigma2", "s", "xi2", "d"), rows))
    _finish(args, cfg, [args.out / "spectrum.csv", args.out / "diversity.csv"])


def _experiment(args, base):
    cfg = load_config(args, base)
    report = ex.run_experiment(cfg)
    return cfg, report


def cmd_validate_spectral(args):
    cfg, report = _experiment(args, ex.preset("validate-spectral", args.scale))
    _finish(args, cfg, report.write(args.out))


def cmd_sweep(args):
    kind = args.kind
    if kind is None and args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            kind = ((yaml.safe_load(fh) or {}).get("sweep") or {}).get("kind")
    if kind is None:
        raise ex.ConfigError("sweep needs --kind or sweep.kind in the config")
    if kind not in ex.SWEEP_KINDS:
        raise ex.ConfigError(f"sweep kind must be one of {ex.SWEEP_KINDS}")
    cfg, report = _experiment(args, ex.preset(kind, args.scale))
    _finish(args, cfg, report.write(args.out))


def _panel_spec(args) -> dict:
    files, dirs = [], []
    for p in args.panels or []:
        (dirs if p.is_dir() else files).append(str(p))
    if len(dirs) > 1:
        raise ex.ConfigError("give at most one panel directory")
    spec = {"format": args.format, "paths": files}
    if dirs:
        spec["directory"] = dirs[0]
    return spec


def cmd_granger(args):
    base = ex.preset("empirical", args.scale)
    base.pop("panels")
    cfg = load_config(args, base)
    cfg["experiment"] = "granger"
    if args.panels:
        cfg["panels"] = _panel_spec(args)
    panels = ex.load_panels(cfg.get("panels", {}))
    gcfg = GrangerConfig(**cfg.get("granger", {}))
    gcfg.validate()
    args.out.mkdir(parents=True, exist_ok=True)
    paths, rows = [], []
    for panel in panels:
        if panel.n_sources < 2:
            logger.warning("topic %s: %d source(s), skipped", panel.topic, panel.n_sources)
            continue
        net = build_influence_network(panel, gcfg)
        path = args.out / f"influence_{panel.topic}.csv"
        net.to_csv(path)
        paths.append(path)
        rows.append({"topic": panel.topic, "n_sources": panel.n_sources, "n_times": panel.n_times,
                     "n_edges": net.n_edges})
    if not rows:
        raise ex.NoInputError("no topic has at least two sources")
    ex.write_table(args.out / "granger_summary.csv", ex.Table(("topic", "n_sources", "n_times", "n_edges"), rows))
    _finish(args, cfg, paths + [args.out / "granger_summary.csv"])


def cmd_regress(args):
    base = ex.preset("empirical", args.scale)
    cfg = load_config(args, base)
    if args.panels:
        cfg["panels"] = _panel_spec(args)
    elif not args.synthetic and args.config is None:
        raise ex.ConfigError("regress needs --panels, --synthetic, or panels in the config")
    report = ex.run_experiment(cfg)
    _finish(args, cfg, report.write(args.out))


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "diversity": cmd_diversity,
    "validate-spectral": cmd_validate_spectral,
    "sweep": cmd_sweep,
    "granger": cmd_granger,
    "regress": cmd_regress,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"noisyop: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, yaml.YAMLError, KeyError, TypeError) as exc:
        print(f"noisyop: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"noisyop: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
