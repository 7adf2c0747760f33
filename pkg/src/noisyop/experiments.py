"""Experiment drivers: spectral validation, parameter sweeps and the
empirical influence-network pipeline.

Configs are nested dicts (usually loaded from YAML).  Every stochastic
object is seeded from the master seed through ``numpy.random.SeedSequence``
spawn keys:

* graph seeds depend on the graph-side sweep coordinates and the graph index;
* replica seeds depend only on the graph index and replica index,

so the same noise realisations are reused across every swept parameter
(common random numbers) and each report row can be replayed in isolation.
"""
from __future__ import annotations

import copy
import hashlib
import itertools
import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dynamics import (
    DeGroot,
    FriedkinJohnsen,
    GlobalUniqueness,
    IIDNoise,
    LocalUniqueness,
    ModelSpec,
    NoNoise,
    SimulationConfig,
    run_ensemble,
)
from .graph import (
    ErdosRenyi,
    StochasticBlock,
    WattsStrogatz,
    features,
    generate,
    trust_matrix,
)
from .influence import (
    GrangerConfig,
    OpinionPanel,
    build_influence_network,
    empirical_diversity,
    read_long_panels,
    read_wide_panel,
    run_regressions,
)
from .spectral import diversity_degroot, diversity_directed_bound, diversity_fj, spectrum
from .stats import bh_correct, ks_test

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SWEEP_KINDS = ("susceptibility", "connectivity", "clustering", "communities", "uniqueness")
GRAPH_AXES = ("n", "p", "k", "q", "intra")
MODEL_AXES = ("s", "xi2", "sigma2", "beta", "noise")


class ConfigError(ValueError):
    pass


class NoInputError(ValueError):
    pass


# -- presets ------------------------------------------------------------------

_P_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

_DESK = {
    "validate-spectral": {
        "graph": {"generator": "er", "n": 100, "eta": 0.01, "graphs": 10, "connected": True},
        "model": {"dynamics": "degroot", "noise": "iid", "sigma2": 1.0},
        "simulation": {"steps": 500, "burn_in": 100, "replicas": 20},
        "sweep": {"axes": {"p": _P_GRID}},
        "ks": {"alpha": 0.05},
    },
    "susceptibility": {
        "graph": {"generator": "er", "n": 100, "p": 0.5, "eta": 0.01, "graphs": 10, "connected": True},
        "model": {"dynamics": "fj", "noise": "iid", "sigma2": 0.5, "xi2": 0.5},
        "simulation": {"steps": 2000, "burn_in": 200, "replicas": 100},
        "sweep": {"axes": {"s": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]}},
    },
    "connectivity": {
        "graph": {"generator": "er", "n": 100, "eta": 0.01, "graphs": 10, "connected": True},
        "model": {"dynamics": "degroot", "noise": "iid", "sigma2": 1.0},
        "simulation": {"steps": 2000, "burn_in": 200, "replicas": 50},
        "sweep": {"axes": {"p": _P_GRID}},
    },
    "clustering": {
        "graph": {"generator": "ws", "n": 100, "k": 10, "eta": 0.01, "graphs": 20, "connected": True},
        "model": {"dynamics": "degroot", "noise": "iid", "sigma2": 1.0},
        "simulation": {"steps": 1000, "burn_in": 200, "replicas": 20},
        "sweep": {"axes": {"q": [0.0, 0.25, 0.5, 1.0]}},
    },
    "communities": {
        "graph": {"generator": "sbm", "n": 100, "k": 50, "eta": 0.01, "graphs": 10, "connected": False},
        "model": {"dynamics": "degroot", "noise": "iid", "sigma2": 1.0},
        "simulation": {"steps": 1000, "burn_in": 200, "replicas": 20},
        "sweep": {"axes": {"intra": [round(0.1 * i, 1) for i in range(11)]}},
    },
    "uniqueness": {
        "graph": {"generator": "er", "n": 100, "eta": 0.01, "graphs": 5, "connected": True},
        "model": {"dynamics": "degroot", "sigma2": 1.0},
        "simulation": {"steps": 500, "burn_in": 100, "replicas": 20},
        "sweep": {"axes": {"p": [0.1, 0.5, 0.9], "beta": [0.0, 10.0, 100.0], "noise": ["gu", "lu"]}},
    },
    "empirical": {
        "granger": {"max_lag": 5, "alpha": 0.05},
        # trust built from detected networks uses the generator's eta
        "graph": {"eta": 0.5},
        "panels": {
            # eta=0.5 keeps the consensus mode short-lived; with eta near 0 it
            # dominates every series and all pairs test as Granger-causal
            "synthetic": {
                "graphs": 30, "n_min": 10, "n_max": 30, "p_min": 0.1, "p_max": 0.5,
                "steps": 2000, "burn_in": 200, "sigma2": 1.0, "eta": 0.5,
            }
        },
    },
}

# paper-scale protocol; long-running
_PAPER = copy.deepcopy(_DESK)
_PAPER["validate-spectral"]["graph"]["graphs"] = 100
_PAPER["validate-spectral"]["simulation"]["replicas"] = 100
_PAPER["susceptibility"]["graph"]["graphs"] = 20
_PAPER["susceptibility"]["simulation"].update(steps=500, burn_in=100, replicas=20)
_PAPER["connectivity"]["graph"]["graphs"] = 100
_PAPER["connectivity"]["simulation"].update(steps=500, burn_in=100, replicas=100)
_PAPER["clustering"]["graph"]["graphs"] = 100
_PAPER["clustering"]["simulation"].update(steps=500, burn_in=100, replicas=100)
_PAPER["clustering"]["sweep"]["axes"] = {"k": [10, 30, 50, 70, 90], "q": [0.0, 0.25, 0.5, 0.75, 1.0]}
_PAPER["communities"]["graph"]["graphs"] = 100
_PAPER["communities"]["simulation"].update(steps=500, burn_in=100, replicas=100)
_PAPER["uniqueness"]["graph"]["graphs"] = 100
_PAPER["uniqueness"]["simulation"]["replicas"] = 100
_PAPER["uniqueness"]["sweep"]["axes"] = {"p": _P_GRID, "beta": [0.0, 1.0, 10.0, 100.0], "noise": ["gu", "lu"]}

PRESETS = {"desk": _DESK, "paper": _PAPER}


def preset(kind: str, scale: str = "desk") -> dict:
    """Default config for ``kind`` (an experiment or sweep kind)."""
    if scale not in PRESETS:
        raise ConfigError(f"unknown scale {scale!r}")
    if kind not in PRESETS[scale]:
        raise ConfigError(f"no preset for {kind!r}")
    cfg = copy.deepcopy(PRESETS[scale][kind])
    cfg.setdefault("schema_version", SCHEMA_VERSION)
    cfg.setdefault("seed", 20160501)
    cfg.setdefault("jobs", 1)
    if kind in SWEEP_KINDS:
        cfg["experiment"] = "sweep"
        cfg["sweep"]["kind"] = kind
    else:
        cfg["experiment"] = kind
    return cfg


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; ``override`` wins, lists are replaced whole."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _hashable(cfg: dict) -> dict:
    # worker count does not change results, so it is not part of the identity
    return {k: v for k, v in cfg.items() if k != "jobs"}


def config_hash(cfg: dict) -> str:
    blob = json.dumps(_hashable(cfg), sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- config -> objects --------------------------------------------------------


def generator_config(graph: dict):
    kind = graph.get("generator", "er")
    n = int(graph.get("n", 100))
    if kind == "er":
        return ErdosRenyi(n, float(graph["p"]))
    if kind == "ws":
        return WattsStrogatz(n, int(graph["k"]), float(graph["q"]))
    if kind == "sbm":
        if "probs" in graph:
            return StochasticBlock(graph["sizes"], graph["probs"])
        return StochasticBlock.two_groups(n, float(graph["k"]), float(graph["intra"]))
    raise ConfigError(f"unknown generator {kind!r}")


def model_spec(model: dict) -> ModelSpec:
    sigma2 = float(model.get("sigma2", 1.0))
    beta = float(model.get("beta", 0.0))
    noise = {
        "none": lambda: NoNoise(),
        "iid": lambda: IIDNoise(sigma2),
        "gu": lambda: GlobalUniqueness(sigma2, beta),
        "lu": lambda: LocalUniqueness(sigma2, beta),
    }.get(model.get("noise", "iid"))
    if noise is None:
        raise ConfigError(f"unknown noise {model.get('noise')!r}")
    dyn = model.get("dynamics", "degroot")
    if dyn == "degroot":
        dynamics = DeGroot()
    elif dyn == "fj":
        prej = model.get("prejudices")
        dynamics = FriedkinJohnsen(
            float(model.get("s", 1.0)),
            tuple(prej) if prej is not None else None,
            float(model.get("xi2", 0.0)),
        )
    else:
        raise ConfigError(f"unknown dynamics {dyn!r}")
    spec = ModelSpec(dynamics, noise())
    spec.validate()
    return spec


def simulation_config(sim: dict, seed: int = 0) -> SimulationConfig:
    cfg = SimulationConfig(
        steps=int(sim.get("steps", 500)),
        burn_in=int(sim.get("burn_in", 100)),
        replicas=int(sim.get("replicas", 1)),
        seed=int(seed),
        record=sim.get("record", "windowed-diversity"),
        initial_variance=sim.get("initial_variance"),
    )
    cfg.validate()
    return cfg


def validate_config(cfg: dict) -> dict:
    if cfg.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.get('schema_version')}")
    if not isinstance(cfg.get("seed", 0), int) or cfg.get("seed", 0) < 0:
        raise ConfigError("seed must be a non-negative integer")
    if int(cfg.get("jobs", 1)) < 1:
        raise ConfigError("jobs must be >= 1")
    exp = cfg.get("experiment")
    if exp in ("validate-spectral", "sweep"):
        axes = cfg.get("sweep", {}).get("axes", {})
        if not axes:
            raise ConfigError("sweep.axes must name at least one axis")
        for name, values in axes.items():
            if name not in GRAPH_AXES + MODEL_AXES:
                raise ConfigError(f"unknown sweep axis {name!r}")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"sweep axis {name!r} needs a non-empty list")
        for point in _points(cfg, GRAPH_AXES):
            generator_config({**cfg["graph"], **point}).validate()
        for point in _points(cfg, MODEL_AXES):
            model_spec({**cfg["model"], **point})
        simulation_config(cfg.get("simulation", {}))
        if float(cfg["graph"].get("eta", 0.01)) <= 0:
            raise ConfigError("eta must be positive")
    if exp == "validate-spectral":
        if cfg["model"].get("noise", "iid") != "iid" or cfg["model"].get("dynamics", "degroot") != "degroot":
            raise ConfigError("validate-spectral needs DeGroot dynamics with i.i.d. noise")
        if not float(cfg["model"].get("sigma2", 1.0)) > 0:
            raise ConfigError("validate-spectral needs sigma2 > 0 (degenerate reference distribution)")
    if exp == "sweep" and cfg["sweep"].get("kind") not in SWEEP_KINDS:
        raise ConfigError(f"sweep.kind must be one of {SWEEP_KINDS}")
    return cfg


def _points(cfg: dict, names) -> list[dict]:
    axes = cfg.get("sweep", {}).get("axes", {})
    keys = [k for k in axes if k in names]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


# -- seeding ------------------------------------------------------------------


def derived_seed(master: int, *key: int) -> int:
    """64-bit seed for the object addressed by ``key`` under ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def graph_seed(master: int, point_index: int, graph_index: int) -> int:
    return derived_seed(master, 1, point_index, graph_index)


def ensemble_seed(master: int, graph_index: int) -> int:
    """Master seed of the replicas run on graph ``graph_index`` (shared across sweep points)."""
    return derived_seed(master, 2, graph_index)


# -- reports ------------------------------------------------------------------


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name):
        return [r[name] for r in self.rows]


@dataclass
class ExperimentReport:
    name: str
    tables: dict  # table name -> Table
    config: dict

    def __getitem__(self, table):
        return self.tables[table]

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for tname, table in self.tables.items():
            path = out / f"{self.name}_{tname}.csv"
            write_table(path, table)
            paths.append(path)
        return paths


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_table(path, table: Table) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            missing = set(table.columns) - set(row)
            if missing:
                raise ConfigError(f"row missing columns {sorted(missing)}")
            fh.write(",".join(_fmt(row[c]) for c in table.columns) + "\n")


def write_manifest(out_dir, cfg: dict, outputs, scale: str | None = None) -> Path:
    manifest = {
        "config_sha256": config_hash(cfg),
        "config": _hashable(cfg),
        "experiment": cfg.get("experiment"),
        "outputs": sorted(Path(p).name for p in outputs),
        "scale": scale,
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.get("seed"),
        "versions": {
            "noisyop": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def _pool_map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=1))


# -- graph work units ---------------------------------------------------------


def build_graph(cfg: dict, gpoint: dict, point_index: int, graph_index: int):
    """Regenerate the graph behind a report row; returns (graph, seed)."""
    gcfg = {**cfg["graph"], **gpoint}
    seed = graph_seed(cfg["seed"], point_index, graph_index)
    g = generate(generator_config(gcfg), seed, connected=bool(gcfg.get("connected", True)))
    return g, seed


def _graph_unit(args):
    cfg, point_index, gpoint, graph_index, model_points = args
    g, gseed = build_graph(cfg, gpoint, point_index, graph_index)
    a = trust_matrix(g, float(cfg["graph"].get("eta", 0.01)))
    spec = spectrum(a)
    feats = features(g)
    eseed = ensemble_seed(cfg["seed"], graph_index)
    out = []
    for mpoint in model_points:
        model = model_spec({**cfg["model"], **mpoint})
        sim = simulation_config(cfg["simulation"], eseed)
        ens = run_ensemble(model, a, sim, predicted=False)
        pred = _prediction(model, spec)
        out.append(dict(mpoint=mpoint, ens=ens, predicted=pred))
    return dict(gpoint=gpoint, point_index=point_index, graph_index=graph_index, graph_seed=gseed,
                ensemble_seed=eseed, spectrum=spec, features=feats, results=out)


def _prediction(model: ModelSpec, spec) -> float | None:
    if not isinstance(model.noise, IIDNoise):
        return None
    dyn = model.dynamics
    if isinstance(dyn, FriedkinJohnsen):
        if dyn.prejudices is not None:
            return None
        return diversity_fj(spec, model.sigma2, dyn.prejudice_variance, dyn.susceptibility).d
    return diversity_degroot(spec, model.sigma2).d


def _graph_units(cfg: dict):
    model_points = _points(cfg, MODEL_AXES)
    n_graphs = int(cfg["graph"].get("graphs", 1))
    for pi, gpoint in enumerate(_points(cfg, GRAPH_AXES)):
        for gi in range(n_graphs):
            yield (cfg, pi, gpoint, gi, model_points)


# -- validate-spectral --------------------------------------------------------

VALIDATE_COLUMNS = (
    "p", "graph", "graph_seed", "ensemble_seed", "replicas", "predicted_d", "realized_d",
    "ks_sigma2_stat", "ks_sigma2_pvalue", "ks_d_stat", "ks_d_pvalue", "reject_sigma2", "reject_d",
)
VALIDATE_SUMMARY_COLUMNS = ("p", "graphs", "reject_sigma2_pct", "reject_d_pct", "mean_predicted_d", "mean_realized_d")


def validate_spectral(cfg: dict) -> ExperimentReport:
    """KS goodness of fit of pooled terminal opinions against N(0, sigma2)
    and N(0, d), BH-corrected over every test in the run, tabulated by p."""
    cfg = validate_config(cfg)
    if set(cfg["sweep"]["axes"]) != {"p"}:
        raise ConfigError("validate-spectral sweeps exactly one axis: p")
    sigma2 = float(cfg["model"].get("sigma2", 1.0))
    units = _pool_map(_graph_unit, _graph_units(cfg), int(cfg.get("jobs", 1)))
    rows = []
    for u in units:
        r = u["results"][0]
        pooled = r["ens"].pooled_terminal()
        ks0 = ks_test(pooled, 0.0, sigma2)
        ksd = ks_test(pooled, 0.0, r["predicted"])
        rows.append({
            "p": u["gpoint"]["p"], "graph": u["graph_index"], "graph_seed": u["graph_seed"],
            "ensemble_seed": u["ensemble_seed"], "replicas": r["ens"].replicas,
            "predicted_d": r["predicted"], "realized_d": r["ens"].mean_realized_d,
            "ks_sigma2_stat": ks0.d_stat, "ks_sigma2_pvalue": ks0.p_value,
            "ks_d_stat": ksd.d_stat, "ks_d_pvalue": ksd.p_value,
        })
    alpha = float(cfg.get("ks", {}).get("alpha", 0.05))
    bh = bh_correct([r["ks_sigma2_pvalue"] for r in rows] + [r["ks_d_pvalue"] for r in rows], alpha)
    m = len(rows)
    for i, r in enumerate(rows):
        r["reject_sigma2"] = bool(bh.rejected[i])
        r["reject_d"] = bool(bh.rejected[m + i])
    summary = []
    for p in cfg["sweep"]["axes"]["p"]:
        grp = [r for r in rows if r["p"] == p]
        summary.append(_validate_summary(p, grp))
    summary.append(_validate_summary("total", rows))
    return ExperimentReport("validate_spectral", {
        "graphs": Table(VALIDATE_COLUMNS, rows),
        "summary": Table(VALIDATE_SUMMARY_COLUMNS, summary),
    }, cfg)


def _validate_summary(label, grp):
    return {
        "p": label, "graphs": len(grp),
        "reject_sigma2_pct": 100.0 * float(np.mean([r["reject_sigma2"] for r in grp])),
        "reject_d_pct": 100.0 * float(np.mean([r["reject_d"] for r in grp])),
        "mean_predicted_d": float(np.mean([r["predicted_d"] for r in grp])),
        "mean_realized_d": float(np.mean([r["realized_d"] for r in grp])),
    }


# -- sweeps -------------------------------------------------------------------

SWEEP_TAIL = (
    "graph", "graph_seed", "replica", "seed", "avg_clustering", "avg_shortest_path",
    "predicted_d", "realized_d", "centered_d", "mad",
)
SUMMARY_TAIL = ("graphs", "mean_predicted_d", "mean_realized_d", "sd_realized_d", "mean_centered_d", "mean_mad")


def sweep(cfg: dict) -> ExperimentReport:
    """Grid over the configured axes; one row per graph x parameter x replica
    plus per-parameter group means."""
    cfg = validate_config(cfg)
    kind = cfg["sweep"]["kind"]
    axes = list(cfg["sweep"]["axes"])
    units = _pool_map(_graph_unit, _graph_units(cfg), int(cfg.get("jobs", 1)))
    rows, per_graph = [], []
    for u in units:
        f = u["features"]
        for r in u["results"]:
            point = {**u["gpoint"], **r["mpoint"]}
            ens = r["ens"]
            per_graph.append({**point, "graph": u["graph_index"], "predicted_d": r["predicted"],
                              "realized_d": ens.mean_realized_d, "centered_d": float(ens.centered_d.mean()),
                              "mad": float(np.mean(ens.mad))})
            for rep in range(ens.replicas):
                rows.append({
                    **point, "graph": u["graph_index"], "graph_seed": u["graph_seed"], "replica": rep,
                    "seed": int(ens.seeds[rep]), "avg_clustering": f.avg_clustering,
                    "avg_shortest_path": f.avg_shortest_path, "predicted_d": r["predicted"],
                    "realized_d": float(ens.realized_d[rep]), "centered_d": float(ens.centered_d[rep]),
                    "mad": float(ens.mad[rep]),
                })
    summary = []
    for combo in itertools.product(*(cfg["sweep"]["axes"][a] for a in axes)):
        point = dict(zip(axes, combo))
        grp = [g for g in per_graph if all(g[a] == v for a, v in point.items())]
        pred = [g["predicted_d"] for g in grp]
        summary.append({
            **point, "graphs": len(grp),
            "mean_predicted_d": None if any(p is None for p in pred) else float(np.mean(pred)),
            "mean_realized_d": float(np.mean([g["realized_d"] for g in grp])),
            "sd_realized_d": float(np.std([g["realized_d"] for g in grp], ddof=1)) if len(grp) > 1 else 0.0,
            "mean_centered_d": float(np.mean([g["centered_d"] for g in grp])),
            "mean_mad": float(np.mean([g["mad"] for g in grp])),
        })
    return ExperimentReport(f"sweep_{kind}", {
        "runs": Table(tuple(axes) + SWEEP_TAIL, rows),
        "graphs": Table(tuple(axes) + ("graph", "predicted_d", "realized_d", "centered_d", "mad"), per_graph),
        "summary": Table(tuple(axes) + SUMMARY_TAIL, summary),
    }, cfg)


def replay_row(cfg: dict, row: dict):
    """Re-simulate one sweep row from its seeds; returns the Trajectory."""
    from .dynamics import run

    axes = cfg["sweep"]["axes"]
    gpoints = _points(cfg, GRAPH_AXES)
    gpoint = {k: row[k] for k in axes if k in GRAPH_AXES}
    mpoint = {k: row[k] for k in axes if k in MODEL_AXES}
    g, seed = build_graph(cfg, gpoint, gpoints.index(gpoint), int(row["graph"]))
    if seed != int(row["graph_seed"]):
        raise ConfigError("graph seed mismatch: config differs from the one that produced the row")
    a = trust_matrix(g, float(cfg["graph"].get("eta", 0.01)))
    sim = simulation_config(cfg["simulation"], int(row["seed"]))
    return run(model_spec({**cfg["model"], **mpoint}), a, sim, seed=int(row["seed"]))


# -- empirical pipeline -------------------------------------------------------

EMPIRICAL_COLUMNS = (
    "topic", "n_sources", "n_times", "n_edges", "y", "log_y", "L", "N", "C", "D", "k",
    "predicted_d", "bound_d", "true_predicted_d",
)
MODEL_COLUMNS = ("model", "term", "coef", "stderr", "tstat", "pvalue")


def synthetic_panels(spec: dict, master: int):
    """Opinion panels simulated by the noisy DeGroot model on random ER graphs.

    Returns ``(panels, true_predicted_d)``.
    """
    from .dynamics import run

    graphs = int(spec.get("graphs", 30))
    steps = int(spec.get("steps", 1500))
    burn = int(spec.get("burn_in", 200))
    eta = float(spec.get("eta", 0.01))
    sigma2 = float(spec.get("sigma2", 1.0))
    rng = np.random.default_rng(derived_seed(master, 3))
    panels, truth = [], []
    for gi in range(graphs):
        n = int(rng.integers(int(spec.get("n_min", 10)), int(spec.get("n_max", 20)) + 1))
        p = float(rng.uniform(float(spec.get("p_min", 0.15)), float(spec.get("p_max", 0.6))))
        g = generate(ErdosRenyi(n, p), derived_seed(master, 4, gi), connected=True)
        a = trust_matrix(g, eta)
        sim = SimulationConfig(steps=burn + steps, burn_in=burn, record="full-trajectory")
        traj = run(ModelSpec(DeGroot(), IIDNoise(sigma2)), a, sim, seed=derived_seed(master, 5, gi))
        values = traj.opinions[burn:]
        panels.append(OpinionPanel(f"syn{gi:03d}", tuple(range(values.shape[0])),
                                   tuple(f"s{i:02d}" for i in range(n)), values))
        truth.append(diversity_degroot(spectrum(a), sigma2).d)
    return panels, truth


def load_panels(spec: dict) -> list[OpinionPanel]:
    """Panels from ``paths`` (files) and/or ``directory`` (every *.csv inside)."""
    fmt = spec.get("format", "long")
    paths = [Path(p) for p in spec.get("paths", [])]
    if spec.get("directory"):
        paths.extend(sorted(Path(spec["directory"]).glob("*.csv")))
    if not paths:
        raise NoInputError("no panel files given")
    panels = []
    for path in paths:
        if fmt == "long":
            panels.extend(read_long_panels(path).values())
        elif fmt == "wide":
            panels.append(read_wide_panel(path))
        else:
            raise ConfigError(f"unknown panel format {fmt!r}")
    if not panels:
        raise NoInputError("panel files contain no usable topics")
    return panels


def _topic_unit(args):
    panel, gcfg, eta = args
    net = build_influence_network(panel, gcfg)
    spec = spectrum(net.trust(eta))
    return net, spec


def empirical(cfg: dict) -> ExperimentReport:
    """Influence networks per topic, then the three regressions of log
    realised diversity."""
    cfg = validate_config(cfg)
    gcfg = GrangerConfig(**cfg.get("granger", {}))
    gcfg.validate()
    eta = float(cfg.get("graph", {}).get("eta", 0.01))
    pspec = cfg.get("panels", {})
    truth = {}
    if "synthetic" in pspec:
        panels, true_d = synthetic_panels(pspec["synthetic"], cfg["seed"])
        truth = {p.topic: d for p, d in zip(panels, true_d)}
    else:
        panels = load_panels(pspec)
    usable = []
    for p in panels:
        if p.n_sources < 2:
            logger.warning("topic %s: %d source(s), skipped", p.topic, p.n_sources)
        elif p.n_times < 10 * gcfg.max_lag:
            logger.warning("topic %s: %d time points, skipped", p.topic, p.n_times)
        else:
            usable.append(p)
    if not usable:
        raise NoInputError("no topic has enough sources and time points")
    results = _pool_map(_topic_unit, [(p, gcfg, eta) for p in usable], int(cfg.get("jobs", 1)))
    rows, feats, pred, real = [], [], [], []
    for panel, (net, spec) in zip(usable, results):
        f = net.features()
        y = empirical_diversity(panel)
        d = diversity_degroot(spec, 1.0, allow_complex=True).d
        rows.append({
            "topic": panel.topic, "n_sources": panel.n_sources, "n_times": panel.n_times,
            "n_edges": net.n_edges, "y": y, "log_y": math.log(y) if y > 0 else None,
            "L": f.avg_shortest_path, "N": f.size, "C": f.avg_clustering, "D": f.density,
            "k": f.avg_degree, "predicted_d": d, "bound_d": diversity_directed_bound(spec, 1.0).d,
            "true_predicted_d": truth.get(panel.topic),
        })
        feats.append(f)
        pred.append(d)
        real.append(y)
    fits = run_regressions(feats, pred, real)
    model_rows = []
    for name, fit in fits.items():
        for j, term in enumerate(fit.terms):
            model_rows.append({"model": name, "term": term, "coef": float(fit.coef[j]),
                               "stderr": float(fit.stderr[j]), "tstat": float(fit.tstat[j]),
                               "pvalue": float(fit.pvalues[j])})
        model_rows.append({"model": name, "term": "r2", "coef": fit.r_squared,
                           "stderr": None, "tstat": None, "pvalue": None})
    report = ExperimentReport("empirical", {
        "topics": Table(EMPIRICAL_COLUMNS, rows),
        "models": Table(MODEL_COLUMNS, model_rows),
    }, cfg)
    report.fits = fits
    report.networks = [net for net, _ in results]
    return report


def run_experiment(cfg: dict) -> ExperimentReport:
    exp = cfg.get("experiment")
    if exp == "validate-spectral":
        return validate_spectral(cfg)
    if exp == "sweep":
        return sweep(cfg)
    if exp == "empirical":
        return empirical(cfg)
    raise ConfigError(f"unknown experiment {exp!r}")
