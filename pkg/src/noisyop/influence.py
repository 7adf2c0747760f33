"""Granger-causality influence networks from opinion panels, and the
regressions of realised diversity on topology and predicted diversity."""
from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps
from scipy.linalg import solve_triangular

from .graph import DEFAULT_ETA, NetworkFeatures, TrustMatrix, features, trust_from_adjacency
from .stats import bh_correct

logger = logging.getLogger(__name__)


class InfluenceError(ValueError):
    pass


class RankDeficientError(InfluenceError):
    pass


# -- panels -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OpinionPanel:
    """``values[t, i]``: sentiment of source ``i`` at time ``times[t]`` on one topic."""

    topic: str
    times: tuple
    sources: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape != (len(self.times), len(self.sources)):
            raise InfluenceError(f"topic {self.topic}: values shape {v.shape} does not match times x sources")
        if np.any(~np.isfinite(v)):
            raise InfluenceError(f"topic {self.topic}: panel has missing or non-finite cells")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def n_times(self) -> int:
        return len(self.times)


def _sort_key(value: str):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def _complete_panel(topic, cells: dict) -> OpinionPanel | None:
    """Pivot ``{(time, source): value}`` and drop time rows with any gap."""
    times = sorted({t for t, _ in cells}, key=_sort_key)
    sources = sorted({s for _, s in cells}, key=_sort_key)
    rows, kept = [], []
    for t in times:
        row = [cells.get((t, s)) for s in sources]
        if any(v is None for v in row):
            continue
        kept.append(t)
        rows.append(row)
    dropped = len(times) - len(kept)
    if dropped:
        logger.info("topic %s: dropped %d of %d time rows with missing cells", topic, dropped, len(times))
    if not kept:
        logger.warning("topic %s: no complete time rows", topic)
        return None
    return OpinionPanel(str(topic), tuple(kept), tuple(sources), np.array(rows, dtype=float))


def _parse(value: str) -> float | None:
    value = value.strip()
    if value == "":
        return None
    x = float(value)
    return x if math.isfinite(x) else None


def read_long_panels(path) -> dict[str, OpinionPanel]:
    """Long format ``time,source,topic,sentiment`` -> one panel per topic."""
    cells: dict[str, dict] = defaultdict(dict)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"time", "source", "topic", "sentiment"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise InfluenceError(f"{path}: expected header time,source,topic,sentiment")
        for r in reader:
            v = _parse(r["sentiment"])
            if v is not None:
                cells[r["topic"]][(r["time"], r["source"])] = v
    panels = {}
    for topic in sorted(cells, key=_sort_key):
        p = _complete_panel(topic, cells[topic])
        if p is not None:
            panels[topic] = p
    return panels


def read_wide_panel(path, topic: str | None = None) -> OpinionPanel:
    """Wide format ``time,source_1,...,source_N`` for a single topic."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "time" or len(header) < 2:
            raise InfluenceError(f"{path}: expected header time,source_1,...")
        sources = header[1:]
        cells = {}
        for row in reader:
            for s, v in zip(sources, row[1:]):
                x = _parse(v)
                if x is not None:
                    cells[(row[0], s)] = x
    if topic is None:
        topic = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    panel = _complete_panel(topic, cells)
    if panel is None:
        raise InfluenceError(f"{path}: no complete rows")
    # keep the file's column order
    order = [panel.sources.index(s) for s in sources if s in panel.sources]
    return OpinionPanel(panel.topic, panel.times, tuple(panel.sources[i] for i in order), panel.values[:, order])


def write_long_panels(path, panels: Sequence[OpinionPanel]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "source", "topic", "sentiment"])
        for p in panels:
            for t, row in zip(p.times, p.values):
                for s, v in zip(p.sources, row):
                    w.writerow([t, s, p.topic, repr(float(v))])


# -- Granger causality --------------------------------------------------------


@dataclass(frozen=True)
class GrangerConfig:
    max_lag: int = 5
    alpha: float = 0.05

    def validate(self):
        if self.max_lag < 1:
            raise InfluenceError("max_lag must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise InfluenceError("alpha must lie in (0, 1)")


def _lags(series: np.ndarray, max_lag: int) -> np.ndarray:
    n = series.size
    return np.column_stack([series[max_lag - j : n - j] for j in range(1, max_lag + 1)])


def _rss(X: np.ndarray, y: np.ndarray) -> float:
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if np.any(diag <= 1e-10 * np.maximum(np.linalg.norm(X, axis=0), 1e-300)):
        raise RankDeficientError("Granger design matrix is rank deficient")
    resid = y - q @ (q.T @ y)
    return float(resid @ resid)


def granger_test(x, y, max_lag: int) -> tuple[float, float]:
    """F statistic and p-value for "x Granger-causes y".

    Compares an AR(max_lag) model of ``y`` (with intercept) against the same
    model augmented with ``max_lag`` lags of ``x``; the null is that every
    x-lag coefficient is zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InfluenceError("series must be one-dimensional and of equal length")
    n = y.size
    if n <= 3 * max_lag + 3:
        raise InfluenceError(f"series of length {n} too short for max_lag={max_lag}")
    target = y[max_lag:]
    ones = np.ones((n - max_lag, 1))
    restricted = np.hstack([ones, _lags(y, max_lag)])
    full = np.hstack([restricted, _lags(x, max_lag)])
    rss_r = _rss(restricted, target)
    rss_u = _rss(full, target)
    df_resid = target.size - full.shape[1]
    if rss_u <= 0.0:
        return math.inf, 0.0
    f = max(rss_r - rss_u, 0.0) / max_lag / (rss_u / df_resid)
    return float(f), float(sps.f.sf(f, max_lag, df_resid))


def granger_pvalue(x, y, max_lag: int) -> float:
    return granger_test(x, y, max_lag)[1]


@dataclass(frozen=True, eq=False)
class InfluenceNetwork:
    """``adjacency[i, j]`` is True when source i Granger-causes source j."""

    topic: str
    sources: tuple
    pvalues: np.ndarray
    adjacency: np.ndarray
    f_stats: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum())

    def trust(self, eta: float = DEFAULT_ETA) -> TrustMatrix:
        """Uniform trust: each source averages itself and every source that
        Granger-causes it."""
        listen = self.adjacency.T.astype(float)
        np.fill_diagonal(listen, 1.0)
        return trust_from_adjacency(listen, eta, directed=True)

    def features(self) -> NetworkFeatures:
        """Topology features of the undirected skeleton."""
        return features(self.adjacency | self.adjacency.T)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["src", "dst", "fstat", "pvalue", "edge"])
            for i in range(self.n):
                for j in range(self.n):
                    if i != j:
                        w.writerow([self.sources[i], self.sources[j], repr(float(self.f_stats[i, j])),
                                    repr(float(self.pvalues[i, j])), int(self.adjacency[i, j])])


def build_influence_network(panel: OpinionPanel, cfg: GrangerConfig = GrangerConfig()) -> InfluenceNetwork:
    """Test every ordered pair of sources and keep the BH-significant ones.

    All ``N(N-1)`` tests of one topic form a single FDR family.
    """
    cfg.validate()
    if panel.n_times < 10 * cfg.max_lag:
        raise InfluenceError(f"topic {panel.topic}: {panel.n_times} time points < 10 * max_lag")
    n = panel.n_sources
    pv = np.full((n, n), np.nan)
    fs = np.full((n, n), np.nan)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for i, j in pairs:
        fs[i, j], pv[i, j] = granger_test(panel.values[:, i], panel.values[:, j], cfg.max_lag)
    adj = np.zeros((n, n), dtype=bool)
    if pairs:
        flat = np.array([pv[i, j] for i, j in pairs])
        outcome = bh_correct(flat, cfg.alpha)
        for (i, j), rej in zip(pairs, outcome.rejected):
            adj[i, j] = rej
    return InfluenceNetwork(panel.topic, panel.sources, pv, adj, fs)


def empirical_diversity(panel: OpinionPanel) -> float:
    """Time average of the cross-sectional population variance of the panel."""
    if panel.n_sources < 2:
        raise InfluenceError(f"topic {panel.topic}: need at least 2 sources")
    return float(np.mean(np.var(panel.values, axis=1)))


# -- regression ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RegressionFit:
    terms: tuple
    coef: np.ndarray
    stderr: np.ndarray
    tstat: np.ndarray
    pvalues: np.ndarray
    r_squared: float
    n_obs: int
    df_resid: int
    residuals: np.ndarray

    def __getitem__(self, term):
        i = self.terms.index(term)
        return {"coef": self.coef[i], "stderr": self.stderr[i], "tstat": self.tstat[i], "pvalue": self.pvalues[i]}


def fit_ols(X, y, terms: Sequence[str] | None = None) -> RegressionFit:
    """Least squares via QR with classical (homoskedastic) standard errors.

    ``X`` is the full design matrix; include a column of ones for an intercept.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.size != n:
        raise InfluenceError(f"design has {n} rows, response has {y.size}")
    if n <= k:
        raise InfluenceError(f"underdetermined: {n} observations for {k} coefficients")
    terms = tuple(terms) if terms is not None else tuple(f"x{j}" for j in range(k))
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    col_scale = np.linalg.norm(X, axis=0)
    if np.any(diag <= 1e-10 * np.maximum(col_scale, 1e-300)):
        raise RankDeficientError("design matrix is rank deficient")
    coef = solve_triangular(r, q.T @ y)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    df = n - k
    sigma2 = ssr / df
    rinv = solve_triangular(r, np.eye(k))
    se = np.sqrt(sigma2 * np.sum(rinv**2, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / np.where(se > 0, se, 1.0), np.where(coef == 0, 0.0, np.sign(coef) * np.inf))
    p = 2.0 * sps.t.sf(np.abs(t), df)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ssr / sst if sst > 0 else 0.0
    return RegressionFit(terms, coef, se, t, p, float(min(max(r2, 0.0), 1.0)), n, df, resid)


MODEL_TERMS = {
    "M1": ("intercept", "L", "N", "C", "D"),
    "M2": ("intercept", "d"),
    "M3": ("intercept", "L", "N", "C", "D", "d"),
}


def run_regressions(
    feats: Sequence[NetworkFeatures], predicted: Sequence[float], realized: Sequence[float]
) -> dict[str, RegressionFit]:
    """Fit log(y) on topology (M1), predicted diversity (M2), and both (M3).

    Networks lacking a path length (disconnected) or with non-positive
    realised diversity are dropped from all three models so that the fits
    share one sample.
    """
    if not len(feats) == len(predicted) == len(realized):
        raise InfluenceError("features, predictions and responses differ in length")
    rows, response = [], []
    for f, d, y in zip(feats, predicted, realized):
        if f.avg_shortest_path is None or not y > 0 or not math.isfinite(d):
            continue
        rows.append({"intercept": 1.0, "L": f.avg_shortest_path, "N": float(f.size),
                     "C": f.avg_clustering, "D": f.density, "d": float(d)})
        response.append(math.log(y))
    skipped = len(feats) - len(rows)
    if skipped:
        logger.warning("regressions: skipped %d networks (disconnected or y <= 0)", skipped)
    if len(rows) < len(MODEL_TERMS["M3"]) + 1:
        raise InfluenceError(f"need at least {len(MODEL_TERMS['M3']) + 1} usable networks, have {len(rows)}")
    y = np.array(response)
    fits = {}
    for name, terms in MODEL_TERMS.items():
        X = np.array([[r[t] for t in terms] for r in rows])
        fits[name] = fit_ols(X, y, terms)
    return fits


def write_regression_report(path, fits: dict[str, RegressionFit]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "term", "coef", "stderr", "tstat", "pvalue"])
        for name, fit in fits.items():
            for j, term in enumerate(fit.terms):
                w.writerow([name, term, repr(float(fit.coef[j])), repr(float(fit.stderr[j])),
                            repr(float(fit.tstat[j])), repr(float(fit.pvalues[j]))])
            w.writerow([name, "r2", repr(fit.r_squared), "", "", ""])
