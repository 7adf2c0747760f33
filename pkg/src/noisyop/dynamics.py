"""Noisy DeGroot and Friedkin-Johnsen simulation.

The update is synchronous::

    y_t = A y_{t-1} + eps_t                      (DeGroot)
    y_t = s A y_{t-1} + (1 - s) rho + eps_t      (Friedkin-Johnsen)

with ``eps_t`` absent, i.i.d. Gaussian, or state dependent (global or
local uniqueness).  Ensembles advance all replicas together as the
columns of an ``N x R`` matrix, each replica drawing from its own stream.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .graph import TrustMatrix
from .spectral import diversity_degroot, diversity_fj, spectrum

RECORD_MODES = ("full-trajectory", "terminal-state", "windowed-diversity")
# noise blocks drawn per replica at a time
_CHUNK = 64


class DynamicsError(ValueError):
    pass


# -- model specification ------------------------------------------------------


@dataclass(frozen=True)
class DeGroot:
    pass


@dataclass(frozen=True)
class FriedkinJohnsen:
    """Uniform susceptibility ``s``.  Prejudices are either the explicit
    vector ``prejudices`` or drawn i.i.d. N(0, prejudice_variance) once per
    replica."""

    susceptibility: float
    prejudices: tuple[float, ...] | None = None
    prejudice_variance: float = 0.0


@dataclass(frozen=True)
class NoNoise:
    sigma2: float = 0.0


@dataclass(frozen=True)
class IIDNoise:
    sigma2: float


@dataclass(frozen=True)
class GlobalUniqueness:
    """Variance ``sigma2 * exp(-beta (y_i - mean(y))^2)``."""

    sigma2: float
    beta: float


@dataclass(frozen=True)
class LocalUniqueness:
    """Variance ``sigma2 * sum_j A_ij exp(-beta (y_i - y_j)^2)``."""

    sigma2: float
    beta: float


Dynamics = Union[DeGroot, FriedkinJohnsen]
Noise = Union[NoNoise, IIDNoise, GlobalUniqueness, LocalUniqueness]


@dataclass(frozen=True)
class ModelSpec:
    dynamics: Dynamics = field(default_factory=DeGroot)
    noise: Noise = field(default_factory=lambda: IIDNoise(1.0))

    def validate(self, n: int | None = None):
        noise, dyn = self.noise, self.dynamics
        if noise.sigma2 < 0:
            raise DynamicsError("noise variance must be non-negative")
        if getattr(noise, "beta", 0.0) < 0:
            raise DynamicsError("beta must be non-negative")
        if isinstance(dyn, FriedkinJohnsen):
            if not 0.0 <= dyn.susceptibility <= 1.0:
                raise DynamicsError(f"susceptibility {dyn.susceptibility} outside [0, 1]")
            if dyn.prejudice_variance < 0:
                raise DynamicsError("prejudice variance must be non-negative")
            if n is not None and dyn.prejudices is not None and len(dyn.prejudices) != n:
                raise DynamicsError(f"{len(dyn.prejudices)} prejudices for {n} agents")

    @property
    def noisy(self) -> bool:
        return not isinstance(self.noise, NoNoise)

    @property
    def sigma2(self) -> float:
        return self.noise.sigma2


@dataclass(frozen=True)
class SimulationConfig:
    steps: int = 500
    burn_in: int = 100
    replicas: int = 1
    seed: int = 0
    record: str = "windowed-diversity"
    # variance of the N(0, .) initial opinions; None -> noise variance (or 1 if noiseless)
    initial_variance: float | None = None

    def validate(self):
        if self.steps < 1:
            raise DynamicsError("steps must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise DynamicsError("burn_in must lie in [0, steps)")
        if self.replicas < 1:
            raise DynamicsError("replicas must be >= 1")
        if self.record not in RECORD_MODES:
            raise DynamicsError(f"record must be one of {RECORD_MODES}")
        if self.initial_variance is not None and self.initial_variance < 0:
            raise DynamicsError("initial variance must be non-negative")


# -- single step --------------------------------------------------------------


def _weights(a) -> np.ndarray:
    return a.weights if isinstance(a, TrustMatrix) else np.asarray(a, dtype=float)


def noise_variance(noise: Noise, y_prev: np.ndarray, a) -> np.ndarray:
    """Per-agent noise variance given the previous opinions.

    ``y_prev`` is ``(N,)`` or ``(N, R)``; the result has the same shape.
    """
    y = np.asarray(y_prev, dtype=float)
    if isinstance(noise, NoNoise):
        return np.zeros_like(y)
    if isinstance(noise, IIDNoise):
        return np.full_like(y, noise.sigma2)
    if isinstance(noise, GlobalUniqueness):
        dev = y - y.mean(axis=0)
        return noise.sigma2 * np.exp(-noise.beta * dev**2)
    if isinstance(noise, LocalUniqueness):
        w = _weights(a)
        if noise.beta == 0.0:
            rows = w.sum(axis=1)
            return noise.sigma2 * (rows if y.ndim == 1 else rows[:, None] * np.ones_like(y))
        rows, cols = np.nonzero(w)
        starts = np.flatnonzero(np.r_[True, rows[1:] != rows[:-1]])
        if starts.size != w.shape[0]:
            # some agent has no neighbours at all: dense fallback
            diff = y[:, None, ...] - y[None, :, ...]
            spec = "ij,ij->i" if y.ndim == 1 else "ij,ijr->ir"
            return noise.sigma2 * np.einsum(spec, w, np.exp(-noise.beta * diff**2))
        vals = w[rows, cols] if y.ndim == 1 else w[rows, cols][:, None]
        terms = vals * np.exp(-noise.beta * (y[rows] - y[cols]) ** 2)
        return noise.sigma2 * np.add.reduceat(terms, starts, axis=0)
    raise DynamicsError(f"unknown noise regime {noise!r}")


def sample_noise(noise: Noise, y_prev: np.ndarray, a, rng: np.random.Generator) -> np.ndarray:
    y = np.asarray(y_prev, dtype=float)
    n = _weights(a).shape[0]
    if y.shape[0] != n:
        raise DynamicsError(f"opinion vector has {y.shape[0]} entries, trust matrix has {n}")
    if isinstance(noise, NoNoise):
        return np.zeros_like(y)
    return np.sqrt(noise_variance(noise, y, a)) * rng.standard_normal(y.shape)


def _drift(dyn: Dynamics, w: np.ndarray, y: np.ndarray, rho) -> np.ndarray:
    if isinstance(dyn, FriedkinJohnsen):
        s = dyn.susceptibility
        return s * (w @ y) + (1.0 - s) * rho
    return w @ y


def _check_stationary(model: ModelSpec, a):
    if model.noisy and model.sigma2 > 0:
        w = _weights(a)
        if np.any(w.sum(axis=1) >= 1.0):
            raise DynamicsError("noisy dynamics need a strictly substochastic trust matrix")


def step(model: ModelSpec, a, y_prev, rng: np.random.Generator | None = None, rho=None) -> np.ndarray:
    """One synchronous update of every agent.

    For Friedkin-Johnsen dynamics the prejudice vector comes from ``rho`` or,
    failing that, from the model's explicit prejudices.
    """
    w = _weights(a)
    y = np.asarray(y_prev, dtype=float)
    if y.shape[0] != w.shape[0]:
        raise DynamicsError(f"opinion vector has {y.shape[0]} entries, trust matrix has {w.shape[0]}")
    model.validate(w.shape[0])
    _check_stationary(model, a)
    if isinstance(model.dynamics, FriedkinJohnsen) and rho is None:
        if model.dynamics.prejudices is None:
            raise DynamicsError("Friedkin-Johnsen step needs a prejudice vector")
        rho = np.asarray(model.dynamics.prejudices, dtype=float)
    out = _drift(model.dynamics, w, y, rho)
    if model.noisy:
        if rng is None:
            raise DynamicsError("noisy step needs a random generator")
        out = out + sample_noise(model.noise, y, a, rng)
    return out


def fj_fixed_point(a, susceptibility: float, rho) -> np.ndarray:
    """Deterministic Friedkin-Johnsen equilibrium ``(I - sA)^{-1} (1 - s) rho``."""
    w = _weights(a)
    rho = np.asarray(rho, dtype=float)
    n = w.shape[0]
    radius = float(np.max(np.abs(np.linalg.eigvals(w)))) if n else 0.0
    if susceptibility * radius >= 1.0 - 1e-12:
        raise DynamicsError("I - sA is singular (s * spectral radius >= 1)")
    return np.linalg.solve(np.eye(n) - susceptibility * w, (1.0 - susceptibility) * rho)


# -- trajectories and ensembles -----------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One simulated run.

    ``opinions`` has shape ``(T, N)`` holding y_1..y_T for full recording,
    ``(1, N)`` (the terminal state) otherwise.  ``realized_d`` is the time
    average over the post-burn-in window of the mean squared opinion about
    the process mean 0; ``centered_d`` uses the cross-sectional sample mean
    instead; ``mad`` averages the per-step median absolute deviation.
    """

    opinions: np.ndarray
    initial: np.ndarray
    prejudices: np.ndarray | None
    seed: int
    model: ModelSpec
    config: SimulationConfig
    realized_d: float
    centered_d: float
    mad: float

    @property
    def terminal(self) -> np.ndarray:
        return self.opinions[-1]

    def windowed_diversity(self, start: int, stop: int | None = None) -> float:
        """Mean of ``(1/N) sum_i y_{i,t}^2`` for ``start < t <= stop`` (full recording only)."""
        if self.config.record != "full-trajectory":
            raise DynamicsError("windowed diversity needs record='full-trajectory'")
        stop = self.config.steps if stop is None else stop
        block = self.opinions[start:stop]
        return float(np.mean(block**2))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "node", "opinion"])
            rows = self.opinions
            t0 = 1 if self.config.record == "full-trajectory" else self.config.steps
            for t, y in enumerate(rows, start=t0):
                for i, v in enumerate(y):
                    w.writerow([t, i, repr(float(v))])


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    realized_d: np.ndarray
    centered_d: np.ndarray
    mad: np.ndarray
    terminal: np.ndarray  # (R, N)
    seeds: np.ndarray
    predicted_d: float | None
    model: ModelSpec
    config: SimulationConfig

    @property
    def replicas(self) -> int:
        return self.realized_d.size

    @property
    def mean_realized_d(self) -> float:
        return float(self.realized_d.mean())

    def pooled_terminal(self) -> np.ndarray:
        return self.terminal.ravel()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replica", "realized_d", "mad", "predicted_d", "seed"])
            pred = "" if self.predicted_d is None else repr(float(self.predicted_d))
            for r in range(self.replicas):
                w.writerow([r, repr(float(self.realized_d[r])), repr(float(self.mad[r])), pred, int(self.seeds[r])])


def replica_seeds(master: int, replicas: int) -> np.ndarray:
    """Independent 64-bit child seeds derived from ``master``."""
    return np.random.SeedSequence(int(master)).generate_state(replicas, dtype=np.uint64)


def _initial_variance(model: ModelSpec, config: SimulationConfig) -> float:
    if config.initial_variance is not None:
        return config.initial_variance
    return model.sigma2 if model.sigma2 > 0 else 1.0


def _simulate(model, a, config, rngs, y0=None, rho=None, keep_full=False):
    """Advance ``len(rngs)`` replicas; returns per-replica statistics."""
    w = _weights(a)
    n, R, T = w.shape[0], len(rngs), config.steps
    dyn = model.dynamics
    sd0 = np.sqrt(_initial_variance(model, config))

    Y = np.empty((n, R))
    P = None
    for r, g in enumerate(rngs):
        Y[:, r] = sd0 * g.standard_normal(n) if y0 is None else y0
    if isinstance(dyn, FriedkinJohnsen):
        P = np.empty((n, R))
        for r, g in enumerate(rngs):
            if rho is not None:
                P[:, r] = rho
            elif dyn.prejudices is not None:
                P[:, r] = dyn.prejudices
            else:
                P[:, r] = np.sqrt(dyn.prejudice_variance) * g.standard_normal(n)
    initial = Y.copy()

    full = np.empty((T, n, R)) if keep_full else None
    sq = np.zeros(R)
    cen = np.zeros(R)
    mad = np.zeros(R)
    # medians are costly; only adaptive-noise runs need them
    track_mad = isinstance(model.noise, (GlobalUniqueness, LocalUniqueness)) or keep_full or R == 1
    block = None
    for t in range(T):
        if model.noisy:
            j = t % _CHUNK
            if j == 0:
                size = min(_CHUNK, T - t)
                block = np.stack([g.standard_normal((size, n)) for g in rngs], axis=-1)
            z = block[j]
            var = noise_variance(model.noise, Y, w)
            Y = _drift(dyn, w, Y, P) + np.sqrt(var) * z
        else:
            Y = _drift(dyn, w, Y, P)
        if keep_full:
            full[t] = Y
        if t >= config.burn_in:
            m2 = np.mean(Y**2, axis=0)
            sq += m2
            cen += m2 - np.mean(Y, axis=0) ** 2
            if track_mad:
                med = np.median(Y, axis=0)
                mad += np.median(np.abs(Y - med), axis=0)
    window = T - config.burn_in
    return dict(
        terminal=Y.T.copy(),
        initial=initial.T,
        prejudices=None if P is None else P.T,
        realized=sq / window,
        centered=cen / window,
        mad=mad / window if track_mad else np.full(R, np.nan),
        full=full,
    )


def run(model: ModelSpec, a, config: SimulationConfig, seed=None, *, y0=None, rho=None) -> Trajectory:
    """Simulate a single trajectory of ``config.steps`` steps.

    Initial opinions are i.i.d. N(0, v) with ``v = config.initial_variance``
    (default: the noise variance) unless ``y0`` is given.
    """
    config.validate()
    w = _weights(a)
    model.validate(w.shape[0])
    _check_stationary(model, a)
    seed = config.seed if seed is None else seed
    keep_full = config.record == "full-trajectory"
    out = _simulate(model, a, config, [np.random.default_rng(int(seed))], y0=y0, rho=rho, keep_full=keep_full)
    opinions = out["full"][:, :, 0] if keep_full else out["terminal"]
    return Trajectory(
        opinions=opinions,
        initial=out["initial"][0],
        prejudices=None if out["prejudices"] is None else out["prejudices"][0],
        seed=int(seed),
        model=model,
        config=config,
        realized_d=float(out["realized"][0]),
        centered_d=float(out["centered"][0]),
        mad=float(out["mad"][0]),
    )


def predicted_diversity(model: ModelSpec, a) -> float | None:
    """Closed-form stationary diversity where one exists (i.i.d. noise)."""
    if not isinstance(model.noise, IIDNoise):
        return None
    spec = spectrum(a)
    dyn = model.dynamics
    if isinstance(dyn, FriedkinJohnsen):
        if dyn.prejudices is not None:
            return None
        return diversity_fj(spec, model.sigma2, dyn.prejudice_variance, dyn.susceptibility, allow_complex=True).d
    return diversity_degroot(spec, model.sigma2, allow_complex=True).d


def run_ensemble(model: ModelSpec, a, config: SimulationConfig, seeds=None, *, predicted=True) -> EnsembleResult:
    """Run ``config.replicas`` independent trajectories.

    Replica ``r`` uses ``seeds[r]`` (default: children of ``config.seed``),
    so any replica can be replayed alone with :func:`run`.
    """
    config.validate()
    w = _weights(a)
    model.validate(w.shape[0])
    _check_stationary(model, a)
    if seeds is None:
        seeds = replica_seeds(config.seed, config.replicas)
    seeds = np.asarray(seeds, dtype=np.uint64)
    if seeds.size != config.replicas:
        raise DynamicsError(f"{seeds.size} seeds for {config.replicas} replicas")
    rngs = [np.random.default_rng(int(s)) for s in seeds]
    out = _simulate(model, a, config, rngs)
    return EnsembleResult(
        realized_d=out["realized"],
        centered_d=out["centered"],
        mad=out["mad"],
        terminal=out["terminal"],
        seeds=seeds,
        predicted_d=predicted_diversity(model, a) if predicted else None,
        model=model,
        config=config,
    )
