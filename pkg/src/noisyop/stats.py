"""Dispersion measures, one-sample KS against a Gaussian, Benjamini-Hochberg."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

KOLMOGOROV_TERMS = 20


class StatsError(ValueError):
    pass


def normal_cdf(x, mean: float = 0.0, variance: float = 1.0):
    """Gaussian CDF via the complementary error function (accurate in both tails)."""
    if not variance > 0:
        raise StatsError("variance must be positive")
    z = (np.asarray(x, dtype=float) - mean) / math.sqrt(2.0 * variance)
    out = 0.5 * erfc(-z)
    return float(out) if out.ndim == 0 else out


def kolmogorov_sf(lam: float) -> float:
    """P(K > lam) for the limiting Kolmogorov distribution.

    Uses the alternating series for lam >= 1 and the Jacobi theta form of
    the CDF below that, where the alternating series converges slowly.
    """
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        s = sum(math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam * lam)) for k in range(1, KOLMOGOROV_TERMS + 1))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * s))
    s = sum((-1) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam) for k in range(1, KOLMOGOROV_TERMS + 1))
    return min(1.0, max(0.0, 2.0 * s))


@dataclass(frozen=True)
class KSResult:
    d_stat: float
    p_value: float
    n: int


def ks_test(samples, mean: float = 0.0, variance: float = 1.0) -> KSResult:
    """One-sample two-sided KS test against N(mean, variance) with fixed parameters."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise StatsError("KS test needs at least one sample")
    g = np.atleast_1d(normal_cdf(x, mean, variance))
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - g), np.max(g - (i - 1) / n)))
    return KSResult(d, kolmogorov_sf(math.sqrt(n) * d), n)


@dataclass(frozen=True, eq=False)
class BHOutcome:
    rejected: np.ndarray
    adjusted_threshold_rank: int
    alpha: float

    @property
    def n_rejected(self) -> int:
        return int(self.rejected.sum())


def bh_correct(p_values, alpha: float = 0.05) -> BHOutcome:
    """Benjamini-Hochberg step-up procedure at FDR level ``alpha``.

    Ties in the p-values are ordered by original position.
    """
    if not 0.0 < alpha < 1.0:
        raise StatsError(f"alpha={alpha} outside (0, 1)")
    p = np.asarray(p_values, dtype=float).ravel()
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise StatsError("p-values must lie in [0, 1]")
    m = p.size
    rejected = np.zeros(m, dtype=bool)
    if m == 0:
        return BHOutcome(rejected, 0, alpha)
    order = np.argsort(p, kind="stable")
    below = p[order] <= alpha * np.arange(1, m + 1) / m
    k = int(np.flatnonzero(below)[-1] + 1) if below.any() else 0
    rejected[order[:k]] = True
    return BHOutcome(rejected, k, alpha)


def dispersion(samples) -> dict[str, float]:
    """Mean-square deviation about the sample mean and median absolute deviation."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise StatsError("dispersion needs at least one sample")
    msd = float(np.mean((x - x.mean()) ** 2))
    mad = float(np.median(np.abs(x - np.median(x))))
    return {"msd": msd, "mad": mad}
