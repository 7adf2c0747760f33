"""Trust-matrix spectra and closed-form stationary opinion diversity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import TrustMatrix

# imaginary parts below this are treated as round-off
IMAG_TOL = 1e-9


class SpectralError(ValueError):
    pass


class NonStationaryError(SpectralError):
    """The process has an eigenvalue on or outside the unit circle."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted in descending order.

    For genuinely directed matrices only the real parts are kept;
    ``max_imag`` records the largest discarded imaginary part.
    """

    eigenvalues: np.ndarray
    max_imag: float = 0.0

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def is_real(self) -> bool:
        return self.max_imag <= IMAG_TOL

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        v = np.asarray(values)
        imag = float(np.max(np.abs(v.imag))) if np.iscomplexobj(v) and v.size else 0.0
        real = np.sort(np.real(v).astype(float))[::-1]
        return cls(real, imag)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("eigenvalue\n")
            for x in self.eigenvalues:
                fh.write(f"{float(x)!r}\n")


@dataclass(frozen=True)
class DiversityPrediction:
    d: float
    kind: str  # "exact-undirected" | "upper-bound-directed"
    sigma2: float
    susceptibility: float | None = None
    xi2: float | None = None

    def __float__(self):
        return self.d


def spectrum(a: TrustMatrix | np.ndarray) -> Spectrum:
    """Eigenvalues of a trust matrix.

    Degree-normalised matrices of undirected graphs are similar to the
    symmetric matrix ``D^{1/2} A D^{-1/2}`` and go through the symmetric
    solver, so their spectrum is real by construction.  Anything else uses
    the general (Hessenberg/QR) solver.
    """
    w = np.asarray(a.weights if isinstance(a, TrustMatrix) else a, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise SpectralError(f"trust matrix must be square, got shape {w.shape}")
    directed = a.directed if isinstance(a, TrustMatrix) else True
    try:
        if not directed:
            sym = _symmetrize(w)
            if sym is not None:
                return Spectrum.from_values(np.linalg.eigvalsh(sym))
        return Spectrum.from_values(np.linalg.eigvals(w))
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc


def _symmetrize(w: np.ndarray) -> np.ndarray | None:
    """``D^{1/2} W D^{-1/2}`` when ``W`` is a row-scaled symmetric pattern, else None."""
    pattern = w != 0
    if not np.array_equal(pattern, pattern.T):
        return None
    k = pattern.sum(axis=1).astype(float)
    if np.any(k == 0):
        return None
    # uniform rows with a common row sum c: w[i, j] = c / k_i on the support
    scale = w.sum(axis=1)
    if not np.allclose(scale, scale[0], rtol=1e-12, atol=0):
        return None
    if not np.allclose(w * k[:, None], np.where(pattern, scale[:, None], 0.0), rtol=1e-12, atol=0):
        return None
    root = np.sqrt(k)
    sym = root[:, None] * w / root[None, :]
    return 0.5 * (sym + sym.T)


def _stationary_terms(values: np.ndarray, what: str) -> np.ndarray:
    if np.any(np.abs(values) >= 1.0):
        raise NonStationaryError(f"{what}: eigenvalue magnitude >= 1, no stationary distribution")
    return 1.0 / (1.0 - values**2)


def marginal_contributions(s: Spectrum) -> np.ndarray:
    """``1/(1 - lambda_i^2)`` for each eigenvalue, in spectrum order."""
    return _stationary_terms(s.eigenvalues, "marginal_contributions")


def diversity_degroot(s: Spectrum, sigma2: float, *, allow_complex: bool = False) -> DiversityPrediction:
    """Stationary diversity of the noisy DeGroot process with i.i.d. noise.

    Spectra with complex eigenvalues are refused unless ``allow_complex`` is
    set, in which case the real parts are used as an approximation.
    """
    if sigma2 < 0:
        raise SpectralError("noise variance must be non-negative")
    if not s.is_real and not allow_complex:
        raise SpectralError(
            "spectrum has complex eigenvalues; use diversity_directed_bound or allow_complex=True"
        )
    d = sigma2 * float(np.sum(marginal_contributions(s))) / s.n
    return DiversityPrediction(d, "exact-undirected", sigma2)


def diversity_fj(
    s: Spectrum, sigma2: float, xi2: float, susceptibility: float, *, allow_complex: bool = False
) -> DiversityPrediction:
    """Stationary diversity of the noisy Friedkin-Johnsen process with uniform
    susceptibility and i.i.d. prejudices of variance ``xi2``."""
    if not 0.0 <= susceptibility <= 1.0:
        raise SpectralError(f"susceptibility {susceptibility} outside [0, 1]")
    if sigma2 < 0 or xi2 < 0:
        raise SpectralError("variances must be non-negative")
    if not s.is_real and not allow_complex:
        raise SpectralError("spectrum has complex eigenvalues")
    if susceptibility == 0.0:
        # every term is exactly 1
        d = sigma2 + xi2
    else:
        terms = _stationary_terms(susceptibility * s.eigenvalues, "diversity_fj")
        d = (sigma2 + (1.0 - susceptibility) ** 2 * xi2) * float(np.sum(terms)) / s.n
    return DiversityPrediction(d, "exact-undirected", sigma2, susceptibility, xi2)


def diversity_directed_bound(s: Spectrum, sigma2: float) -> DiversityPrediction:
    """Upper bound ``(sigma2/N) sum_i sum_j 1/(1 - lambda_i lambda_j)`` for
    directed trust matrices, evaluated on the real parts of the spectrum."""
    lam = s.eigenvalues
    prod = np.outer(lam, lam)
    if np.any(prod >= 1.0):
        raise NonStationaryError("eigenvalue product >= 1, bound diverges")
    d = sigma2 * float(np.sum(1.0 / (1.0 - prod))) / s.n
    return DiversityPrediction(d, "upper-bound-directed", sigma2)
