"""Noisy opinion dynamics on networks and spectral predictions of opinion diversity."""
__version__ = "0.1.0"

from .graph import (
    ErdosRenyi,
    NetworkFeatures,
    StochasticBlock,
    TrustMatrix,
    UndirectedGraph,
    WattsStrogatz,
    features,
    generate,
    trust_matrix,
)
from .spectral import (
    DiversityPrediction,
    Spectrum,
    diversity_degroot,
    diversity_directed_bound,
    diversity_fj,
    marginal_contributions,
    spectrum,
)
from .dynamics import (
    DeGroot,
    FriedkinJohnsen,
    GlobalUniqueness,
    IIDNoise,
    LocalUniqueness,
    ModelSpec,
    NoNoise,
    SimulationConfig,
    fj_fixed_point,
    run,
    run_ensemble,
    step,
)
from .stats import bh_correct, dispersion, ks_test, normal_cdf


__all__ = [
    "DeGroot",
    "DiversityPrediction",
    "ErdosRenyi",
    "FriedkinJohnsen",
    "GlobalUniqueness",
    "IIDNoise",
    "LocalUniqueness",
    "ModelSpec",
    "NetworkFeatures",
    "NoNoise",
    "SimulationConfig",
    "Spectrum",
    "StochasticBlock",
    "TrustMatrix",
    "UndirectedGraph",
    "WattsStrogatz",
    "bh_correct",
    "dispersion",
    "diversity_degroot",
    "diversity_directed_bound",
    "diversity_fj",
    "features",
    "fj_fixed_point",
    "generate",
    "ks_test",
    "marginal_contributions",
    "normal_cdf",
    "run",
    "run_ensemble",
    "spectrum",
    "step",
    "trust_matrix",
]
