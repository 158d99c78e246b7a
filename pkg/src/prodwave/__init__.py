"""Shock propagation through production networks and the volatility attenuation it implies."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
from .netgen import ProductionNetwork, random_network, ingest_network, write_network  # noqa: E402
from .spectral import summarize  # noqa: E402
from .riskstats import attenuation_ratio, population_static_variance, population_L_variance  # noqa: E402

__all__ = [
    "BACKEND",
    "ProductionNetwork",
    "random_network",
    "ingest_network",
    "write_network",
    "summarize",
    "attenuation_ratio",
    "population_static_variance",
    "population_L_variance",
]
