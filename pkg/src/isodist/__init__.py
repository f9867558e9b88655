"""Dynamic distance on isospectral orbits of mixed quantum states."""

__version__ = "0.1.0"

from .bures import bures_distance, compare_distances, fidelity  # noqa: E402
from .geodesics import OptimizerConfig, dynamic_distance  # noqa: E402
from .states import Spectrum, canonical_purification, random_isospectral, spectrum_of  # noqa: E402

__all__ = [
    "OptimizerConfig",
    "Spectrum",
    "bures_distance",
    "canonical_purification",
    "compare_distances",
    "dynamic_distance",
    "fidelity",
    "random_isospectral",
    "spectrum_of",
]
