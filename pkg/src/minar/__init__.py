"""Multivariate integer-valued autoregressive (MINAR(1)) count processes."""
from minar.errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    EstimationError,
    MinarError,
    StationarityError,
)
from minar.innovations import BivPoissonParams, bp_logpmf, bp_moments, bp_sample
from minar.process import (
    CountSeries,
    RandomSource,
    ThinningMatrix,
    binomial_thin,
    matrix_thin,
    simulate_inma,
    simulate_minar,
    simulate_paths,
    spectral_radius,
)

__version__ = "0.1.0"
