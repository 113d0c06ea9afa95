"""Nonparametric tolerance limits and sample sizes under biased sampling."""
from biastol._backend import BACKEND
from biastol.distributions import GenGammaSpec, size_bias
from biastol.errors import (
    BiastolError,
    ConvergenceError,
    DomainError,
    InfeasibleError,
    InsufficientDrawsError,
    NoSolutionError,
    UnboundedQuantileError,
)
from biastol.fft_conv import FFTConfig
from biastol.quantile_map import QuantileMap, analytic_map, identity_map, monte_carlo_map, pilot_map
from biastol.tolerance_classic import (
    Method,
    SampleSizeResult,
    ToleranceSpec,
    exact_coverage,
    exact_sample_size,
    scheffe_tukey_coverage,
    scheffe_tukey_sample_size,
)
from biastol.tolerance_fft import coverage_fft, sample_size_fft
from biastol.tolerance_inequality import coverage_inequality, sample_size_inequality

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BiastolError", "ConvergenceError", "DomainError", "FFTConfig", "GenGammaSpec",
    "InfeasibleError", "InsufficientDrawsError", "Method", "NoSolutionError", "QuantileMap",
    "SampleSizeResult", "ToleranceSpec", "UnboundedQuantileError", "analytic_map", "coverage_fft",
    "coverage_inequality", "exact_coverage", "exact_sample_size", "identity_map", "monte_carlo_map",
    "pilot_map", "sample_size_fft", "sample_size_inequality", "scheffe_tukey_coverage",
    "scheffe_tukey_sample_size", "size_bias",
]
