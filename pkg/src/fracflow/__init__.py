"""Fractional Brownian motion as a kernel transform of white noise.

Sampling, pathwise and Skorohod integrals, rough-path lifts and the
inverse map back to the driving Brownian motion.
"""

from .errors import FracflowError
from .integrals import (IntegralResult, PartitionSpec, Polynomial, riemann_sum,
                        skorohod_integral, stratonovich_integral, trace_correction,
                        young_pl_integral)
from .inversion import InverseKernelSpec, convolution_identity_check, recover_bm
from .kernels import HolderFunction, HurstParams, covariance_closed, covariance_matrix
from .roughpath import Level2Tensor, Level3Tensor, chen_check, level2, level3
from .synthesis import (FbmPath, Mollifier, NoiseField, synth_exact, synth_gamma,
                        synth_kernel, synth_mollified, synth_poisson)
from .verify import ExperimentConfig, StatReport, run_verify

__version__ = "0.1.0"

__all__ = [
    "FracflowError", "HurstParams", "HolderFunction", "covariance_closed", "covariance_matrix",
    "FbmPath", "NoiseField", "Mollifier", "synth_exact", "synth_kernel", "synth_mollified",
    "synth_poisson", "synth_gamma", "PartitionSpec", "Polynomial", "IntegralResult",
    "riemann_sum", "young_pl_integral", "trace_correction", "stratonovich_integral",
    "skorohod_integral", "Level2Tensor", "Level3Tensor", "level2", "level3", "chen_check",
    "InverseKernelSpec", "convolution_identity_check", "recover_bm", "ExperimentConfig",
    "StatReport", "run_verify",
]
