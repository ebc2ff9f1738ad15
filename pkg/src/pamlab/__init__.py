"""Numerical laboratory for the parabolic Anderson model with singular Gaussian noise.

The package covers every computable object of the moment-asymptotics story:
covariance kernels and their Gaussian mollifications, stationary field
sampling, the regime/scaling table, solvers for the boxed Anderson
Hamiltonian, moment estimation over noise, and the variational (Hartree
ground-state) constants with their closed-form oracles.
"""

__version__ = "0.1.0"

from .fields import Field, field_from_function, grid_centers
from .kernels import (
    FRACTIONAL,
    RIESZ,
    WHITE,
    KernelSpec,
    MollifiedKernelSpec,
    gamma_hat,
    gamma_value,
    mollified_gamma,
    mollifier_hat,
    scaling_exponent,
)
from .noise import (
    RescaledNoiseParams,
    mgf_linear_functional,
    rescale_noise,
    rng_for,
    sample_noise,
    sample_noise_batch,
)
from .scaling import (
    PowerLawSequence,
    Regime,
    ScalingTriple,
    classify_regime,
    predicted_log_moment,
    scaling_functions,
)

__all__ = [
    "Field",
    "KernelSpec",
    "MollifiedKernelSpec",
    "PowerLawSequence",
    "Regime",
    "RescaledNoiseParams",
    "ScalingTriple",
    "WHITE",
    "RIESZ",
    "FRACTIONAL",
    "classify_regime",
    "field_from_function",
    "gamma_hat",
    "gamma_value",
    "grid_centers",
    "mgf_linear_functional",
    "mollified_gamma",
    "mollifier_hat",
    "predicted_log_moment",
    "rescale_noise",
    "rng_for",
    "sample_noise",
    "sample_noise_batch",
    "scaling_exponent",
    "scaling_functions",
]
