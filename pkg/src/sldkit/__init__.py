"""Symmetric logarithmic derivatives and quantum Fisher information.

Finite-dimensional states are handled in exponential form ``rho = e^G``;
multimode Gaussian states through their moments ``(delta, gamma)`` or their
generator ``(omega, eta)``. Every route has an independent check: the direct
eigenbasis formula for finite states and a truncated Fock-space brute force
for single-mode Gaussian states.
"""

from .errors import (
    BoundUndefinedError,
    ConvergenceError,
    NotFullRankError,
    NumericalDomainError,
    PureModeError,
    PurityBreakingError,
    SeriesDivergentError,
    SldError,
    TruncationError,
    UnphysicalCovarianceError,
    ValidationError,
)
from .expstate import (
    ExponentialState,
    SLDResult,
    crb,
    f_coefficient,
    f_scalar,
    rhodot_wilcox,
    sld_direct,
    sld_eigenbasis,
    sld_series,
    sld_unitary_family,
    unitary_generator_derivative,
)
from .families import DerivativeBundle, Family
from .fockspace import oracle_qfi
from .gaussian import (
    GaussianGenerator,
    GaussianMoments,
    GeneratorDerivatives,
    MomentDerivatives,
    QuadraticSLD,
    generator_to_moments,
    moments_to_generator,
    qfi_from_generator,
    qfi_from_moments,
    sld_from_generator,
    sld_from_moments,
)
from .symplectic import normal_modes, random_symplectic, symplectic_eigenvalues, williamson

__version__ = "0.1.0"
