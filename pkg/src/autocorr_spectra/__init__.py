"""Spectra of high-dimensional lag-tau sample auto-correlation matrices.

The package builds lag-tau sample auto-covariance / auto-correlation
matrices from i.i.d. noise panels, computes their spectra and compares
them with the closed-form limiting spectral law of ``R R^t``.
"""

from .data_gen import (
    DistributionSpec,
    ErrorPanel,
    FactorModelConfig,
    derive_replication_seed,
    sample_error_panel,
    sample_factor_panel,
)
from .empirics import Ecdf, eigenvalue_summary, esd, ks_distance, levy_distance
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateInputError,
    NumericalConsistencyError,
)
from .linalg import Spectrum, largest_eigenvalue, singular_values, sym_eigenvalues
from .matrices import LagMatrix, SymProduct, autocorr, autocov, normalized_trace, sym_product
from .theory import (
    MarchenkoPasturLaw,
    SpectralLaw,
    StieltjesValue,
    lsd_cdf,
    lsd_density,
    mp_cdf,
    mp_density,
    stieltjes_m,
    support_edges,
)

__version__ = "0.1.0"
