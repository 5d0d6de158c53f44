"""Spectral and connection data for modified-Mathieu-type operators of order N.

The library computes Floquet exponents and connection multipliers from
Hill-determinant Q-functions, assembles the connection matrix between the
solution bases at the two irregular singularities, evaluates the
Weyl-orbit quantization conditions for bound states (N even) and
resonances (N odd), and cross-validates everything against brute-force
spectral oracles.
"""

from .connection import (
    ConnectionData,
    build_connection,
    minor_det_direct,
    minor_det_subset_sum,
    qc_value,
)
from .errors import (
    ConfigError,
    DegenerateExponentsError,
    DegenerateMonodromyError,
    DomainError,
    MissedRootsError,
    MultiplierBlowupError,
    NearPoleError,
    NotConvergedError,
    OracleError,
    RemovableSingularityError,
    ResonantDenominatorError,
    RootSearchError,
    TodaSpectraError,
)
from .floquet import (
    FloquetData,
    eta_small_lambda,
    floquet_series_eval,
    locate_sigma,
    multipliers,
)
from .gammafn import cgamma
from .oracle import (
    GridSpec,
    SpectraComparison,
    compare_spectra,
    difference_collocation_even,
    potential_vn,
    schrodinger_eigen_N2,
)
from .qfn import (
    HILL_ROW_CAP,
    ModelParams,
    TruncationOpts,
    baxter_residual,
    hill_determinant,
    q_function,
    quantum_wronskian,
    t_eval,
    t_poly_coeffs,
    tau_roots,
)
from .rootsys import (
    WeightVector,
    fundamental_weight,
    positive_roots,
    subset_weight,
    weight_dot,
    weyl_orbit_subsets,
    weyl_vector,
)
from .spectrum import (
    RootRecord,
    SpectrumResult,
    quantization_function,
    refine_root,
    scan_real,
    spectrum_list,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # rootsys
    "WeightVector", "weight_dot", "positive_roots", "weyl_vector",
    "weyl_orbit_subsets", "subset_weight", "fundamental_weight",
    # qfn
    "ModelParams", "TruncationOpts", "HILL_ROW_CAP", "t_eval",
    "t_poly_coeffs", "tau_roots", "hill_determinant", "q_function",
    "quantum_wronskian", "baxter_residual", "cgamma",
    # floquet
    "FloquetData", "locate_sigma", "multipliers", "eta_small_lambda",
    "floquet_series_eval",
    # connection
    "ConnectionData", "build_connection", "minor_det_direct",
    "minor_det_subset_sum", "qc_value",
    # spectrum
    "RootRecord", "SpectrumResult", "quantization_function", "scan_real",
    "refine_root", "spectrum_list",
    # oracle
    "GridSpec", "SpectraComparison", "schrodinger_eigen_N2",
    "difference_collocation_even", "compare_spectra", "potential_vn",
    # errors
    "TodaSpectraError", "DomainError", "NearPoleError",
    "RemovableSingularityError", "NotConvergedError", "MissedRootsError",
    "DegenerateExponentsError", "MultiplierBlowupError",
    "DegenerateMonodromyError", "ResonantDenominatorError",
    "RootSearchError", "OracleError", "ConfigError",
]
