"""Statistical analysis of quasiprobability sampling in homodyne tomography.

The package compares, for the same target observable, the uncertainty of
three estimation routes: the quantum-mechanical lower bound, pattern-function
sampling of phase-tagged quadrature data (balanced detection), and error
propagation through photon statistics of the displaced state (unbalanced
detection).
"""

from .errors import (
    ConfigError,
    DivergentKernel,
    InsufficientRange,
    InsufficientSamples,
    NonintegrableOperator,
    QuadratureNonconvergence,
    TomostatError,
)
from .estimators import (
    EstimateWithUncertainty,
    VarianceReport,
    bhd_variance,
    bhd_variance_displaced,
    cascaded_method1,
    cascaded_method2,
    empirical_estimate_bhd,
    empirical_estimate_single,
    expectation_via_cf,
    qm_variance,
    unbalanced_uncertainty,
    write_variance_reports,
)
from .observables import (
    FilterSpec,
    OperatorSpec,
    autocorr_filter,
    filter_window,
    fock_coefficients,
    operator_cf,
    radial_operator_cf,
    s_kernel,
)
from .pattern import PatternFn, PatternTable, build_table, pattern_value, pattern_values
from .phasespace import (
    CharFn,
    GaussianStateSpec,
    PhysicalityResult,
    apply_loss_cf,
    beamsplitter_mix_cf,
    bipartite_covariance,
    displace_cf,
    eval_gaussian_cf,
    gaussian_cf,
    phase_average_cf,
    physicality_check,
    symplectic_form,
)
from .simulate import (
    ExperimentConfig,
    PhotonDistribution,
    QuadratureSampleSet,
    phase_diffused_pdf,
    photon_distribution_from_cf,
    photon_number_distribution,
    quadrature_pdf,
    sample_photon_counts,
    sample_quadratures,
)

__version__ = "0.1.0"
