"""jointlab: simulate joint measurements of incompatible observables,
invert the observed statistics, and certify nonclassicality.

Three certification routes are implemented end to end:

* qubit negativity - the retrieved joint distribution of sigma_x, sigma_y
  develops a negative entry whenever eta < sqrt(3)|s|;
* separability - a linear program decides whether the observed statistics
  admit a classical model on the Bloch sphere;
* Gaussian positivity - the retrieved quadrature characteristic of a
  double-homodyne measurement loses positive semidefiniteness when the
  cross response exceeds 1 + 2 nbar.
"""

from .accel import BACKEND, NUMBA_AVAILABLE
from .inversion import (
    NEGATIVITY_TOL,
    OUTCOME_ORDER,
    GaussianChar,
    GaussianDensityResult,
    JointDist2x2,
    Kernel2,
    ResponseUnderflowError,
    deconvolve_char,
    gaussian_density,
    invert_joint,
    invert_marginal,
)
from .qubit import (
    SQRT3,
    BlochState,
    QubitClassification,
    QubitPovm,
    classify_qubit,
    povm_statistics,
    qubit_kernel,
    retrieve_joint,
    rotate_to_z,
)
from .lp import (
    LpConvergenceError,
    LpError,
    LpInfeasibleError,
    LpUnboundedError,
    solve_lp,
    solve_minmax,
)
from .separability import (
    SeparabilityResult,
    SeparableModel,
    SphereGrid,
    classical_retrieval_check,
    feasibility_boundary,
    fibonacci_grid,
    model_statistics,
    separability_lp,
)
from .eightport import (
    ClickRecord,
    EightPortConfig,
    PipelineResult,
    PureQubit,
    click_probabilities,
    empirical_pipeline,
    projector_vectors,
    sample_clicks,
)
from .cv import (
    VACUUM_VARIANCE,
    CoherentState,
    CvClassification,
    CvConfig,
    EstimateResult,
    EstimationError,
    ResponseCoeffs,
    ThermalState,
    classify_cv,
    estimate_retrieved_char,
    instrument_response,
    load_samples,
    observed_gaussian,
    response_coeffs,
    retrieved_char,
    sample_observed,
    save_samples,
    signal_char,
)

__version__ = "0.1.0"
