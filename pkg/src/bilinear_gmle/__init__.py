"""Simulation, quasi-likelihood estimation and inference for the bilinear model

    Y_t = mu + phi * Y_{t-2} + b * Y_{t-2} * eps_{t-1} + eps_t.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .estimation import (  # noqa: E402
    EstimationResult,
    ProfileState,
    confidence_intervals,
    covariance_hat,
    fit_gmle,
    profile_inner,
    sign_estimator,
)
from .inference import (  # noqa: E402
    BoundaryLimitSample,
    BoundaryTestResult,
    boundary_interval,
    simulate_boundary_limit,
    test_b_zero,
)
from .likelihood import (  # noqa: E402
    ParamSpace,
    ThetaVector,
    hessian_term,
    hessian_total,
    loglik_term,
    loglik_total,
    score_term,
    score_total,
)
from .model import (  # noqa: E402
    GAUSSIAN,
    ErrorLaw,
    ModelParams,
    SeriesData,
    StationarityReport,
    representation_truncated,
    simulate,
    stationarity_gamma,
    stationarity_region,
)
from .montecarlo import Cell, ExperimentSpec, McSummary, run_experiment, size_power_table  # noqa: E402
