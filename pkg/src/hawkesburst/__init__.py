"""Detection of exogenous intensity bursts in event streams modeled as a
Hawkes process: simulation, maximum-likelihood fitting, candidate
pre-identification, information-criterion gated model growth, and the link
to price jumps."""

from .core import (
    ApproxPowerLaw,
    BurstTerm,
    CriticalityError,
    DoubleExp,
    EventSeries,
    FitFailureError,
    InvalidParameterError,
    KernelSpec,
    ModelFit,
    NotEnoughDataError,
    SingleExp,
    expected_cluster_size,
    power_law_constants,
)
from .detector import DetectionReport, DetectorConfig, compare_models, detect
from .estimator import IntensityBurstDetector
from .likelihood import (
    FitConfig,
    fit,
    get_family,
    implied_mu,
    log_likelihood,
    optimize_z,
    reduced_cost,
)
from .preid import CandidateWindow, PreIdConfig, delta_series, rank_candidates
from .simulate import SimScenario, adjust_mu, simulate, simulate_thinning

__version__ = "0.1.0"
