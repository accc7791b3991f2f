"""Kernelized bandits with a regularised Hilbert-space confidence radius."""

__version__ = "0.1.0"

from .errors import ConfigurationError, GPUCBError, InputError, NumericalError, UnsupportedOperation
from .kernels import (
    FeatureMap,
    KernelSpec,
    cross_gram,
    evaluate,
    gram,
    matern,
    matern_eigendecay_beta,
    mercer_synthetic,
    squared_exponential,
)
from .posterior import KernelRidge, PotentialAudit, elliptical_potential_audit, rkhs_norm
from .confidence import (
    FeatureEllipsoid,
    MixtureTrajectory,
    RadiusSpec,
    abbasi_radius,
    chowdhury_radius,
    log_mixture,
    mixture_batch,
    mixture_trajectory,
    selfnorm_stat_chowdhury,
    selfnorm_stat_features,
    selfnorm_stat_gram,
    truncated_mixture,
)
from .bandit import (
    Environment,
    EpisodeResult,
    RegretRecord,
    gp_ucb_step,
    make_environment,
    matern_regret_exponent,
    regret_exponent,
    rho_schedule,
    run_episode,
)
from .infogain import InfoGainCurve, greedy_infogain, schedule_consistency_check, vakili_bound
