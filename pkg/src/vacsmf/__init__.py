"""Sub-population cause-specific mortality fractions from partially verified
verbal autopsy records: hierarchical latent class model, Pólya-Gamma Gibbs
sampler, structured small-area priors, and a verification-bias study toolkit.
"""
from .records import Dataset, StratumGrid, SurveyRecord
from .model import (
    LatentClassParams,
    ModelState,
    RegressionState,
    inv_logit,
    logit,
    stick_breaking_weights,
    sticks_from_weights,
    symptom_loglik,
)
from .polya_gamma import PgParams, draw_pg, pg_mean, pg_var, sample_pg
from .priors import (
    Hyperparams,
    PriorSpec,
    PriorVariant,
    build_design_matrix,
    build_prior_precision,
    sample_variance_epsilon,
    sample_variance_independent,
    sample_variance_rw1,
)
from .gibbs import ChainConfig, GibbsSampler, PosteriorDraws, run_chain
from .simulate import (
    TrendConfig,
    TrueModel,
    VerificationMechanism,
    apply_verification,
    build_mechanism,
    generate_population,
    generate_true_csmf,
    resample_semisynthetic,
    verification_probability,
)
from .evaluate import (
    CsmfEstimate,
    aggregate_by_time,
    aggregate_overall,
    bias,
    coverage,
    crps,
    crps_improvement,
    latent_profile_report,
    mcc,
    summarize_csmf,
)

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "CsmfEstimate",
    "Dataset",
    "GibbsSampler",
    "Hyperparams",
    "LatentClassParams",
    "ModelState",
    "PgParams",
    "PosteriorDraws",
    "PriorSpec",
    "PriorVariant",
    "RegressionState",
    "StratumGrid",
    "SurveyRecord",
    "TrendConfig",
    "TrueModel",
    "VerificationMechanism",
    "aggregate_by_time",
    "aggregate_overall",
    "apply_verification",
    "bias",
    "build_design_matrix",
    "build_mechanism",
    "build_prior_precision",
    "coverage",
    "crps",
    "crps_improvement",
    "draw_pg",
    "generate_population",
    "generate_true_csmf",
    "inv_logit",
    "latent_profile_report",
    "logit",
    "mcc",
    "pg_mean",
    "pg_var",
    "resample_semisynthetic",
    "run_chain",
    "sample_pg",
    "sample_variance_epsilon",
    "sample_variance_independent",
    "sample_variance_rw1",
    "stick_breaking_weights",
    "sticks_from_weights",
    "summarize_csmf",
    "symptom_loglik",
    "verification_probability",
]
