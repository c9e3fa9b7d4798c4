"""Design matrices, block-diagonal prior precisions, and variance updates.

The prevalence grid is modeled on the logit scale as ``design @ effects``
with effects laid out as (intercept, sex indicator, time effects, age
effects, per-stratum noise). Three structured priors govern the time/age
blocks: fixed effects, independent random effects, and a first-order random
walk anchored by a diffuse prior on the first element.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import block_diag


class PriorVariant(str, Enum):
    FIXED = "fixed"
    INDEPENDENT = "indep"
    RW1 = "rw1"
    UNSTRUCTURED = "unstructured"
    UNSTRATIFIED = "unstratified"
    TIME_ONLY = "time-only"


#: variants whose prevalence is driven by the logit-scale linear model
STRUCTURED_VARIANTS = frozenset(
    {PriorVariant.FIXED, PriorVariant.INDEPENDENT, PriorVariant.RW1, PriorVariant.TIME_ONLY}
)


@dataclass(frozen=True)
class Hyperparams:
    """All fixed hyperparameters of the model, with the conventional defaults.

    The Inverse-Gamma pairs are (shape, rate); the independent-RE and RW1
    pairs give a roughly [0.5, 2] prior interval for the residual odds ratio.
    """

    symptom_a: float = 1.0
    symptom_b: float = 1.0
    conc_a: float = 1.0
    conc_b: float = 1.0
    fixed_effect_var: float = 100.0
    indep_var_prior: tuple[float, float] = (0.5, 0.0015)
    rw1_var_prior: tuple[float, float] = (0.5, 0.0009)
    noise_var_prior: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self) -> None:
        vals = [self.symptom_a, self.symptom_b, self.conc_a, self.conc_b, self.fixed_effect_var]
        vals += list(self.indep_var_prior) + list(self.rw1_var_prior) + list(self.noise_var_prior)
        if any(v <= 0 for v in vals):
            raise ValueError("all hyperparameters must be positive")


@dataclass(frozen=True)
class PriorSpec:
    """Which prior governs the prevalence grid, plus the hyperparameters."""

    variant: PriorVariant
    hyper: Hyperparams = field(default_factory=Hyperparams)

    @property
    def structured(self) -> bool:
        return self.variant in STRUCTURED_VARIANTS


@dataclass(frozen=True)
class EffectLayout:
    """Column slices of the effects vector inside the design matrix."""

    n_total: int
    fixed: slice
    time: slice
    age: slice | None
    noise: slice


def full_layout(n_time: int, n_age: int) -> EffectLayout:
    d = 2 + n_time + n_age + 2 * n_time * n_age
    return EffectLayout(
        n_total=d,
        fixed=slice(0, 2),
        time=slice(2, 2 + n_time),
        age=slice(2 + n_time, 2 + n_time + n_age),
        noise=slice(2 + n_time + n_age, d),
    )


def time_only_layout(n_time: int) -> EffectLayout:
    d = 1 + 2 * n_time
    return EffectLayout(
        n_total=d,
        fixed=slice(0, 1),
        time=slice(1, 1 + n_time),
        age=None,
        noise=slice(1 + n_time, d),
    )


def build_design_matrix(n_time: int, n_age: int) -> np.ndarray:
    """0/1 design matrix mapping effects to per-stratum logits.

    Rows follow the flat stratum order (age fastest, then time, then sex);
    the sex indicator column fires for s = 1 and the trailing block is the
    identity over the per-stratum noise terms.
    """
    if n_time < 1 or n_age < 1:
        raise ValueError("grid dimensions must be >= 1")
    lay = full_layout(n_time, n_age)
    n_strata = 2 * n_time * n_age
    design = np.zeros((n_strata, lay.n_total))
    sex = np.repeat([1, 2], n_time * n_age)
    time = np.tile(np.repeat(np.arange(n_time), n_age), 2)
    age = np.tile(np.arange(n_age), 2 * n_time)
    rows = np.arange(n_strata)
    design[rows, 0] = 1.0
    design[rows[sex == 1], 1] = 1.0
    design[rows, 2 + time] = 1.0
    design[rows, 2 + n_time + age] = 1.0
    design[rows, 2 + n_time + n_age + rows] = 1.0
    return design


def build_time_only_design(n_time: int) -> np.ndarray:
    """Design matrix of the time-stratified model: intercept, time, noise."""
    lay = time_only_layout(n_time)
    design = np.zeros((n_time, lay.n_total))
    rows = np.arange(n_time)
    design[rows, 0] = 1.0
    design[rows, 1 + rows] = 1.0
    design[rows, 1 + n_time + rows] = 1.0
    return design


def rw1_precision(n: int, var: float, anchor_var: float = 100.0) -> np.ndarray:
    """First-difference precision scaled by 1/var, anchored at the first element.

    Non-singular for every n >= 1 thanks to the anchor term.
    """
    if n < 1:
        raise ValueError("block size must be >= 1")
    if n == 1:
        return np.array([[1.0 / anchor_var]])
    diff = np.diff(np.eye(n), axis=0)
    block = diff.T @ diff / var
    block[0, 0] += 1.0 / anchor_var
    return block


def build_prior_precision(
    spec: PriorSpec,
    n_time: int,
    n_age: int,
    var_time: float,
    var_age: float,
    var_noise: float,
) -> np.ndarray:
    """Block-diagonal prior precision of the full-grid effects vector."""
    if spec.variant not in (PriorVariant.FIXED, PriorVariant.INDEPENDENT, PriorVariant.RW1):
        raise ValueError(f"variant {spec.variant.value!r} has no full-grid effects vector")
    if min(var_time, var_age, var_noise) <= 0:
        raise ValueError("variances must be positive")
    fe_var = spec.hyper.fixed_effect_var
    if spec.variant is PriorVariant.FIXED:
        time_block = np.eye(n_time) / fe_var
        age_block = np.eye(n_age) / fe_var
    elif spec.variant is PriorVariant.INDEPENDENT:
        time_block = np.eye(n_time) / var_time
        age_block = np.eye(n_age) / var_age
    else:
        time_block = rw1_precision(n_time, var_time, fe_var)
        age_block = rw1_precision(n_age, var_age, fe_var)
    noise_block = np.eye(2 * n_time * n_age) / var_noise
    return block_diag(np.eye(2) / fe_var, time_block, age_block, noise_block)


def build_time_only_precision(
    spec: PriorSpec, n_time: int, var_time: float, var_noise: float
) -> np.ndarray:
    """Prior precision of the time-stratified effects vector (RW1 time block)."""
    if spec.variant is not PriorVariant.TIME_ONLY:
        raise ValueError("only the time-only variant uses this layout")
    if min(var_time, var_noise) <= 0:
        raise ValueError("variances must be positive")
    fe_var = spec.hyper.fixed_effect_var
    return block_diag(
        np.array([[1.0 / fe_var]]),
        rw1_precision(n_time, var_time, fe_var),
        np.eye(n_time) / var_noise,
    )


def rw1_variance_posterior(effects, prior: tuple[float, float] = (0.5, 0.0009)):
    """Inverse-Gamma (shape, rate) of a random-walk variance given its effects."""
    a = np.asarray(effects, dtype=float)
    if a.size < 2:
        raise ValueError("random-walk variance update needs at least 2 effects")
    shape = (a.size - 1) / 2.0 + prior[0]
    rate = np.sum(np.diff(a) ** 2) / 2.0 + prior[1]
    return shape, rate


def independent_variance_posterior(effects, prior: tuple[float, float] = (0.5, 0.0015)):
    """Inverse-Gamma (shape, rate) of an independent-effects variance."""
    a = np.asarray(effects, dtype=float)
    shape = a.size / 2.0 + prior[0]
    rate = np.sum(a**2) / 2.0 + prior[1]
    return shape, rate


def noise_variance_posterior(noise, prior: tuple[float, float] = (0.5, 0.5)):
    """Inverse-Gamma (shape, rate) of the unstructured interaction variance."""
    e = np.asarray(noise, dtype=float)
    shape = e.size / 2.0 + prior[0]
    rate = np.sum(e**2) / 2.0 + prior[1]
    return shape, rate


def sample_inverse_gamma(shape: float, rate: float, rng: np.random.Generator) -> float:
    return float(1.0 / rng.gamma(shape, 1.0 / rate))


def sample_variance_rw1(effects, rng, prior=(0.5, 0.0009)) -> float:
    return sample_inverse_gamma(*rw1_variance_posterior(effects, prior), rng)


def sample_variance_independent(effects, rng, prior=(0.5, 0.0015)) -> float:
    return sample_inverse_gamma(*independent_variance_posterior(effects, prior), rng)


def sample_variance_epsilon(noise, rng, prior=(0.5, 0.5)) -> float:
    return sample_inverse_gamma(*noise_variance_posterior(noise, prior), rng)
