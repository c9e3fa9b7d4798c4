"""Latent class mixture densities and logit-scale helpers.

The measurement model for one death with cause ``c`` in stratum ``g`` is a
K-component mixture of independent Bernoulli symptom profiles: the profile
probabilities are shared across strata while the mixture weights are
stratum-specific and built by stick-breaking. Missing symptom entries are
dropped from the likelihood (missing at random); all mixture computations
run in log space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .records import MISSING


def inv_logit(r):
    """Logistic function 1 / (1 + exp(-r)); saturates smoothly for large |r|."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    pos = r >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-r[pos]))
    e = np.exp(r[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if out.ndim == 0 else out


def logit(p):
    """Inverse of :func:`inv_logit`; requires p strictly inside (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("logit requires values strictly inside (0, 1)")
    out = np.log(p) - np.log1p(-p)
    return float(out) if out.ndim == 0 else out


def stick_breaking_weights(sticks) -> np.ndarray:
    """Turn stick lengths V into mixture weights w_k = V_k * prod_{l<k}(1 - V_l).

    The last stick must be exactly 1 so the weights form a simplex.
    """
    v = np.asarray(sticks, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("sticks must be a non-empty 1-d vector")
    if v[-1] != 1.0:
        raise ValueError("last stick must be exactly 1")
    if np.any(v <= 0.0) or np.any(v > 1.0):
        raise ValueError("sticks must lie in (0, 1]")
    prefix = np.concatenate(([1.0], np.cumprod(1.0 - v[:-1])))
    return v * prefix


def sticks_from_weights(weights) -> np.ndarray:
    """Recover stick lengths from a weight simplex (inverse of stick breaking).

    Undefined once the remaining mass hits zero; raises in that case.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d vector")
    remaining = 1.0 - np.concatenate(([0.0], np.cumsum(w[:-1])))
    if np.any(remaining <= 0.0):
        raise ValueError("weights concentrate before the last stick; sticks undefined")
    v = w / remaining
    v[-1] = 1.0
    return v


def batch_stick_weights(sticks: np.ndarray) -> np.ndarray:
    """Stick-breaking along axis 1 of a (..., K, ...) stick array.

    ``sticks`` has shape (C, K, G); the K-th stick must be 1 in every slice.
    """
    one_minus = 1.0 - sticks
    prefix = np.ones_like(sticks)
    prefix[:, 1:, :] = np.cumprod(one_minus[:, :-1, :], axis=1)
    return sticks * prefix


@dataclass
class LatentClassParams:
    """Mixture parameters shared by the sampler, simulator, and evaluator.

    symptom_probs : (2, K, p) response probabilities, strictly inside (0, 1)
    sticks        : (2, K, G) stick lengths with the K-th stick fixed at 1
    class_weights : (2, K, G) weights derived from the sticks
    stick_conc    : (2, G) positive stick-breaking concentrations
    """

    symptom_probs: np.ndarray
    sticks: np.ndarray
    class_weights: np.ndarray
    stick_conc: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.symptom_probs.shape[1]

    @property
    def n_symptoms(self) -> int:
        return self.symptom_probs.shape[2]

    @property
    def n_strata(self) -> int:
        return self.class_weights.shape[2]

    @classmethod
    def from_sticks(cls, symptom_probs, sticks, stick_conc) -> "LatentClassParams":
        weights = batch_stick_weights(np.asarray(sticks, dtype=float))
        return cls(
            symptom_probs=np.asarray(symptom_probs, dtype=float),
            sticks=np.asarray(sticks, dtype=float),
            class_weights=weights,
            stick_conc=np.asarray(stick_conc, dtype=float),
        )

    def validate(self) -> None:
        phi, v, w, conc = self.symptom_probs, self.sticks, self.class_weights, self.stick_conc
        if phi.ndim != 3 or phi.shape[0] != 2:
            raise ValueError("symptom_probs must have shape (2, K, p)")
        if v.shape != (2, self.n_classes, self.n_strata):
            raise ValueError("sticks must have shape (2, K, G)")
        if w.shape != v.shape or conc.shape != (2, self.n_strata):
            raise ValueError("inconsistent parameter shapes")
        if np.any(phi <= 0.0) or np.any(phi >= 1.0):
            raise ValueError("symptom probabilities must lie strictly inside (0, 1)")
        if np.any(v <= 0.0) or np.any(v > 1.0) or np.any(v[:, -1, :] != 1.0):
            raise ValueError("sticks must lie in (0, 1] with the last stick exactly 1")
        if np.any(conc <= 0.0):
            raise ValueError("stick concentrations must be positive")
        if np.any(w < 0.0) or np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError("class weights must form a simplex per (cause, stratum)")


def encode_symptoms(x) -> np.ndarray:
    """Normalize a symptom vector (0/1 with None or NaN for missing) to int8."""
    if isinstance(x, np.ndarray) and x.dtype == np.int8:
        return x
    vals = []
    for v in np.asarray(x, dtype=object).ravel():
        if v is None or (isinstance(v, float) and np.isnan(v)):
            vals.append(MISSING)
        else:
            vals.append(int(v))
    return np.asarray(vals, dtype=np.int8)


def class_logliks(x, cause: int, params: LatentClassParams) -> np.ndarray:
    """Per-class log-likelihood of the observed symptom entries, shape (K,)."""
    xe = encode_symptoms(x)
    phi = params.symptom_probs[cause]
    if xe.size != phi.shape[1]:
        raise ValueError(f"symptom vector length {xe.size} != configured p={phi.shape[1]}")
    obs = xe != MISSING
    with np.errstate(divide="ignore"):
        lp = np.log(phi[:, obs])
        lq = np.log1p(-phi[:, obs])
    xo = xe[obs].astype(float)
    return lp @ xo + lq @ (1.0 - xo)


def symptom_loglik(x, cause: int, stratum: int, params: LatentClassParams) -> float:
    """Log p(symptoms | cause, stratum): log-sum-exp over latent classes.

    Missing entries contribute nothing; an all-missing vector gives log(1) = 0.
    """
    per_class = class_logliks(x, cause, params)
    with np.errstate(divide="ignore"):
        logw = np.log(params.class_weights[cause, :, stratum])
    terms = logw + per_class
    m = terms.max()
    if not np.isfinite(m):
        return -np.inf
    return float(m + np.log(np.exp(terms - m).sum()))


@dataclass
class RegressionState:
    """Logit-scale linear-model state: effects vector and its variance params.

    The effects layout is (intercept, sex, time effects, age effects,
    per-stratum noise); derived quantities come from a design matrix.
    """

    effects: np.ndarray
    var_time: float
    var_age: float
    var_noise: float

    def linear_predictor(self, design: np.ndarray) -> np.ndarray:
        return design @ self.effects

    def prevalence(self, design: np.ndarray) -> np.ndarray:
        return inv_logit(self.linear_predictor(design))


@dataclass
class ModelState:
    """All latent quantities of one sampler iteration.

    ``cause`` holds observed values (never modified) where a record is
    verified and the current imputation elsewhere; ``prevalence`` is flat in
    the model's own stratification (full grid, time-only, or pooled).
    """

    cause: np.ndarray
    class_assign: np.ndarray
    params: LatentClassParams
    regression: RegressionState | None
    prevalence: np.ndarray
