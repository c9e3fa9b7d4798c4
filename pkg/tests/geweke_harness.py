"""Joint-distribution validation of the Gibbs sweep (successive-conditional
vs marginal-conditional moment comparison).

The marginal-conditional sampler draws parameters from the prior; the
successive-conditional sampler alternates one full Gibbs sweep with a
forward redraw of the data (and its latent labels) given the current
parameters. If every conditional in the sweep is correct, both samplers
target the same joint distribution, so the moments of any bounded test
function must agree up to Monte Carlo error.
"""
from __future__ import annotations

import numpy as np

from vacsmf.gibbs import ChainConfig, GibbsSampler, SamplerState
from vacsmf.priors import PriorSpec, PriorVariant
from vacsmf.records import Dataset

#: number of tracked scalar test functions
N_TRACKED = 14


def tiny_dataset(n_time: int = 3, n_age: int = 2, n_per_stratum: int = 20,
                 n_symptoms: int = 3) -> Dataset:
    """Balanced placeholder dataset with a fixed half-verified pattern.

    Symptom and cause values are placeholders; harness runs overwrite them
    with simulated data every sweep. The verification pattern is part of the
    design and never changes.
    """
    rows_per = n_per_stratum
    n = 2 * n_time * n_age * rows_per
    sex = np.repeat([1, 2], n_time * n_age * rows_per)
    time = np.tile(np.repeat(np.arange(1, n_time + 1), n_age * rows_per), 2)
    age = np.tile(np.repeat(np.arange(1, n_age + 1), rows_per), 2 * n_time)
    verified = np.tile(np.arange(rows_per) < rows_per // 2, 2 * n_time * n_age)
    cause = np.where(verified, 0, -1).astype(np.int8)
    symptoms = np.zeros((n, n_symptoms), dtype=np.int8)
    return Dataset.from_arrays(sex=sex, time=time, age=age, verified=verified,
                               cause=cause, symptoms=symptoms,
                               n_time=n_time, n_age=n_age)


def tracked_scalars(sampler: GibbsSampler, state: SamplerState) -> np.ndarray:
    """14 bounded test functions: 10 prevalence entries, the three variances
    mapped through v/(1+v) (their Inv-Gamma priors have no finite mean), and
    the mean symptom probability."""
    prev = state.prevalence[sampler._grid_map].ravel()[:10]
    squash = lambda v: v / (1.0 + v)
    return np.array([
        *prev,
        squash(state.var_time),
        squash(state.var_age),
        squash(state.var_noise),
        state.symptom_probs.mean(),
    ])


def marginal_conditional(sampler: GibbsSampler, n_draws: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty((n_draws, N_TRACKED))
    for i in range(n_draws):
        out[i] = tracked_scalars(sampler, sampler.prior_state(rng))
    return out


def successive_conditional(sampler: GibbsSampler, n_draws: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    state = sampler.prior_state(rng)
    symptoms, cause, classes = sampler.simulate_data(state, rng)
    sampler.set_observations(symptoms, cause)
    state.cause = cause
    state.class_assign = classes
    out = np.empty((n_draws, N_TRACKED))
    for i in range(n_draws):
        sampler.sweep(state, rng)
        out[i] = tracked_scalars(sampler, state)
        symptoms, cause, classes = sampler.simulate_data(state, rng)
        sampler.set_observations(symptoms, cause)
        state.cause = cause
        state.class_assign = classes
    return out


def batch_means_se(chain: np.ndarray, n_batches: int = 100) -> np.ndarray:
    """Batch-means standard error of the mean, per column."""
    n = chain.shape[0]
    batch = n // n_batches
    trimmed = chain[: batch * n_batches]
    means = trimmed.reshape(n_batches, batch, -1).mean(axis=1)
    return means.std(axis=0, ddof=1) / np.sqrt(n_batches)


def initial_sequence_se(chain: np.ndarray) -> np.ndarray:
    """Geyer initial-monotone-sequence standard error of the mean, per column.

    Consistent for strongly autocorrelated chains, where short fixed batches
    understate the error; the chain-variance estimate sums adjacent-lag
    autocovariance pairs while they stay positive and non-increasing.
    """
    n, k = chain.shape
    out = np.empty(k)
    size = 1 << (2 * n - 1).bit_length()
    for j in range(k):
        centered = chain[:, j] - chain[:, j].mean()
        f = np.fft.rfft(centered, size)
        acov = np.fft.irfft(f * np.conj(f), size)[:n] / n
        if acov[0] <= 0:
            out[j] = 0.0
            continue
        var = -acov[0]
        prev_pair = np.inf
        for m in range(n // 2 - 1):
            pair = acov[2 * m] + acov[2 * m + 1]
            if pair <= 0:
                break
            pair = min(pair, prev_pair)
            prev_pair = pair
            var += 2.0 * pair
        out[j] = np.sqrt(max(var, 0.0) / n)
    return out


def geweke_z_scores(n_iter: int = 100_000, seed: int = 0,
                    variant: PriorVariant = PriorVariant.RW1,
                    hyper=None) -> np.ndarray:
    """z-scores comparing the two samplers' means for all tracked functions."""
    dataset = tiny_dataset()
    config = ChainConfig(iterations=10, burnin=0, n_classes=2, seed=seed)
    spec = PriorSpec(variant) if hyper is None else PriorSpec(variant, hyper)
    sampler = GibbsSampler(dataset, spec, config)
    mc = marginal_conditional(sampler, n_iter, seed=seed + 1)
    sc = successive_conditional(sampler, n_iter, seed=seed + 2)
    se_mc = mc.std(axis=0, ddof=1) / np.sqrt(mc.shape[0])
    se_sc = initial_sequence_se(sc)
    return (mc.mean(axis=0) - sc.mean(axis=0)) / np.sqrt(se_mc**2 + se_sc**2)
