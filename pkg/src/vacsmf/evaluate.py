"""Posterior summaries, aggregation, scoring rules, and latent-profile tables.

Pure functions over immutable draw arrays; tabular outputs are tidy pandas
frames ready for CSV emission. No plotting here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .gibbs import PosteriorDraws


def aggregate_overall(prevalence_draws: np.ndarray, n_grid: np.ndarray) -> np.ndarray:
    """Per-draw population CSMF: count-weighted average of the stratum grid."""
    n_grid = np.asarray(n_grid, dtype=float)
    total = n_grid.sum()
    if total <= 0:
        raise ValueError("total record count must be positive")
    return np.tensordot(prevalence_draws, n_grid, axes=([1, 2, 3], [0, 1, 2])) / total


def aggregate_by_time(prevalence_draws: np.ndarray, n_grid: np.ndarray) -> np.ndarray:
    """Per-draw time-varying CSMF (M, T): weights restricted to each period."""
    n_grid = np.asarray(n_grid, dtype=float)
    per_time = n_grid.sum(axis=(0, 2))
    if np.any(per_time <= 0):
        raise ValueError("every time period needs at least one record")
    weighted = np.einsum("msta,sta->mt", prevalence_draws, n_grid)
    return weighted / per_time


def bias(estimate, truth):
    """Signed estimation error: estimate minus truth."""
    return np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)


def crps(samples, truth: float) -> float:
    """Continuous ranked probability score of an empirical predictive sample.

    Uses the O(M log M) sorted identity for E|X - X'|; exactly equal to the
    pairwise double sum with replacement.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.size
    if m < 2:
        raise ValueError("CRPS needs at least 2 samples")
    abs_err = np.abs(x - truth).mean()
    # x @ (2i - m + 1) equals the sum of |x_i - x_j| over ordered pairs, halved
    half_spread = x @ (2.0 * np.arange(m) - m + 1.0) / (m * m)
    return float(max(abs_err - half_spread, 0.0))


def crps_improvement(model_samples, baseline_samples, truth: float) -> float:
    """CRPS(baseline) - CRPS(model); positive when the model predicts better."""
    return crps(baseline_samples, truth) - crps(model_samples, truth)


def mcc(first, second) -> float:
    """Matthews correlation of two binary columns with missing entries.

    Rows missing either value are removed pairwise. Returns NaN when any
    marginal count is zero (the coefficient is undefined there).
    """
    a = np.asarray(first, dtype=float)
    b = np.asarray(second, dtype=float)
    keep = ~(np.isnan(a) | np.isnan(b))
    a, b = a[keep], b[keep]
    if a.size < 2:
        raise ValueError("MCC needs at least 2 complete pairs")
    n11 = float(np.sum((a == 1) & (b == 1)))
    n10 = float(np.sum((a == 1) & (b == 0)))
    n01 = float(np.sum((a == 0) & (b == 1)))
    n00 = float(np.sum((a == 0) & (b == 0)))
    denom = (n11 + n10) * (n11 + n01) * (n00 + n10) * (n00 + n01)
    if denom == 0.0:
        return float("nan")
    return (n11 * n00 - n10 * n01) / np.sqrt(denom)


def coverage(prevalence_draws: np.ndarray, truth_grid: np.ndarray,
             level: float = 0.95) -> float:
    """Fraction of strata whose equal-tailed credible interval contains the truth."""
    tail = (1.0 - level) / 2.0
    lo = np.quantile(prevalence_draws, tail, axis=0)
    hi = np.quantile(prevalence_draws, 1.0 - tail, axis=0)
    inside = (truth_grid >= lo) & (truth_grid <= hi)
    return float(inside.mean())


@dataclass
class CsmfEstimate:
    """Point and interval summaries of the prevalence grid and its aggregates."""

    mean: np.ndarray          # (2, T, A)
    lower: np.ndarray
    upper: np.ndarray
    overall: tuple[float, float, float]          # (mean, lower, upper)
    by_time_mean: np.ndarray                     # (T,)
    by_time_lower: np.ndarray
    by_time_upper: np.ndarray


def summarize_csmf(draws: PosteriorDraws, level: float = 0.95) -> CsmfEstimate:
    """Posterior means and equal-tailed intervals, stratum-wise and aggregated."""
    tail = (1.0 - level) / 2.0
    prev = draws.prevalence
    overall = aggregate_overall(prev, draws.n_grid)
    by_time = aggregate_by_time(prev, draws.n_grid)
    return CsmfEstimate(
        mean=prev.mean(axis=0),
        lower=np.quantile(prev, tail, axis=0),
        upper=np.quantile(prev, 1.0 - tail, axis=0),
        overall=(
            float(overall.mean()),
            float(np.quantile(overall, tail)),
            float(np.quantile(overall, 1.0 - tail)),
        ),
        by_time_mean=by_time.mean(axis=0),
        by_time_lower=np.quantile(by_time, tail, axis=0),
        by_time_upper=np.quantile(by_time, 1.0 - tail, axis=0),
    )


def latent_profile_report(draws: PosteriorDraws) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Posterior-mean symptom profiles and class-weight stacks for reporting.

    Classes are ordered within each cause by the expected number of symptoms
    of their posterior-mean profile, ascending; ``class_rank`` is 1-based.
    """
    return latent_profile_tables(
        draws.symptom_probs.mean(axis=0),
        draws.class_weights.mean(axis=0),
        draws.n_time,
        draws.n_age,
    )


def latent_profile_tables(phi: np.ndarray, lam: np.ndarray, n_time: int,
                          n_age: int) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Profile/weight tables from posterior-mean arrays (see latent_profile_report)."""
    n_symptoms = phi.shape[2]
    profile_rows = []
    weight_rows = []
    for c in (0, 1):
        order = np.argsort(phi[c].sum(axis=1), kind="stable")
        for rank, k in enumerate(order, start=1):
            for j in range(n_symptoms):
                profile_rows.append(
                    {"cause": c, "class_rank": rank, "source_class": int(k) + 1,
                     "symptom": j + 1, "probability": phi[c, k, j]}
                )
            if lam.shape[2] == 2 * n_time * n_age:
                grid = lam[c, k].reshape(2, n_time, n_age)
                for s in (1, 2):
                    for t in range(1, n_time + 1):
                        for a in range(1, n_age + 1):
                            weight_rows.append(
                                {"cause": c, "class_rank": rank,
                                 "source_class": int(k) + 1, "sex": s, "time": t,
                                 "age": a, "weight": grid[s - 1, t - 1, a - 1]}
                            )
            else:  # time-only stratification
                for t in range(1, lam.shape[2] + 1):
                    weight_rows.append(
                        {"cause": c, "class_rank": rank, "source_class": int(k) + 1,
                         "sex": 0, "time": t, "age": 0, "weight": lam[c, k, t - 1]}
                    )
    return pd.DataFrame(profile_rows), pd.DataFrame(weight_rows)
