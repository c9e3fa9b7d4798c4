"""Jitted inner loops of the Gibbs sweep.

The cause-imputation/class-assignment kernel fuses the per-record mixture
scores, the two log-sum-exps, and both categorical draws into one pass over
the data; the count kernel accumulates the sufficient statistics for the
symptom-profile and stick updates. Both are deterministic functions of their
inputs (uniform variates are drawn by the caller).
"""
from __future__ import annotations

import numpy as np
from numba import njit

# value-safe subset: keeps NaN/inf semantics, allows contraction/vectorization
_FASTMATH = {"contract", "reassoc", "nsz", "arcp"}


@njit(cache=True, fastmath=_FASTMATH, inline="always")
def _scores_row_dense(u_row, diff, base, lw_row, out):
    """Fully observed rows: score_k = base_k + lw_k + sum_j u_j * diff_kj.

    Writes exp(score - max) into ``out`` and returns the log-sum-exp.
    """
    n_classes, p = diff.shape
    m = -np.inf
    for k in range(n_classes):
        acc = base[k] + lw_row[k]
        for j in range(p):
            acc += u_row[j] * diff[k, j]
        out[k] = acc
        if acc > m:
            m = acc
    total = 0.0
    for k in range(n_classes):
        out[k] = np.exp(out[k] - m)
        total += out[k]
    return m + np.log(total)


@njit(cache=True, fastmath=_FASTMATH, inline="always")
def _scores_row_masked(u_row, w_row, lp, lq, lw_row, out):
    """General rows: missing entries have u_j = w_j = 0 and drop out."""
    n_classes, p = lp.shape
    m = -np.inf
    for k in range(n_classes):
        acc = lw_row[k]
        for j in range(p):
            acc += u_row[j] * lp[k, j] + w_row[j] * lq[k, j]
        out[k] = acc
        if acc > m:
            m = acc
    total = 0.0
    for k in range(n_classes):
        out[k] = np.exp(out[k] - m)
        total += out[k]
    return m + np.log(total)


@njit(cache=True, fastmath=_FASTMATH)
def impute_and_assign(
    u_obs,        # (n, p) float64: observed-and-positive indicator
    w_obs,        # (n, p) float64: observed-and-negative indicator
    dense,        # bool: no missing entries anywhere
    lp,           # (2, K, p) float64: log symptom probabilities
    lq,           # (2, K, p) float64: log complements
    diff,         # (2, K, p) float64: lp - lq (dense path)
    base,         # (2, K) float64: row sums of lq (dense path)
    lw_rows,      # (2, G, K) float64: log class weights, stratum-major
    g_lat,        # (n,) int64: latent stratum per record
    logit_prev,   # (n,) float64: prior log-odds of cause 1 (may be +-inf)
    verified,     # (n,) bool
    u_cause,      # (n,) float64 uniforms (used for unverified records)
    u_class,      # (n,) float64 uniforms
    cause,        # (n,) int8, in/out: verified entries are never written
    classes,      # (n,) int64, out
    prob_one,     # (n,) float64, out: P(cause=1 | rest); NaN for verified
):
    n = u_obs.shape[0]
    n_classes = lp.shape[1]
    w0 = np.empty(n_classes)
    w1 = np.empty(n_classes)
    for i in range(n):
        g = g_lat[i]
        u_row = u_obs[i]
        w_row = w_obs[i]
        if not verified[i]:
            if dense:
                ll0 = _scores_row_dense(u_row, diff[0], base[0], lw_rows[0, g], w0)
                ll1 = _scores_row_dense(u_row, diff[1], base[1], lw_rows[1, g], w1)
            else:
                ll0 = _scores_row_masked(u_row, w_row, lp[0], lq[0], lw_rows[0, g], w0)
                ll1 = _scores_row_masked(u_row, w_row, lp[1], lq[1], lw_rows[1, g], w1)
            d = logit_prev[i] + ll1 - ll0
            if d >= 0.0:
                p1 = 1.0 / (1.0 + np.exp(-d))
            else:
                ed = np.exp(d)
                p1 = ed / (1.0 + ed)
            prob_one[i] = p1
            cause[i] = 1 if u_cause[i] < p1 else 0
            chosen = w1 if cause[i] == 1 else w0
        else:
            prob_one[i] = np.nan
            c = cause[i]
            chosen = w1 if c == 1 else w0
            if dense:
                _scores_row_dense(u_row, diff[c], base[c], lw_rows[c, g], chosen)
            else:
                _scores_row_masked(u_row, w_row, lp[c], lq[c], lw_rows[c, g], chosen)
        total = 0.0
        for k in range(n_classes):
            total += chosen[k]
        u = u_class[i] * total
        acc = 0.0
        pick = n_classes - 1
        for k in range(n_classes):
            acc += chosen[k]
            if u <= acc:
                pick = k
                break
        classes[i] = pick
    return


@njit(cache=True)
def accumulate_counts(
    u_obs,       # (n, p) float64
    w_obs,       # (n, p) float64
    cause,       # (n,) int8
    classes,     # (n,) int64
    g_lat,       # (n,) int64
    ones_count,  # (2, K, p) float64, out
    zero_count,  # (2, K, p) float64, out
    member,      # (2, K, G) int64, out: per-stratum class membership
):
    n, p = u_obs.shape
    ones_count[:] = 0.0
    zero_count[:] = 0.0
    member[:] = 0
    for i in range(n):
        c = cause[i]
        k = classes[i]
        member[c, k, g_lat[i]] += 1
        for j in range(p):
            ones_count[c, k, j] += u_obs[i, j]
            zero_count[c, k, j] += w_obs[i, j]
    return
