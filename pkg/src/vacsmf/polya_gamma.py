"""Pólya-Gamma PG(b, c) random variates for integer shape b.

Unit-shape draws use the exact alternating-series accept/reject scheme
(inverse-Gaussian / exponential proposal split at 0.64); shapes up to
``EXACT_SHAPE_LIMIT`` are sums of unit-shape draws, and larger shapes use a
moment-matched Gaussian truncated to the positive half line. Everything is
vectorized over flat arrays so Gibbs updates over many strata stay cheap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

#: series/inverse-Gaussian proposal split point of the exact sampler
TRUNC_POINT = 0.64
#: largest shape sampled exactly as a sum of unit-shape draws
EXACT_SHAPE_LIMIT = 30
#: below this |c|, moments switch to their Taylor expansions around c = 0
_SMALL_C = 1e-4
_MAX_SERIES_TERMS = 1000


@dataclass(frozen=True)
class PgParams:
    """Parameters of one PG(b, c) draw: integer shape b >= 1, real tilt c."""

    b: int
    c: float

    def __post_init__(self) -> None:
        if int(self.b) != self.b or self.b < 1:
            raise ValueError(f"PG shape b must be a positive integer, got {self.b}")
        if not np.isfinite(self.c):
            raise ValueError("PG tilt c must be finite")

    def mean(self) -> float:
        return float(pg_mean(self.b, self.c))

    def var(self) -> float:
        return float(pg_var(self.b, self.c))


def pg_mean(b, c):
    """E[PG(b, c)] = (b / 2c) tanh(c / 2), with the limit b / 4 at c = 0."""
    b, c = np.broadcast_arrays(np.asarray(b, float), np.asarray(c, float))
    out = np.empty_like(c)
    small = np.abs(c) < _SMALL_C
    cs, cl = c[small], c[~small]
    out[small] = b[small] / 4.0 * (1.0 - cs * cs / 12.0)
    out[~small] = b[~small] * np.tanh(cl / 2.0) / (2.0 * cl)
    return float(out) if out.ndim == 0 else out


def pg_var(b, c):
    """Var[PG(b, c)] = b (sinh c - c) sech^2(c/2) / (4 c^3); b / 24 at c = 0."""
    b, c = np.broadcast_arrays(np.asarray(b, float), np.asarray(c, float))
    out = np.empty_like(c)
    small = np.abs(c) < _SMALL_C
    cs, cl = c[small], c[~small]
    out[small] = b[small] / 24.0 * (1.0 - cs * cs / 5.0)
    sech2 = 1.0 / np.cosh(cl / 2.0) ** 2
    out[~small] = b[~small] * (np.sinh(cl) - cl) * sech2 / (4.0 * cl**3)
    return float(out) if out.ndim == 0 else out


def sample_pg(params: PgParams, rng: np.random.Generator) -> float:
    """One draw from PG(b, c); strictly positive."""
    return float(draw_pg(np.array([params.b]), np.array([params.c]), rng)[0])


def draw_pg(b, c, rng: np.random.Generator) -> np.ndarray:
    """Element-wise PG(b_i, c_i) draws for integer shapes b_i >= 1."""
    b = np.atleast_1d(np.asarray(b))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    b, c = np.broadcast_arrays(b, c)
    b = b.astype(np.int64)
    if np.any(b < 1):
        raise ValueError("PG shape b must be >= 1 for every element")
    out = np.empty(b.shape, dtype=float)
    small = b <= EXACT_SHAPE_LIMIT
    if small.any():
        bs, cs = b[small], c[small]
        unit = _pg1_draws(np.repeat(cs, bs), rng)
        offsets = np.concatenate(([0], np.cumsum(bs)[:-1]))
        out[small] = np.add.reduceat(unit, offsets)
    if (~small).any():
        bl, cl = b[~small], c[~small]
        mean = pg_mean(bl, cl)
        sd = np.sqrt(pg_var(bl, cl))
        x = rng.normal(mean, sd)
        while np.any(x <= 0.0):  # PG support is (0, inf)
            bad = x <= 0.0
            x[bad] = rng.normal(mean[bad], sd[bad])
        out[~small] = x
    return out


def _pg1_draws(c: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exact PG(1, c_i) draws via the alternating-series accept/reject scheme."""
    z = 0.5 * np.abs(np.asarray(c, dtype=float).ravel())
    out = np.empty_like(z)
    todo = np.arange(z.size)
    while todo.size:
        zz = z[todo]
        x = _proposal(zz, rng)
        ok = _series_accept(x, rng)
        out[todo[ok]] = x[ok]
        todo = todo[~ok]
    return 0.25 * out


def _proposal(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Mixture proposal: truncated exponential right tail, inverse-Gaussian left."""
    t = TRUNC_POINT
    rate = np.pi**2 / 8.0 + 0.5 * z * z
    p = np.pi / (2.0 * rate) * np.exp(-rate * t)
    rt = np.sqrt(1.0 / t)
    # inverse-Gaussian cdf at t with mean 1/z, shape 1 (z = 0 handled via t*z)
    term1 = ndtr(rt * (t * z - 1.0))
    term2 = np.exp(2.0 * z + log_ndtr(-rt * (t * z + 1.0)))
    q = 2.0 * np.exp(-z) * (term1 + term2)
    total = p + q
    ratio = np.divide(p, total, out=np.zeros_like(p), where=total > 0.0)
    tail = rng.random(z.size) < ratio
    x = np.empty_like(z)
    if tail.any():
        x[tail] = t + rng.exponential(size=int(tail.sum())) / rate[tail]
    if (~tail).any():
        x[~tail] = _trunc_inv_gauss(z[~tail], rng)
    return x


def _trunc_inv_gauss(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Inverse-Gaussian(1/z, 1) draws truncated to (0, TRUNC_POINT]."""
    t = TRUNC_POINT
    x = np.empty_like(z)
    big_mean = z < 1.0 / t  # mean 1/z above the truncation point (incl. z = 0)
    idx = np.where(big_mean)[0]
    while idx.size:
        e1 = rng.exponential(size=idx.size)
        e2 = rng.exponential(size=idx.size)
        cand = t / (1.0 + t * e1) ** 2
        accept = (e1 * e1 <= 2.0 * e2 / t) & (
            rng.random(idx.size) <= np.exp(-0.5 * cand * z[idx] ** 2)
        )
        x[idx[accept]] = cand[accept]
        idx = idx[~accept]
    idx = np.where(~big_mean)[0]
    while idx.size:
        mu = 1.0 / z[idx]
        y = rng.standard_normal(idx.size) ** 2
        muy = mu * y
        # smaller root of the IG transform, computed in its stable form
        cand = mu / (1.0 + 0.5 * muy + 0.5 * np.sqrt(4.0 * muy + muy * muy))
        flip = rng.random(idx.size) > mu / (mu + cand)
        cand[flip] = mu[flip] ** 2 / cand[flip]
        accept = cand <= t
        x[idx[accept]] = cand[accept]
        idx = idx[~accept]
    return x


def _series_coef(n: int, x: np.ndarray) -> np.ndarray:
    t = TRUNC_POINT
    half = n + 0.5
    out = np.empty_like(x)
    left = x <= t
    xl = x[left]
    out[left] = np.pi * half * (2.0 / (np.pi * xl)) ** 1.5 * np.exp(-2.0 * half**2 / xl)
    xr = x[~left]
    out[~left] = np.pi * half * np.exp(-0.5 * half**2 * np.pi**2 * xr)
    return out


def _series_accept(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Alternating partial-sum test; the sums bracket the target density."""
    s = _series_coef(0, x)
    y = rng.random(x.size) * s
    accepted = np.zeros(x.size, dtype=bool)
    decided = np.zeros(x.size, dtype=bool)
    for n in range(1, _MAX_SERIES_TERMS):
        live = np.where(~decided)[0]
        if live.size == 0:
            break
        coef = _series_coef(n, x[live])
        if n % 2 == 1:
            s[live] -= coef
            hit = y[live] <= s[live]
            accepted[live[hit]] = True
        else:
            s[live] += coef
            hit = y[live] > s[live]
        decided[live[hit]] = True
    if not decided.all():  # series numerically exhausted; partial sums converged
        rest = ~decided
        accepted[rest] = y[rest] <= s[rest]
    return accepted
