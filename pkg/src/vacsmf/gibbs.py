"""Blocked Gibbs sampler for the partially verified latent class model.

Each sweep runs, in order: cause imputation for unverified records, latent
class assignment, the prevalence update (Pólya-Gamma-augmented Gaussian draw
of the logit-scale effects for structured variants, conjugate Beta draws for
the baselines), symptom-profile Beta updates, stick updates, stick
concentration updates, and the variance updates. Verified causes are never
modified. One chain is inherently sequential; multiple chains use
independent streams spawned from the master seed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from ._kernels import accumulate_counts, impute_and_assign
from .model import (
    LatentClassParams,
    ModelState,
    RegressionState,
    batch_stick_weights,
    class_logliks,
    inv_logit,
    symptom_loglik,
)
from .polya_gamma import draw_pg
from .priors import (
    PriorSpec,
    PriorVariant,
    build_design_matrix,
    build_prior_precision,
    build_time_only_design,
    build_time_only_precision,
    sample_variance_epsilon,
    sample_variance_independent,
    sample_variance_rw1,
    time_only_layout,
    full_layout,
)
from .records import MISSING, Dataset

_OPEN_EPS = 1e-12


def _clip_open(x: np.ndarray) -> np.ndarray:
    """Numerical guard keeping probability draws strictly inside (0, 1)."""
    return np.clip(x, _OPEN_EPS, 1.0 - _OPEN_EPS)


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1)
    return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


@dataclass(frozen=True)
class ChainConfig:
    """MCMC run settings."""

    iterations: int = 8000
    burnin: int = 3000
    n_classes: int = 10
    thin: int = 1
    seed: int = 0
    chains: int = 1

    def __post_init__(self) -> None:
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if not 0 <= self.burnin < self.iterations:
            raise ValueError("need 0 <= burnin < iterations")
        if self.thin < 1 or self.chains < 1:
            raise ValueError("thin and chains must be >= 1")

    @property
    def kept_per_chain(self) -> int:
        return len(range(self.burnin, self.iterations, self.thin))


@dataclass
class PosteriorDraws:
    """Retained post-burn-in draws with chain metadata.

    ``prevalence`` is always broadcast to the full (2, T, A) grid regardless
    of the variant's own stratification; ``effects``/``variances`` are None
    for the conjugate baselines (no logit-scale linear model).
    """

    variant: PriorVariant
    config: ChainConfig
    n_time: int
    n_age: int
    chain: np.ndarray
    iteration: np.ndarray
    prevalence: np.ndarray            # (M, 2, T, A)
    effects: np.ndarray | None        # (M, d)
    variances: np.ndarray | None      # (M, 3): time, age, noise (NaN if unused)
    symptom_probs: np.ndarray         # (M, 2, K, p_model)
    class_weights: np.ndarray         # (M, 2, K, G_latent)
    n_grid: np.ndarray                # (2, T, A) record counts
    n_unverified_grid: np.ndarray     # (2, T, A)

    @property
    def n_draws(self) -> int:
        return self.prevalence.shape[0]

    def prevalence_mean(self) -> np.ndarray:
        return self.prevalence.mean(axis=0)

    def prevalence_interval(self, level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
        tail = (1.0 - level) / 2.0
        lo = np.quantile(self.prevalence, tail, axis=0)
        hi = np.quantile(self.prevalence, 1.0 - tail, axis=0)
        return lo, hi


@dataclass
class SamplerState:
    """Mutable state of one chain; arrays are owned by the chain."""

    cause: np.ndarray
    class_assign: np.ndarray
    symptom_probs: np.ndarray
    sticks: np.ndarray
    class_weights: np.ndarray
    stick_conc: np.ndarray
    prevalence: np.ndarray
    effects: np.ndarray | None
    var_time: float
    var_age: float
    var_noise: float

    def latent_params(self) -> LatentClassParams:
        return LatentClassParams(
            symptom_probs=self.symptom_probs,
            sticks=self.sticks,
            class_weights=self.class_weights,
            stick_conc=self.stick_conc,
        )

    def snapshot(self) -> ModelState:
        """Immutable public view of the current iteration's latent quantities."""
        regression = None
        if self.effects is not None:
            regression = RegressionState(
                effects=self.effects.copy(),
                var_time=self.var_time,
                var_age=self.var_age,
                var_noise=self.var_noise,
            )
        return ModelState(
            cause=self.cause.copy(),
            class_assign=self.class_assign.copy(),
            params=self.latent_params(),
            regression=regression,
            prevalence=self.prevalence.copy(),
        )


# ---------------------------------------------------------------------------
# record-level conditionals (the vectorized sweep reproduces these exactly)


def cause_posterior_prob(symptoms, stratum: int, prevalence: float,
                         params: LatentClassParams) -> float:
    """P(cause = 1 | symptoms, stratum): prior odds times mixture likelihood ratio."""
    if prevalence >= 1.0:
        return 1.0
    if prevalence <= 0.0:
        return 0.0
    ll1 = symptom_loglik(symptoms, 1, stratum, params)
    ll0 = symptom_loglik(symptoms, 0, stratum, params)
    logodds = np.log(prevalence) - np.log1p(-prevalence) + ll1 - ll0
    return float(inv_logit(logodds))


def sample_cause(symptoms, stratum: int, prevalence: float, params: LatentClassParams,
                 rng: np.random.Generator) -> int:
    """Impute the cause of one unverified record."""
    return int(rng.random() < cause_posterior_prob(symptoms, stratum, prevalence, params))


def class_posterior_probs(symptoms, cause: int, stratum: int,
                          params: LatentClassParams) -> np.ndarray:
    """Posterior class membership probabilities given the (current) cause."""
    per_class = class_logliks(symptoms, cause, params)
    with np.errstate(divide="ignore"):
        logw = np.log(params.class_weights[cause, :, stratum])
    terms = logw + per_class
    pr = np.exp(terms - terms.max())
    return pr / pr.sum()


def sample_latent_class(symptoms, cause: int, stratum: int, params: LatentClassParams,
                        rng: np.random.Generator) -> int:
    probs = class_posterior_probs(symptoms, cause, stratum, params)
    return int((probs.cumsum() < rng.random() * probs.sum()).sum())


# ---------------------------------------------------------------------------
# block conditionals shared by the sweep and the tests


def effects_conditional(cause_counts, totals, design, prior_precision, omega):
    """Gaussian conditional of the effects given Pólya-Gamma latents.

    Returns (mean, chol) where chol is the lower Cholesky factor of the
    posterior precision ``prior_precision + design' diag(omega) design``.
    Strata with zero records must carry omega = 0 (they drop out).
    """
    cause_counts = np.asarray(cause_counts, dtype=float)
    totals = np.asarray(totals, dtype=float)
    if np.any(cause_counts > totals):
        raise ValueError("cause counts cannot exceed stratum totals")
    precision = prior_precision + (design.T * omega) @ design
    shift = design.T @ (cause_counts - totals / 2.0)
    chol = np.linalg.cholesky(precision)
    mean = cho_solve((chol, True), shift)
    return mean, chol


def sample_effects(cause_counts, totals, design, prior_precision,
                   rng: np.random.Generator, effects=None) -> np.ndarray:
    """One augmented update of the effects vector.

    Draws the Pólya-Gamma latents at the current effects (zero vector if not
    supplied), then the exact Gaussian conditional.
    """
    totals = np.asarray(totals)
    d = design.shape[1]
    if effects is None:
        effects = np.zeros(d)
    linpred = design @ effects
    omega = np.zeros(design.shape[0])
    occupied = totals > 0
    if occupied.any():
        omega[occupied] = draw_pg(totals[occupied], linpred[occupied], rng)
    mean, chol = effects_conditional(cause_counts, totals, design, prior_precision, omega)
    noise = solve_triangular(chol, rng.standard_normal(d), lower=True, trans="T")
    return mean + noise


def sample_symptom_probs(ones_count, zeros_count, a: float, b: float,
                         rng: np.random.Generator) -> np.ndarray:
    """Beta draws of the symptom profiles from observed-entry counts."""
    return _clip_open(rng.beta(a + np.asarray(ones_count, float),
                               b + np.asarray(zeros_count, float)))


def stick_posteriors(counts, conc):
    """Beta (a, b) arrays for sticks 1..K-1 given membership counts.

    a = 1 + (members of class k); b = concentration + (members of any
    later class); both per (cause, stratum).
    """
    counts = np.asarray(counts, dtype=float)
    tail = counts[:, ::-1, :].cumsum(axis=1)[:, ::-1, :] - counts
    a = 1.0 + counts[:, :-1, :]
    b = np.asarray(conc)[:, None, :] + tail[:, :-1, :]
    return a, b


def sample_sticks(counts, conc, rng: np.random.Generator):
    """Stick draws from per-(cause, class, stratum) membership counts.

    counts: (2, K, G); conc: (2, G). Returns (sticks, weights) with the last
    stick pinned at 1 and the remainder clipped into open (0, 1).
    """
    counts = np.asarray(counts, dtype=float)
    n_classes = counts.shape[1]
    sticks = np.ones_like(counts)
    if n_classes > 1:
        a, b = stick_posteriors(counts, conc)
        sticks[:, :-1, :] = _clip_open(rng.beta(a, b))
    return sticks, batch_stick_weights(sticks)


def concentration_posterior(sticks, a: float, b: float):
    """Gamma (shape, rate) of the stick concentrations given the sticks."""
    sticks = np.asarray(sticks, dtype=float)
    n_classes = sticks.shape[1]
    if n_classes > 1:
        rate = b - np.log1p(-sticks[:, :-1, :]).sum(axis=1)
    else:
        rate = np.full((sticks.shape[0], sticks.shape[2]), float(b))
    return a + n_classes - 1, rate


def sample_stick_concentration(sticks, a: float, b: float,
                               rng: np.random.Generator) -> np.ndarray:
    """Gamma draws of the stick-breaking concentrations, one per (cause, stratum)."""
    shape, rate = concentration_posterior(sticks, a, b)
    return rng.gamma(shape, 1.0 / rate)


def sample_prevalence_beta(cause_counts, totals, rng: np.random.Generator,
                           pooled: bool = False) -> np.ndarray:
    """Conjugate Beta(1 + z, 1 + n - z) prevalence draws.

    ``pooled`` collapses all strata into a single shared draw.
    """
    z = np.asarray(cause_counts, dtype=float)
    n = np.asarray(totals, dtype=float)
    if np.any(z > n):
        raise ValueError("cause counts cannot exceed stratum totals")
    if pooled:
        z, n = np.array([z.sum()]), np.array([n.sum()])
    return _clip_open(rng.beta(1.0 + z, 1.0 + n - z))


# ---------------------------------------------------------------------------


class GibbsSampler:
    """Precomputed data views plus the per-iteration sweep."""

    def __init__(self, dataset: Dataset, spec: PriorSpec, config: ChainConfig) -> None:
        self.spec = spec
        self.config = config
        arrays = dataset.arrays()
        self.n_time = dataset.n_time
        self.n_age = dataset.n_age
        self.n_symptoms = dataset.n_symptoms
        self.n = len(dataset)
        grid = dataset.grid
        self.n_grid = grid.counts
        self._verified = arrays.verified.copy()
        self._sex = arrays.sex
        self._age = arrays.age
        unv = np.zeros((2, self.n_time, self.n_age), dtype=int)
        np.add.at(unv, (arrays.sex - 1, arrays.time - 1, arrays.age - 1), ~arrays.verified)
        self.n_unverified_grid = unv

        variant = spec.variant
        if variant is PriorVariant.TIME_ONLY:
            self.g_lat = arrays.time - 1
            self.G_lat = self.n_time
            self.g_prev = self.g_lat
            self.G_prev = self.n_time
            self.design = build_time_only_design(self.n_time)
            self.layout = time_only_layout(self.n_time)
            # sex and age enter the measurement model as extra binary columns
            self._grid_map = np.broadcast_to(
                np.arange(self.n_time)[None, :, None], (2, self.n_time, self.n_age)
            )
        else:
            self.g_lat = arrays.stratum
            self.G_lat = 2 * self.n_time * self.n_age
            if variant is PriorVariant.UNSTRATIFIED:
                self.g_prev = np.zeros(self.n, dtype=np.int64)
                self.G_prev = 1
                self._grid_map = np.zeros((2, self.n_time, self.n_age), dtype=np.int64)
            else:
                self.g_prev = self.g_lat
                self.G_prev = self.G_lat
                self._grid_map = np.arange(self.G_lat).reshape(2, self.n_time, self.n_age)
            if spec.structured:
                self.design = build_design_matrix(self.n_time, self.n_age)
                self.layout = full_layout(self.n_time, self.n_age)
            else:
                self.design = None
                self.layout = None
        self.n_prev = np.bincount(self.g_prev, minlength=self.G_prev)
        self.set_observations(arrays.symptoms, arrays.cause)

        for c in (0, 1):
            if not np.any(self._cause_obs == c):
                warnings.warn(
                    f"no verified record with cause {c}; the chain starts degenerate",
                    stacklevel=2,
                )

    # -- data views ---------------------------------------------------------

    def set_observations(self, symptoms: np.ndarray, cause: np.ndarray) -> None:
        """Install symptom data and observed causes (cause ignored where unverified).

        Exists so sampler-validation harnesses can swap in freshly simulated
        data without rebuilding the design matrices.
        """
        x = np.asarray(symptoms, dtype=np.int8)
        if self.spec.variant is PriorVariant.TIME_ONLY:
            male = (self._sex == 2).astype(np.int8)[:, None]
            ages = (self._age[:, None] == np.arange(2, self.n_age + 1)[None, :]).astype(np.int8)
            x = np.concatenate([x, male, ages], axis=1)
        self._x = x
        self.p_model = x.shape[1]
        observed = x != MISSING
        self._u = (observed & (x == 1)).astype(float)
        self._w = (observed & (x == 0)).astype(float)
        self._fully_observed = bool(observed.all())
        self._cause_obs = np.where(self._verified, np.asarray(cause, dtype=np.int8), MISSING)
        self._unverified = np.where(~self._verified)[0]

    # -- state construction --------------------------------------------------

    def initial_state(self, rng: np.random.Generator) -> SamplerState:
        """Overdispersed-neutral start: verified-prevalence cause imputation,
        uniform class labels, uniform symptom profiles, zero effects."""
        K, p = self.config.n_classes, self.p_model
        ver = self._verified
        num = np.bincount(self.g_lat[ver], weights=(self._cause_obs[ver] == 1).astype(float),
                          minlength=self.G_lat)
        den = np.bincount(self.g_lat[ver], minlength=self.G_lat)
        frac = np.where(den > 0, num / np.maximum(den, 1), 0.5)
        cause = self._cause_obs.copy()
        unv = self._unverified
        cause[unv] = (rng.random(unv.size) < frac[self.g_lat[unv]]).astype(np.int8)
        class_assign = rng.integers(0, K, size=self.n)
        symptom_probs = _clip_open(rng.beta(1.0, 1.0, size=(2, K, p)))
        sticks = np.ones((2, K, self.G_lat))
        if K > 1:
            sticks[:, :-1, :] = _clip_open(rng.random((2, K - 1, self.G_lat)))
        stick_conc = np.ones((2, self.G_lat))
        if self.spec.structured:
            effects = np.zeros(self.layout.n_total)
            prevalence = inv_logit(self.design @ effects)
        else:
            effects = None
            prevalence = np.full(self.G_prev, 0.5)
        return SamplerState(
            cause=cause,
            class_assign=class_assign,
            symptom_probs=symptom_probs,
            sticks=sticks,
            class_weights=batch_stick_weights(sticks),
            stick_conc=stick_conc,
            prevalence=prevalence,
            effects=effects,
            var_time=0.01,
            var_age=0.01,
            var_noise=0.01,
        )

    def prior_state(self, rng: np.random.Generator) -> SamplerState:
        """Exact draw of all parameters from the prior (no data used)."""
        hp = self.spec.hyper
        K, p = self.config.n_classes, self.p_model
        variant = self.spec.variant
        var_time = var_age = var_noise = hp.fixed_effect_var
        if variant in (PriorVariant.RW1, PriorVariant.TIME_ONLY):
            var_time = 1.0 / rng.gamma(hp.rw1_var_prior[0], 1.0 / hp.rw1_var_prior[1])
        if variant is PriorVariant.RW1:
            var_age = 1.0 / rng.gamma(hp.rw1_var_prior[0], 1.0 / hp.rw1_var_prior[1])
        if variant is PriorVariant.INDEPENDENT:
            var_time = 1.0 / rng.gamma(hp.indep_var_prior[0], 1.0 / hp.indep_var_prior[1])
            var_age = 1.0 / rng.gamma(hp.indep_var_prior[0], 1.0 / hp.indep_var_prior[1])
        if self.spec.structured:
            var_noise = 1.0 / rng.gamma(hp.noise_var_prior[0], 1.0 / hp.noise_var_prior[1])
            precision = self._prior_precision(var_time, var_age, var_noise)
            chol = np.linalg.cholesky(precision)
            effects = solve_triangular(chol, rng.standard_normal(self.layout.n_total),
                                       lower=True, trans="T")
            prevalence = inv_logit(self.design @ effects)
        else:
            effects = None
            prevalence = _clip_open(rng.beta(1.0, 1.0, size=self.G_prev))
        symptom_probs = _clip_open(rng.beta(hp.symptom_a, hp.symptom_b, size=(2, K, p)))
        stick_conc = rng.gamma(hp.conc_a, 1.0 / hp.conc_b, size=(2, self.G_lat))
        sticks = np.ones((2, K, self.G_lat))
        if K > 1:
            sticks[:, :-1, :] = _clip_open(
                rng.beta(1.0, np.broadcast_to(stick_conc[:, None, :], (2, K - 1, self.G_lat)))
            )
        return SamplerState(
            cause=np.zeros(self.n, dtype=np.int8),
            class_assign=np.zeros(self.n, dtype=np.int64),
            symptom_probs=symptom_probs,
            sticks=sticks,
            class_weights=batch_stick_weights(sticks),
            stick_conc=stick_conc,
            prevalence=prevalence,
            effects=effects,
            var_time=float(var_time),
            var_age=float(var_age),
            var_noise=float(var_noise),
        )

    def simulate_data(self, state: SamplerState, rng: np.random.Generator):
        """Forward draw of (symptoms, causes, classes) given the state's parameters."""
        if self.spec.variant is PriorVariant.TIME_ONLY:
            raise ValueError("forward simulation undefined with dummy-augmented symptoms")
        n = self.n
        prev = state.prevalence[self.g_prev]
        cause = (rng.random(n) < prev).astype(np.int8)
        weights = state.class_weights[cause, :, self.g_lat]
        u = rng.random((n, 1)) * weights.sum(axis=1, keepdims=True)
        classes = (weights.cumsum(axis=1) < u).sum(axis=1)
        probs = state.symptom_probs[cause, classes, :]
        symptoms = (rng.random((n, self.p_model)) < probs).astype(np.int8)
        return symptoms, cause, classes

    # -- sweep ---------------------------------------------------------------

    def _mixture_terms(self, state: SamplerState):
        """(n, K) log-likelihood-plus-log-weight matrices for both causes."""
        phi = state.symptom_probs
        with np.errstate(divide="ignore"):
            lp = np.log(phi)
            lq = np.log1p(-phi)
            lw_rows = np.ascontiguousarray(np.log(state.class_weights).transpose(0, 2, 1))
        t0 = self._scores(0, lp, lq)
        t0 += lw_rows[0][self.g_lat]
        t1 = self._scores(1, lp, lq)
        t1 += lw_rows[1][self.g_lat]
        return t0, t1

    def _scores(self, cause: int, lp: np.ndarray, lq: np.ndarray) -> np.ndarray:
        """Contiguous (n, K) per-class symptom log-likelihoods for one cause."""
        if self._fully_observed:
            s = self._u @ (lp[cause] - lq[cause]).T
            s += lq[cause].sum(axis=1)
        else:
            s = self._u @ lp[cause].T
            s += self._w @ lq[cause].T
        return s

    def cause_probabilities(self, state: SamplerState, terms=None) -> np.ndarray:
        """Per-record P(cause = 1 | rest), for all records."""
        t0, t1 = self._mixture_terms(state) if terms is None else terms
        prev = state.prevalence[self.g_prev]
        with np.errstate(divide="ignore"):
            logodds = np.log(prev) - np.log1p(-prev)
        logodds = logodds + _logsumexp_rows(t1) - _logsumexp_rows(t0)
        return inv_logit(logodds)

    def class_probabilities(self, state: SamplerState, terms=None) -> np.ndarray:
        """Per-record class membership probabilities given the current causes."""
        t0, t1 = self._mixture_terms(state) if terms is None else terms
        chosen = np.where((state.cause == 1)[:, None], t1, t0)
        pr = np.exp(chosen - chosen.max(axis=1, keepdims=True))
        return pr / pr.sum(axis=1, keepdims=True)

    def impute_and_assign_step(self, state: SamplerState, u_cause: np.ndarray,
                               u_class: np.ndarray) -> np.ndarray:
        """Steps 1-2 from supplied uniforms; returns P(cause=1 | rest) per record.

        Causes are imputed with u_cause (unverified records only), classes
        assigned by inverse-cdf with u_class. Returned probabilities are NaN
        for verified records.
        """
        with np.errstate(divide="ignore"):
            lp = np.log(state.symptom_probs)
            lq = np.log1p(-state.symptom_probs)
            lw_rows = np.ascontiguousarray(np.log(state.class_weights).transpose(0, 2, 1))
            prev_logit = np.log(state.prevalence) - np.log1p(-state.prevalence)
        classes = np.empty(self.n, dtype=np.int64)
        prob_one = np.empty(self.n)
        impute_and_assign(
            self._u, self._w, self._fully_observed, lp, lq, lp - lq, lq.sum(axis=2),
            lw_rows, self.g_lat, prev_logit[self.g_prev],
            self._verified, u_cause, u_class,
            state.cause, classes, prob_one,
        )
        state.class_assign = classes
        return prob_one

    def _prior_precision(self, var_time: float, var_age: float, var_noise: float) -> np.ndarray:
        if self.spec.variant is PriorVariant.TIME_ONLY:
            return build_time_only_precision(self.spec, self.n_time, var_time, var_noise)
        return build_prior_precision(self.spec, self.n_time, self.n_age,
                                     var_time, var_age, var_noise)

    def sweep(self, state: SamplerState, rng: np.random.Generator) -> None:
        """One full Gibbs iteration, updating the state in place."""
        hp = self.spec.hyper
        K = self.config.n_classes

        # 1-2. impute unverified causes, then class assignments (fused kernel)
        self.impute_and_assign_step(state, rng.random(self.n), rng.random(self.n))

        # 3. prevalence (augmented effects draw, or conjugate Beta baselines)
        z = np.bincount(self.g_prev, weights=state.cause.astype(float), minlength=self.G_prev)
        if self.spec.structured:
            state.effects = sample_effects(
                z, self.n_prev, self.design,
                self._prior_precision(state.var_time, state.var_age, state.var_noise),
                rng, effects=state.effects,
            )
            state.prevalence = inv_logit(self.design @ state.effects)
        else:
            state.prevalence = sample_prevalence_beta(z, self.n_prev, rng)

        # 4-5. sufficient statistics, then symptom profiles, sticks, weights
        ones = np.empty((2, K, self.p_model))
        zeros = np.empty((2, K, self.p_model))
        member = np.empty((2, K, self.G_lat), dtype=np.int64)
        accumulate_counts(self._u, self._w, state.cause, state.class_assign,
                          self.g_lat, ones, zeros, member)
        state.symptom_probs = sample_symptom_probs(ones, zeros,
                                                   hp.symptom_a, hp.symptom_b, rng)
        state.sticks, state.class_weights = sample_sticks(member, state.stick_conc, rng)

        # 6. stick concentrations
        state.stick_conc = sample_stick_concentration(state.sticks, hp.conc_a, hp.conc_b, rng)

        # 7. time/age variances (skipped for the fixed-effect flavor)
        variant = self.spec.variant
        if variant in (PriorVariant.RW1, PriorVariant.TIME_ONLY):
            state.var_time = sample_variance_rw1(
                state.effects[self.layout.time], rng, hp.rw1_var_prior)
        elif variant is PriorVariant.INDEPENDENT:
            state.var_time = sample_variance_independent(
                state.effects[self.layout.time], rng, hp.indep_var_prior)
        if variant is PriorVariant.RW1:
            state.var_age = sample_variance_rw1(
                state.effects[self.layout.age], rng, hp.rw1_var_prior)
        elif variant is PriorVariant.INDEPENDENT:
            state.var_age = sample_variance_independent(
                state.effects[self.layout.age], rng, hp.indep_var_prior)

        # 8. unstructured interaction variance
        if self.spec.structured:
            state.var_noise = sample_variance_epsilon(
                state.effects[self.layout.noise], rng, hp.noise_var_prior)

    # -- full runs -----------------------------------------------------------

    def run(self) -> PosteriorDraws:
        cfg = self.config
        kept = cfg.kept_per_chain
        total = kept * cfg.chains
        K = cfg.n_classes
        variances_used = self.spec.structured
        out_prev = np.empty((total, 2, self.n_time, self.n_age))
        out_phi = np.empty((total, 2, K, self.p_model))
        out_lam = np.empty((total, 2, K, self.G_lat))
        out_eff = np.empty((total, self.layout.n_total)) if variances_used else None
        out_var = np.empty((total, 3)) if variances_used else None
        out_chain = np.empty(total, dtype=np.int64)
        out_iter = np.empty(total, dtype=np.int64)

        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
        row = 0
        for ci in range(cfg.chains):
            rng = np.random.default_rng(seeds[ci])
            state = self.initial_state(rng)
            keep_next = cfg.burnin
            for it in range(cfg.iterations):
                self.sweep(state, rng)
                if it == keep_next:
                    keep_next += cfg.thin
                    out_prev[row] = state.prevalence[self._grid_map]
                    out_phi[row] = state.symptom_probs
                    out_lam[row] = state.class_weights
                    if variances_used:
                        out_eff[row] = state.effects
                        out_var[row] = (
                            state.var_time if self.spec.variant is not PriorVariant.FIXED else np.nan,
                            state.var_age
                            if self.spec.variant in (PriorVariant.RW1, PriorVariant.INDEPENDENT)
                            else np.nan,
                            state.var_noise,
                        )
                    out_chain[row] = ci
                    out_iter[row] = it
                    row += 1
        return PosteriorDraws(
            variant=self.spec.variant,
            config=cfg,
            n_time=self.n_time,
            n_age=self.n_age,
            chain=out_chain,
            iteration=out_iter,
            prevalence=out_prev,
            effects=out_eff,
            variances=out_var,
            symptom_probs=out_phi,
            class_weights=out_lam,
            n_grid=self.n_grid,
            n_unverified_grid=self.n_unverified_grid,
        )


def run_chain(dataset: Dataset, spec: PriorSpec, config: ChainConfig) -> PosteriorDraws:
    """Run the full MCMC (all configured chains) over a validated dataset."""
    return GibbsSampler(dataset, spec, config).run()
