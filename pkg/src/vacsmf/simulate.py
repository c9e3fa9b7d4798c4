"""Synthetic populations, verification mechanisms, and stratified resampling.

Fully synthetic populations follow the same latent class model the sampler
fits: a smooth logit-scale trend gives the true per-stratum prevalence, and
causes, class labels, and symptoms are drawn top-down. Verification then
masks causes with a record-level probability that depends on time, age, a
few active symptoms, and (in the non-ignorable case) the cause itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import batch_stick_weights, inv_logit
from .records import MISSING, Dataset

#: seed of the shipped default generating truth
DEFAULT_TRUTH_SEED = 20210915


@dataclass(frozen=True)
class TrendConfig:
    """Quadratic logit-scale trend coefficients on unit-scaled time/age axes.

    Defaults give a rise-then-fall trend over time (peak mid-period, where
    the standard verification mechanism samples least), a monotone decline
    over age, and a prevalence surface spanning roughly (0.2, 0.8).
    """

    intercept: float = -0.4
    time_linear: float = 7.2
    time_quad: float = -7.2
    age_linear: float = -1.2
    age_quad: float = 0.2
    sex_effect: float = 0.0  # added for male strata


def generate_true_csmf(n_time: int, n_age: int,
                       trend: TrendConfig = TrendConfig()) -> np.ndarray:
    """Deterministic true prevalence grid (2, T, A) from the quadratic trend."""
    if n_time < 2 or n_age < 2:
        raise ValueError("need at least 2 time periods and 2 age groups")
    u = np.arange(n_time) / (n_time - 1)
    v = np.arange(n_age) / (n_age - 1)
    q_time = trend.time_linear * u + trend.time_quad * u**2
    q_age = trend.age_linear * v + trend.age_quad * v**2
    logits = trend.intercept + q_time[None, :, None] + q_age[None, None, :]
    logits = logits + np.array([0.0, trend.sex_effect])[:, None, None]
    return inv_logit(np.broadcast_to(logits, (2, n_time, n_age)).copy())


@dataclass
class TrueModel:
    """Generating truth: prevalence grid plus latent class parameters."""

    prevalence: np.ndarray     # (2, T, A)
    class_weights: np.ndarray  # (2, K, G), G = 2*T*A, flat stratum order
    symptom_probs: np.ndarray  # (2, K, p)
    n_per_stratum: int = 100
    trend: TrendConfig = field(default_factory=TrendConfig)
    seed: int = DEFAULT_TRUTH_SEED

    @property
    def n_time(self) -> int:
        return self.prevalence.shape[1]

    @property
    def n_age(self) -> int:
        return self.prevalence.shape[2]

    @property
    def n_classes(self) -> int:
        return self.symptom_probs.shape[1]

    @property
    def n_symptoms(self) -> int:
        return self.symptom_probs.shape[2]

    @classmethod
    def load_default(cls) -> "TrueModel":
        """The generating truth shipped with the package (default dimensions)."""
        import json
        from importlib.resources import files

        payload = json.loads((files("vacsmf.data") / "default_truth.json").read_text())
        return cls(
            prevalence=np.asarray(payload["prevalence"], dtype=float),
            class_weights=np.asarray(payload["class_weights"], dtype=float),
            symptom_probs=np.asarray(payload["symptom_probs"], dtype=float),
            n_per_stratum=int(payload["n_per_stratum"]),
            trend=TrendConfig(**payload["trend"]),
            seed=int(payload["seed"]),
        )

    @classmethod
    def generate(
        cls,
        n_symptoms: int = 10,
        n_time: int = 10,
        n_age: int = 8,
        n_classes: int = 10,
        n_per_stratum: int = 100,
        trend: TrendConfig = TrendConfig(),
        seed: int = DEFAULT_TRUTH_SEED,
        symptom_prior: tuple[float, float] = (3.0, 3.0),
    ) -> "TrueModel":
        """Draw the latent generating parameters once from the model's priors.

        ``symptom_prior`` concentrates the generating response probabilities;
        the Beta(3, 3) default keeps symptoms informative about the cause
        without determining it, so prevalence priors still matter.
        """
        rng = np.random.default_rng(seed)
        prevalence = generate_true_csmf(n_time, n_age, trend)
        n_strata = 2 * n_time * n_age
        conc = rng.gamma(1.0, 1.0, size=(2, n_strata))
        sticks = np.ones((2, n_classes, n_strata))
        if n_classes > 1:
            sticks[:, :-1, :] = np.clip(
                rng.beta(1.0, np.broadcast_to(conc[:, None, :], (2, n_classes - 1, n_strata))),
                1e-9, 1.0 - 1e-9,
            )
        class_weights = batch_stick_weights(sticks)
        symptom_probs = np.clip(
            rng.beta(symptom_prior[0], symptom_prior[1], size=(2, n_classes, n_symptoms)),
            1e-6, 1.0 - 1e-6,
        )
        return cls(prevalence, class_weights, symptom_probs, n_per_stratum, trend, seed)


def generate_population(model: TrueModel, rng: np.random.Generator) -> Dataset:
    """Fully labeled synthetic population: exactly n_per_stratum records per stratum.

    All records start verified with their true cause; symptoms are complete.
    """
    T, A, K, p = model.n_time, model.n_age, model.n_classes, model.n_symptoms
    m = model.n_per_stratum
    n = 2 * T * A * m
    sex = np.repeat([1, 2], T * A * m)
    time = np.tile(np.repeat(np.arange(1, T + 1), A * m), 2)
    age = np.tile(np.repeat(np.arange(1, A + 1), m), 2 * T)
    g = ((sex - 1) * T + (time - 1)) * A + (age - 1)
    prev = model.prevalence.reshape(-1)[g]
    cause = (rng.random(n) < prev).astype(np.int8)
    weights = model.class_weights[cause, :, g]
    u = rng.random((n, 1)) * weights.sum(axis=1, keepdims=True)
    classes = (weights.cumsum(axis=1) < u).sum(axis=1)
    probs = model.symptom_probs[cause, classes, :]
    symptoms = (rng.random((n, p)) < probs).astype(np.int8)
    return Dataset.from_arrays(
        sex=sex, time=time, age=age,
        verified=np.ones(n, dtype=bool),
        cause=cause, symptoms=symptoms,
        n_time=T, n_age=A,
    )


@dataclass(frozen=True)
class VerificationMechanism:
    """Coefficients of the record-level cause-verification probability.

    Case "i" is ignorable given symptoms, time, and age (both cause
    coefficients zero); case "ii" tilts verification toward cause 0.
    """

    a_time: np.ndarray        # (T,)
    a_age: np.ndarray         # (A,)
    b: np.ndarray             # (T, A, p) symptom coefficients
    c1: float                 # added when the true cause is 1
    c2: float                 # added when the true cause is 0
    case: str                 # "i" or "ii"
    active_sets: np.ndarray   # (T, 3) symptom indices behind b

    def __post_init__(self) -> None:
        if self.case == "i":
            if self.c1 != 0.0 or self.c2 != 0.0:
                raise ValueError("case i requires c1 = c2 = 0")
        elif self.case == "ii":
            if not (-0.4 < self.c1 < 0.0) or self.c2 != -self.c1:
                raise ValueError("case ii requires c1 in (-0.4, 0) and c2 = -c1")
        else:
            raise ValueError(f"unknown case {self.case!r}")


def build_mechanism(n_time: int, n_age: int, n_symptoms: int, case: str,
                    rng: np.random.Generator) -> VerificationMechanism:
    """Standard study mechanism: over-verify edge times and edge age groups.

    Three randomly chosen symptoms per time period carry a weak (+0.1)
    association with verification.
    """
    if n_symptoms < 3:
        raise ValueError("mechanism needs at least 3 symptoms")
    a_time = np.full(n_time, 0.1)
    a_time[0] = a_time[-1] = 1.2
    a_age = np.full(n_age, -1.6)
    a_age[:2] = 0.4
    a_age[-2:] = 0.4
    active = np.empty((n_time, 3), dtype=np.int64)
    b = np.zeros((n_time, n_age, n_symptoms))
    for t in range(n_time):
        active[t] = np.sort(rng.choice(n_symptoms, size=3, replace=False))
        b[t, :, active[t]] = 0.1
    if case == "i":
        c1 = c2 = 0.0
    else:
        c1 = float(rng.uniform(-0.4, 0.0))
        c2 = -c1
    return VerificationMechanism(a_time, a_age, b, c1, c2, case, active)


def verification_probability(symptoms, age: int, time: int, cause: int,
                             mech: VerificationMechanism) -> float:
    """P(cause gets verified | record); missing symptoms contribute nothing."""
    x = np.asarray(
        [0 if v is None else v for v in np.asarray(symptoms, dtype=object).ravel()],
        dtype=float,
    )
    x[x == MISSING] = 0.0
    eta = (
        mech.a_time[time - 1]
        + mech.a_age[age - 1]
        + mech.b[time - 1, age - 1] @ x
        + mech.c1 * cause
        + mech.c2 * (1 - cause)
    )
    return float(inv_logit(eta))


def apply_verification(dataset: Dataset, mech: VerificationMechanism,
                       rng: np.random.Generator) -> Dataset:
    """Draw verification flags and mask causes; the input must be fully labeled.

    The caller keeps the labeled input as evaluation truth; the returned
    dataset never exposes a masked cause.
    """
    arrays = dataset.arrays()
    if np.any(arrays.cause == MISSING):
        raise ValueError("verification requires a fully labeled dataset")
    x = arrays.symptoms.astype(float)
    x[x == MISSING] = 0.0
    bsel = mech.b[arrays.time - 1, arrays.age - 1]  # (n, p)
    eta = (
        mech.a_time[arrays.time - 1]
        + mech.a_age[arrays.age - 1]
        + (bsel * x).sum(axis=1)
        + mech.c1 * arrays.cause
        + mech.c2 * (1 - arrays.cause)
    )
    verified = rng.random(len(dataset)) < inv_logit(eta)
    cause = np.where(verified, arrays.cause, MISSING).astype(np.int8)
    return Dataset.from_arrays(
        sex=arrays.sex, time=arrays.time, age=arrays.age,
        verified=verified, cause=cause, symptoms=arrays.symptoms,
        ids=[r.id for r in dataset],
        n_time=dataset.n_time, n_age=dataset.n_age,
    )


def resample_semisynthetic(dataset: Dataset, fraction: float,
                           rng: np.random.Generator) -> Dataset:
    """Stratified subsample preserving each stratum's cause split.

    Takes floor(fraction * n) records per stratum with the cause-1 share
    matched to the stratum's to within one record. Empty strata pass through
    empty.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    arrays = dataset.arrays()
    if np.any(arrays.cause == MISSING):
        raise ValueError("semi-synthetic resampling requires a fully labeled dataset")
    chosen: list[int] = []
    n_strata = 2 * dataset.n_time * dataset.n_age
    for g in range(n_strata):
        members = np.where(arrays.stratum == g)[0]
        if members.size == 0:
            continue
        take = int(np.floor(fraction * members.size))
        if take == 0:
            continue
        ones = members[arrays.cause[members] == 1]
        zeros = members[arrays.cause[members] == 0]
        want_ones = int(round(take * ones.size / members.size))
        want_ones = min(max(want_ones, take - zeros.size), ones.size, take)
        pick = []
        if want_ones:
            pick.append(rng.choice(ones, size=want_ones, replace=False))
        if take - want_ones:
            pick.append(rng.choice(zeros, size=take - want_ones, replace=False))
        chosen.extend(np.sort(np.concatenate(pick)).tolist())
    records = [dataset.records[i] for i in chosen]
    return Dataset(records, n_time=dataset.n_time, n_age=dataset.n_age)
