"""CSV/JSON serialization: datasets, posterior draws, sidecars, run configs.

Tabular data is CSV with the string ``NA`` for missing values; configs and
generating truth travel as JSON. All writers format floats deterministically
so identical runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .gibbs import ChainConfig, PosteriorDraws
from .priors import Hyperparams, PriorSpec, PriorVariant
from .records import Dataset, SurveyRecord
from .simulate import TrendConfig, TrueModel, VerificationMechanism

NA = "NA"
_FLOAT_FMT = ".12g"


class DataError(ValueError):
    """Malformed input file or row; message carries the offending location."""


def _fmt(x: float) -> str:
    return format(float(x), _FLOAT_FMT)


# ---------------------------------------------------------------------------
# datasets


def parse_dataset(path, n_symptoms: int | None = None, n_time: int | None = None,
                  n_age: int | None = None) -> Dataset:
    """Read and validate a dataset CSV (header: id,sex,time,age,verified,cause,x1..xp)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: no records") from None
        if len(header) < 7 or header[:6] != ["id", "sex", "time", "age", "verified", "cause"]:
            raise DataError(f"{path}: bad header; expected id,sex,time,age,verified,cause,x1..xp")
        p = len(header) - 6
        expected_x = [f"x{j}" for j in range(1, p + 1)]
        if header[6:] != expected_x:
            raise DataError(f"{path}: symptom columns must be named x1..x{p}")
        if n_symptoms is not None and n_symptoms != p:
            raise DataError(f"{path}: configured p={n_symptoms} but file has {p} symptom columns")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6 + p:
                raise DataError(f"{path} line {lineno}: expected {6 + p} fields, got {len(row)}")
            try:
                rec = _parse_row(row, p)
            except ValueError as exc:
                raise DataError(f"{path} line {lineno}: {exc}") from None
            records.append(rec)
    if not records:
        raise DataError(f"{path}: no records")
    try:
        return Dataset(records, n_symptoms=n_symptoms, n_time=n_time, n_age=n_age)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def _parse_row(row: list[str], p: int) -> SurveyRecord:
    rid = row[0]
    sex, time, age = (int(row[i]) for i in (1, 2, 3))
    verified_raw = int(row[4])
    if verified_raw not in (0, 1):
        raise ValueError(f"verified must be 0 or 1, got {row[4]!r}")
    verified = bool(verified_raw)
    cause_raw = row[5].strip()
    if cause_raw == NA:
        if verified:
            raise ValueError(f"verified record {rid!r} has missing cause")
        cause = None
    else:
        cause = int(cause_raw)
        if cause not in (0, 1):
            raise ValueError(f"cause must be 0, 1 or {NA}, got {cause_raw!r}")
        if not verified:
            raise ValueError(f"unverified record {rid!r} must have cause {NA}")
    symptoms = []
    for j, cell in enumerate(row[6:], start=1):
        cell = cell.strip()
        if cell == NA:
            symptoms.append(None)
        elif cell in ("0", "1"):
            symptoms.append(int(cell))
        else:
            raise ValueError(f"symptom x{j} must be 0, 1 or {NA}, got {cell!r}")
    return SurveyRecord(id=rid, sex=sex, time=time, age=age, verified=verified,
                        cause=cause, symptoms=tuple(symptoms))


def write_dataset(path, dataset: Dataset) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "sex", "time", "age", "verified", "cause"]
                        + [f"x{j}" for j in range(1, dataset.n_symptoms + 1)])
        for r in dataset:
            writer.writerow(
                [r.id, r.sex, r.time, r.age, int(r.verified),
                 NA if r.cause is None else r.cause]
                + [NA if v is None else v for v in r.symptoms]
            )


def write_true_causes(path, dataset: Dataset) -> None:
    """Evaluation sidecar: the true cause of every record of a labeled dataset."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "cause"])
        for r in dataset:
            if r.cause is None:
                raise ValueError(f"record {r.id} has no cause; dataset is not fully labeled")
            writer.writerow([r.id, r.cause])


# ---------------------------------------------------------------------------
# posterior draws and summaries


def write_draws(path, draws: PosteriorDraws) -> None:
    """Per-draw prevalence grid: chain, iter, s, t, a, pi."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["chain", "iter", "s", "t", "a", "pi"])
        for m in range(draws.n_draws):
            chain = draws.chain[m]
            it = draws.iteration[m]
            grid = draws.prevalence[m]
            for s in range(2):
                for t in range(draws.n_time):
                    for a in range(draws.n_age):
                        writer.writerow([chain, it, s + 1, t + 1, a + 1, _fmt(grid[s, t, a])])


def read_draws(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Load a draws CSV back into a (M, 2, T, A) array plus chain/iter vectors."""
    frame = pd.read_csv(path)
    n_time = int(frame["t"].max())
    n_age = int(frame["a"].max())
    keys = frame[["chain", "iter"]].drop_duplicates().to_numpy()
    n_draws = keys.shape[0]
    if len(frame) != n_draws * 2 * n_time * n_age:
        raise DataError(f"{path}: draw grid is ragged")
    ordered = frame.sort_values(["chain", "iter", "s", "t", "a"], kind="stable")
    prevalence = ordered["pi"].to_numpy().reshape(n_draws, 2, n_time, n_age)
    return prevalence, keys[:, 0], keys[:, 1]


def write_summary(path, draws: PosteriorDraws, level: float = 0.95) -> None:
    """Stratum-level posterior mean and interval plus record counts."""
    tail = (1.0 - level) / 2.0
    mean = draws.prevalence.mean(axis=0)
    lo = np.quantile(draws.prevalence, tail, axis=0)
    hi = np.quantile(draws.prevalence, 1.0 - tail, axis=0)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "t", "a", "n", "n_unverified", "mean", "lower", "upper"])
        for s in range(2):
            for t in range(draws.n_time):
                for a in range(draws.n_age):
                    writer.writerow([
                        s + 1, t + 1, a + 1,
                        int(draws.n_grid[s, t, a]),
                        int(draws.n_unverified_grid[s, t, a]),
                        _fmt(mean[s, t, a]), _fmt(lo[s, t, a]), _fmt(hi[s, t, a]),
                    ])


def read_summary(path) -> pd.DataFrame:
    return pd.read_csv(path)


def write_latent_means(phi_path, lambda_path, draws: PosteriorDraws) -> None:
    """Posterior-mean symptom profiles and class weights (report inputs)."""
    phi = draws.symptom_probs.mean(axis=0)
    lam = draws.class_weights.mean(axis=0)
    with Path(phi_path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cause", "class", "symptom", "probability"])
        for c in (0, 1):
            for k in range(phi.shape[1]):
                for j in range(phi.shape[2]):
                    writer.writerow([c, k + 1, j + 1, _fmt(phi[c, k, j])])
    with Path(lambda_path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cause", "class", "stratum", "weight"])
        for c in (0, 1):
            for k in range(lam.shape[1]):
                for g in range(lam.shape[2]):
                    writer.writerow([c, k + 1, g + 1, _fmt(lam[c, k, g])])


# ---------------------------------------------------------------------------
# sidecars


def write_truth(path, model: TrueModel) -> None:
    payload = {
        "seed": model.seed,
        "n_per_stratum": model.n_per_stratum,
        "trend": dataclasses.asdict(model.trend),
        "prevalence": model.prevalence.tolist(),
        "class_weights": model.class_weights.tolist(),
        "symptom_probs": model.symptom_probs.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def read_truth(path) -> TrueModel:
    payload = json.loads(Path(path).read_text())
    return TrueModel(
        prevalence=np.asarray(payload["prevalence"], dtype=float),
        class_weights=np.asarray(payload["class_weights"], dtype=float),
        symptom_probs=np.asarray(payload["symptom_probs"], dtype=float),
        n_per_stratum=int(payload["n_per_stratum"]),
        trend=TrendConfig(**payload["trend"]),
        seed=int(payload["seed"]),
    )


def mechanism_to_dict(mech: VerificationMechanism) -> dict:
    return {
        "a_time": mech.a_time.tolist(),
        "a_age": mech.a_age.tolist(),
        "b": mech.b.tolist(),
        "c1": mech.c1,
        "c2": mech.c2,
        "case": mech.case,
        "active_sets": mech.active_sets.tolist(),
    }


def mechanism_from_dict(payload: dict) -> VerificationMechanism:
    return VerificationMechanism(
        a_time=np.asarray(payload["a_time"], dtype=float),
        a_age=np.asarray(payload["a_age"], dtype=float),
        b=np.asarray(payload["b"], dtype=float),
        c1=float(payload["c1"]),
        c2=float(payload["c2"]),
        case=str(payload["case"]),
        active_sets=np.asarray(payload["active_sets"], dtype=np.int64),
    )


def write_mechanisms(path, mechanisms: list[VerificationMechanism]) -> None:
    payload = [mechanism_to_dict(m) for m in mechanisms]
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def read_mechanisms(path) -> list[VerificationMechanism]:
    return [mechanism_from_dict(m) for m in json.loads(Path(path).read_text())]


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """Everything one fit needs; validated against the model invariants."""

    dataset: str
    output_dir: str
    model: str = "rw1"
    n_classes: int = 10
    iterations: int = 8000
    burnin: int = 3000
    thin: int = 1
    chains: int = 1
    seed: int = 0
    n_time: int | None = None
    n_age: int | None = None
    hyper: Hyperparams = field(default_factory=Hyperparams)

    def prior_spec(self) -> PriorSpec:
        try:
            variant = PriorVariant(self.model)
        except ValueError:
            names = ", ".join(v.value for v in PriorVariant)
            raise DataError(f"unknown model {self.model!r}; choose one of: {names}") from None
        return PriorSpec(variant=variant, hyper=self.hyper)

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            iterations=self.iterations, burnin=self.burnin, n_classes=self.n_classes,
            thin=self.thin, seed=self.seed, chains=self.chains,
        )

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        payload = json.loads(text)
        hyper = payload.pop("hyper", None)
        cfg = cls(**payload)
        if hyper is not None:
            pairs = {k: tuple(v) if isinstance(v, list) else v for k, v in hyper.items()}
            cfg.hyper = Hyperparams(**pairs)
        return cfg


def write_run_config(path, config: RunConfig) -> None:
    Path(path).write_text(config.to_json())


def read_run_config(path) -> RunConfig:
    return RunConfig.from_json(Path(path).read_text())
