"""Survey records, datasets, and the sex/time/age stratum grid.

The flat stratum ordering used everywhere in this package runs age fastest,
then time, then sex: ``g(s, t, a) = (s - 1) * T * A + (t - 1) * A + (a - 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

#: internal integer code for a missing symptom entry
MISSING = -1


@dataclass(frozen=True)
class SurveyRecord:
    """One death: stratum indices, verification status, and a symptom vector.

    Symptom entries are 0/1 with ``None`` marking a missing response.
    ``cause`` is present exactly when ``verified`` is true.
    """

    id: str
    sex: int
    time: int
    age: int
    verified: bool
    cause: int | None
    symptoms: tuple[int | None, ...]

    def __post_init__(self) -> None:
        if self.sex not in (1, 2):
            raise ValueError(f"record {self.id}: sex must be 1 or 2, got {self.sex}")
        if self.time < 1:
            raise ValueError(f"record {self.id}: time index must be >= 1, got {self.time}")
        if self.age < 1:
            raise ValueError(f"record {self.id}: age index must be >= 1, got {self.age}")
        if self.verified:
            if self.cause not in (0, 1):
                raise ValueError(f"record {self.id}: verified record needs cause 0 or 1")
        elif self.cause is not None:
            raise ValueError(f"record {self.id}: unverified record must not carry a cause")
        for v in self.symptoms:
            if v not in (0, 1, None):
                raise ValueError(f"record {self.id}: symptom entries must be 0, 1 or missing")


@dataclass(frozen=True)
class StratumGrid:
    """The (sex, time, age) grid with per-stratum record counts."""

    n_time: int
    n_age: int
    counts: np.ndarray  # (2, T, A) int

    def __post_init__(self) -> None:
        if self.counts.shape != (2, self.n_time, self.n_age):
            raise ValueError("counts shape does not match (2, T, A)")

    @property
    def n_strata(self) -> int:
        return 2 * self.n_time * self.n_age

    def flat_index(self, sex: int, time: int, age: int) -> int:
        """Flat index with age fastest, then time, then sex (all 1-based)."""
        return ((sex - 1) * self.n_time + (time - 1)) * self.n_age + (age - 1)

    def grid_index(self, flat: int) -> tuple[int, int, int]:
        """Inverse of :meth:`flat_index`; returns 1-based (sex, time, age)."""
        a = flat % self.n_age
        t = (flat // self.n_age) % self.n_time
        s = flat // (self.n_age * self.n_time)
        return s + 1, t + 1, a + 1

    def flat_counts(self) -> np.ndarray:
        return self.counts.reshape(-1)


@dataclass
class DatasetArrays:
    """Columnar view of a dataset used by the sampler and simulators."""

    sex: np.ndarray        # (n,) int, in {1, 2}
    time: np.ndarray       # (n,) int, 1-based
    age: np.ndarray        # (n,) int, 1-based
    verified: np.ndarray   # (n,) bool
    cause: np.ndarray      # (n,) int8, -1 where unknown
    symptoms: np.ndarray   # (n, p) int8, MISSING where unobserved
    stratum: np.ndarray    # (n,) int, flat stratum index


class Dataset:
    """A validated list of records plus the (p, T, A) dimensions.

    Dimensions are inferred from the data maxima unless explicitly
    overridden (overrides may only enlarge the grid).
    """

    def __init__(
        self,
        records: Sequence[SurveyRecord],
        n_symptoms: int | None = None,
        n_time: int | None = None,
        n_age: int | None = None,
    ) -> None:
        records = list(records)
        if not records:
            raise ValueError("no records")
        p = len(records[0].symptoms)
        for r in records:
            if len(r.symptoms) != p:
                raise ValueError(f"record {r.id}: symptom vector length {len(r.symptoms)} != {p}")
        if n_symptoms is not None and n_symptoms != p:
            raise ValueError(f"configured p={n_symptoms} does not match data (p={p})")
        t_max = max(r.time for r in records)
        a_max = max(r.age for r in records)
        if n_time is not None and n_time < t_max:
            raise ValueError(f"time index {t_max} exceeds configured T={n_time}")
        if n_age is not None and n_age < a_max:
            raise ValueError(f"age index {a_max} exceeds configured A={n_age}")
        self.records = records
        self.n_symptoms = p
        self.n_time = n_time or t_max
        self.n_age = n_age or a_max
        self._arrays: DatasetArrays | None = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SurveyRecord]:
        return iter(self.records)

    @property
    def grid(self) -> StratumGrid:
        counts = np.zeros((2, self.n_time, self.n_age), dtype=int)
        for r in self.records:
            counts[r.sex - 1, r.time - 1, r.age - 1] += 1
        return StratumGrid(self.n_time, self.n_age, counts)

    def arrays(self) -> DatasetArrays:
        if self._arrays is None:
            n = len(self.records)
            sex = np.fromiter((r.sex for r in self.records), dtype=np.int64, count=n)
            time = np.fromiter((r.time for r in self.records), dtype=np.int64, count=n)
            age = np.fromiter((r.age for r in self.records), dtype=np.int64, count=n)
            verified = np.fromiter((r.verified for r in self.records), dtype=bool, count=n)
            cause = np.fromiter(
                (r.cause if r.cause is not None else MISSING for r in self.records),
                dtype=np.int8,
                count=n,
            )
            symptoms = np.full((n, self.n_symptoms), MISSING, dtype=np.int8)
            for i, r in enumerate(self.records):
                for j, v in enumerate(r.symptoms):
                    if v is not None:
                        symptoms[i, j] = v
            stratum = ((sex - 1) * self.n_time + (time - 1)) * self.n_age + (age - 1)
            self._arrays = DatasetArrays(sex, time, age, verified, cause, symptoms, stratum)
        return self._arrays

    @classmethod
    def from_arrays(
        cls,
        sex: np.ndarray,
        time: np.ndarray,
        age: np.ndarray,
        verified: np.ndarray,
        cause: np.ndarray,
        symptoms: np.ndarray,
        ids: Iterable[str] | None = None,
        n_time: int | None = None,
        n_age: int | None = None,
    ) -> "Dataset":
        n = len(sex)
        if ids is None:
            ids = (f"r{i:06d}" for i in range(n))
        records = []
        for i, rid in zip(range(n), ids):
            c = int(cause[i])
            records.append(
                SurveyRecord(
                    id=rid,
                    sex=int(sex[i]),
                    time=int(time[i]),
                    age=int(age[i]),
                    verified=bool(verified[i]),
                    cause=None if c == MISSING else c,
                    symptoms=tuple(None if v == MISSING else int(v) for v in symptoms[i]),
                )
            )
        return cls(records, n_time=n_time, n_age=n_age)
