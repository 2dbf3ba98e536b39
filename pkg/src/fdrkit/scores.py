"""Domain types for comparison scores.

Canonical orientation is *similarity*: a comparison is accepted iff
``score >= tau``. Distance-valued inputs are negated on the way in.

A :class:`ScoreSet` is stored column-wise (label codes plus a float64 score
array) so that sets with millions of impostor comparisons stay cheap; the
record view is only materialised on iteration.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


class Polarity(str, enum.Enum):
    SIMILARITY = "similarity"
    DISTANCE = "distance"


class Kind(str, enum.Enum):
    GENUINE = "genuine"
    IMPOSTOR = "impostor"


class InvalidRecord(ValueError):
    """A comparison violates a record invariant."""


class DataWarning(UserWarning):
    """Non-fatal data problem worth surfacing to the user."""


def _check_label(label: str) -> str:
    if not isinstance(label, str) or not label:
        raise InvalidRecord(f"demographic label must be a non-empty string, got {label!r}")
    return label


@dataclass(frozen=True)
class ComparisonRecord:
    enroll_demo: str
    probe_demo: str
    score: float
    kind: Kind

    def __post_init__(self) -> None:
        _check_label(self.enroll_demo)
        _check_label(self.probe_demo)
        if not math.isfinite(self.score):
            raise InvalidRecord(f"score must be finite, got {self.score!r}")
        if self.kind is Kind.GENUINE and self.enroll_demo != self.probe_demo:
            raise InvalidRecord(
                f"genuine comparison with mismatched demographics "
                f"{self.enroll_demo!r} vs {self.probe_demo!r}"
            )

    @property
    def genuine(self) -> bool:
        return self.kind is Kind.GENUINE


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Validated, immutable collection of comparisons.

    Attributes:
        labels: Sorted tuple of every demographic label that appears.
        enroll: Index into ``labels`` for the enrolment side of each record.
        probe: Index into ``labels`` for the probe side.
        scores: Similarity-oriented scores (float64, finite).
        genuine: True for genuine comparisons, False for impostors.
    """

    labels: tuple[str, ...]
    enroll: np.ndarray
    probe: np.ndarray
    scores: np.ndarray
    genuine: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.scores)
        for name in ("enroll", "probe", "genuine"):
            if len(getattr(self, name)) != n:
                raise InvalidRecord(f"column {name!r} has length {len(getattr(self, name))}, expected {n}")
        if not np.all(np.isfinite(self.scores)):
            raise InvalidRecord("scores must be finite")
        if n and (self.enroll.min() < 0 or self.probe.min() < 0
                  or max(self.enroll.max(), self.probe.max()) >= len(self.labels)):
            raise InvalidRecord("label code out of range")
        if np.any(self.genuine & (self.enroll != self.probe)):
            raise InvalidRecord("genuine comparison with mismatched demographics")
        for label in self.labels:
            _check_label(label)
        if list(self.labels) != sorted(set(self.labels)):
            raise InvalidRecord("labels must be sorted and unique")
        used = np.zeros(len(self.labels), dtype=bool)
        used[self.enroll] = True
        used[self.probe] = True
        if not used.all():
            raise InvalidRecord("labels must equal the set of labels used by the records")
        for name in ("enroll", "probe", "scores", "genuine"):
            _frozen(getattr(self, name))

    @classmethod
    def from_arrays(
        cls,
        enroll_labels: Sequence[str],
        probe_labels: Sequence[str],
        scores: Sequence[float] | np.ndarray,
        genuine: Sequence[bool] | np.ndarray,
    ) -> "ScoreSet":
        enroll_labels = np.asarray(enroll_labels, dtype=object)
        probe_labels = np.asarray(probe_labels, dtype=object)
        labels = tuple(sorted(set(enroll_labels.tolist()) | set(probe_labels.tolist())))
        index = {label: i for i, label in enumerate(labels)}
        enroll = np.fromiter((index[x] for x in enroll_labels), dtype=np.int32, count=len(enroll_labels))
        probe = np.fromiter((index[x] for x in probe_labels), dtype=np.int32, count=len(probe_labels))
        return cls(
            labels=labels,
            enroll=enroll,
            probe=probe,
            scores=np.array(scores, dtype=np.float64),
            genuine=np.array(genuine, dtype=bool),
        )

    @classmethod
    def from_records(cls, records: Iterable[ComparisonRecord]) -> "ScoreSet":
        records = list(records)
        return cls.from_arrays(
            [r.enroll_demo for r in records],
            [r.probe_demo for r in records],
            [r.score for r in records],
            [r.genuine for r in records],
        )

    def __len__(self) -> int:
        return len(self.scores)

    def __iter__(self) -> Iterator[ComparisonRecord]:
        labels = self.labels
        for e, p, s, g in zip(self.enroll.tolist(), self.probe.tolist(),
                              self.scores.tolist(), self.genuine.tolist()):
            yield ComparisonRecord(labels[e], labels[p], s, Kind.GENUINE if g else Kind.IMPOSTOR)

    @property
    def records(self) -> list[ComparisonRecord]:
        return list(self)

    @property
    def label_universe(self) -> frozenset[str]:
        return frozenset(self.labels)

    @property
    def n_impostors(self) -> int:
        return int(len(self) - np.count_nonzero(self.genuine))

    @property
    def n_genuine(self) -> int:
        return int(np.count_nonzero(self.genuine))

    def impostor_scores(self) -> np.ndarray:
        return self.scores[~self.genuine]

    def code(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def negated(self) -> "ScoreSet":
        return ScoreSet(self.labels, self.enroll.copy(), self.probe.copy(),
                        -self.scores, self.genuine.copy())

    def with_scores(self, scores: np.ndarray) -> "ScoreSet":
        """Same comparisons, new score column."""
        return ScoreSet(self.labels, self.enroll.copy(), self.probe.copy(),
                        np.array(scores, dtype=np.float64), self.genuine.copy())


@dataclass(frozen=True)
class SplitDataset:
    """Development (calibration) and test partitions."""

    dev: ScoreSet
    test: ScoreSet
    unseen_test_labels: frozenset[str] = field(init=False)

    def __post_init__(self) -> None:
        unseen = self.test.label_universe - self.dev.label_universe
        object.__setattr__(self, "unseen_test_labels", frozenset(unseen))
        if unseen:
            warnings.warn(
                f"test set contains demographics absent from dev: {sorted(unseen)}",
                DataWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class OperatingPointGrid:
    """Exponents ``x`` defining thresholds at FMR = 10**-x."""

    exponents: tuple[float, ...]

    def __post_init__(self) -> None:
        xs = tuple(float(x) for x in self.exponents)
        object.__setattr__(self, "exponents", xs)
        if not xs:
            raise ValueError("grid must contain at least one exponent")
        if any(not math.isfinite(x) or x <= 0 for x in xs):
            raise ValueError(f"grid exponents must be finite and > 0, got {xs}")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"grid exponents must be strictly increasing, got {xs}")

    @classmethod
    def parse(cls, text: str) -> "OperatingPointGrid":
        """Parse ``"1,2,3"`` style lists."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return cls(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise ValueError(f"invalid grid {text!r}: {exc}") from None

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self) -> Iterator[float]:
        return iter(self.exponents)


def normalize_orientation(records, polarity: Polarity | str):
    """Bring scores to similarity orientation.

    Accepts a list of :class:`ComparisonRecord` or a :class:`ScoreSet` and
    returns the same kind of object. Distance scores are negated; similarity
    scores are returned unchanged.
    """
    polarity = Polarity(polarity)
    if polarity is Polarity.SIMILARITY:
        return records
    if isinstance(records, ScoreSet):
        return records.negated()
    return [ComparisonRecord(r.enroll_demo, r.probe_demo, -r.score, r.kind) for r in records]


def accepts(score: float, tau: float) -> bool:
    return score >= tau
