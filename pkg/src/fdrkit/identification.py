"""Closed-set and open-set identification discrepancies.

Closed set: rank-n identification rate per demographic and its largest
pairwise gap. Open set: detection-and-identification rate (DIR) on mated
probes, false-alarm rate (FAR) on non-mated probes, combined into a
threshold-wise discrepancy ``FDR'`` that mirrors FDR's alpha weighting.
"""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .fdr import _unit, max_gap
from .ingest import EmptyFile, MalformedRow
from .scores import Polarity

TRIAL_COLUMNS = ("probe_id", "probe_demo", "in_gallery", "mate_id", "gallery_id", "score")
_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


class NotInGallery(ValueError):
    pass


class EmptyCohort(ValueError):
    pass


class InvalidTrial(ValueError):
    pass


@dataclass(frozen=True)
class IdentificationTrial:
    """One probe searched against the gallery.

    ``gallery_scores`` maps gallery identity -> similarity score.
    """

    probe_id: str
    probe_demo: str
    in_gallery: bool
    mate_id: str | None
    gallery_scores: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.gallery_scores:
            raise InvalidTrial(f"probe {self.probe_id!r}: empty gallery scores")
        if not self.probe_demo:
            raise InvalidTrial(f"probe {self.probe_id!r}: empty demographic label")
        for gid, s in self.gallery_scores.items():
            if not math.isfinite(s):
                raise InvalidTrial(f"probe {self.probe_id!r}: non-finite score for {gid!r}")
        mated = self.mate_id is not None and self.mate_id in self.gallery_scores
        if self.in_gallery != mated:
            raise InvalidTrial(
                f"probe {self.probe_id!r}: in_gallery={self.in_gallery} but mate "
                f"{self.mate_id!r} {'is' if mated else 'is not'} among the gallery scores"
            )
        object.__setattr__(self, "gallery_scores", dict(self.gallery_scores))

    @property
    def mate_score(self) -> float:
        if not self.in_gallery:
            raise NotInGallery(f"probe {self.probe_id!r} has no mate in the gallery")
        return self.gallery_scores[self.mate_id]

    @property
    def best_score(self) -> float:
        return max(self.gallery_scores.values())


@dataclass(frozen=True)
class GallerySet:
    trials: tuple[IdentificationTrial, ...]
    gallery_ids: frozenset[str] = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "trials", tuple(self.trials))
        keys = frozenset().union(*(t.gallery_scores.keys() for t in self.trials))
        if self.gallery_ids is None:
            object.__setattr__(self, "gallery_ids", keys)
        else:
            object.__setattr__(self, "gallery_ids", frozenset(self.gallery_ids))
            stray = keys - self.gallery_ids
            if stray:
                raise InvalidTrial(f"gallery scores reference undeclared identities {sorted(stray)}")
        if not self.gallery_ids:
            raise InvalidTrial("gallery must contain at least one identity")

    @property
    def gallery_size(self) -> int:
        return len(self.gallery_ids)

    @property
    def demographics(self) -> list[str]:
        return sorted({t.probe_demo for t in self.trials})

    def cohort(self, demo: str | None, in_gallery: bool) -> list[IdentificationTrial]:
        return [t for t in self.trials
                if t.in_gallery == in_gallery and (demo is None or t.probe_demo == demo)]


def rank_of(trial: IdentificationTrial, ties: str = "optimistic") -> int:
    """Position of the mate in the sorted candidate list (1 = best).

    ``ties="optimistic"`` ranks the mate ahead of non-mates with equal
    score; ``"pessimistic"`` ranks it behind them.
    """
    s = trial.mate_score
    others = [v for k, v in trial.gallery_scores.items() if k != trial.mate_id]
    if ties == "optimistic":
        return 1 + sum(v > s for v in others)
    if ties == "pessimistic":
        return 1 + sum(v >= s for v in others)
    raise ValueError(f"ties must be 'optimistic' or 'pessimistic', got {ties!r}")


def rank_n_rate(gallery: GallerySet, n: int, demo: str | None = None, ties: str = "optimistic") -> float:
    """Fraction of mated probes (optionally one demographic) with rank <= n."""
    if n < 1:
        raise ValueError(f"rank n must be >= 1, got {n}")
    cohort = gallery.cohort(demo, True)
    if not cohort:
        raise EmptyCohort(f"no mated probes for demographic {demo!r}")
    return sum(rank_of(t, ties) <= n for t in cohort) / len(cohort)


def _per_demo(gallery: GallerySet, in_gallery: bool, fn) -> dict[str, float]:
    return {d: fn(d) for d in gallery.demographics if gallery.cohort(d, in_gallery)}


def closed_set_discrepancy(gallery: GallerySet, n: int, ties: str = "optimistic") -> float:
    """Largest pairwise gap in rank-n rate between demographics."""
    rates = _per_demo(gallery, True, lambda d: rank_n_rate(gallery, n, d, ties))
    if not rates:
        raise EmptyCohort("no demographic has mated probes")
    return max_gap(rates.values())


def dir_rate(gallery: GallerySet, tau: float, demo: str | None = None, ties: str = "optimistic") -> float:
    """Detection and identification rate: mate at rank 1 and scoring ``>= tau``."""
    cohort = gallery.cohort(demo, True)
    if not cohort:
        raise EmptyCohort(f"no mated probes for demographic {demo!r}")
    hits = sum(rank_of(t, ties) == 1 and t.mate_score >= tau for t in cohort)
    return hits / len(cohort)


def far_open(gallery: GallerySet, tau: float, demo: str | None = None) -> float:
    """False-alarm rate: non-mated probes whose best gallery score is ``>= tau``."""
    cohort = gallery.cohort(demo, False)
    if not cohort:
        raise EmptyCohort(f"no non-mated probes for demographic {demo!r}")
    return sum(t.best_score >= tau for t in cohort) / len(cohort)


@dataclass(frozen=True)
class OpenSetDiscrepancy:
    far: dict[str, float]
    dir: dict[str, float]
    far_gap: float
    dir_gap: float
    alpha: float

    @property
    def literal(self) -> float:
        return self.alpha * self.far_gap + (1.0 - self.alpha) * self.dir_gap

    @property
    def complement(self) -> float:
        return 1.0 - self.literal


def open_set_discrepancy(gallery: GallerySet, tau: float, alpha: float = 0.5,
                         ties: str = "optimistic") -> OpenSetDiscrepancy:
    alpha = _unit("alpha", alpha)
    fars = _per_demo(gallery, False, lambda d: far_open(gallery, tau, d))
    dirs = _per_demo(gallery, True, lambda d: dir_rate(gallery, tau, d, ties))
    if not set(fars) & set(dirs):
        raise EmptyCohort("no demographic has both mated and non-mated probes")
    return OpenSetDiscrepancy(fars, dirs, max_gap(fars.values()), max_gap(dirs.values()), alpha)


def fdr_prime(gallery: GallerySet, tau: float, alpha: float = 0.5, complement: bool = False,
              ties: str = "optimistic") -> float:
    """Open-set discrepancy ``alpha*max|FAR gap| + (1-alpha)*max|DIR gap|``.

    0 means parity. ``complement=True`` returns ``1 -`` that value so it
    reads like FDR (1 = parity).
    """
    result = open_set_discrepancy(gallery, tau, alpha, ties)
    return result.complement if complement else result.literal


def _parse_bool(text: str, line: int, path) -> bool:
    v = text.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise MalformedRow(line, f"in_gallery must be a boolean, got {text!r}", path)


def read_trials(stream: Iterable[str], polarity: Polarity | str = Polarity.SIMILARITY,
                path=None) -> GallerySet:
    """Parse long-form trial CSV, one row per (probe, gallery identity)."""
    sign = -1.0 if Polarity(polarity) is Polarity.DISTANCE else 1.0
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile(path) from None
    pos = {name: i for i, name in enumerate(header)}
    missing = [c for c in TRIAL_COLUMNS if c not in pos]
    if missing:
        raise MalformedRow(1, f"header lacks required column(s) {missing}; got {header}", path)
    width = max(pos[c] for c in TRIAL_COLUMNS) + 1
    probes: OrderedDict[str, dict] = OrderedDict()
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < width:
            raise MalformedRow(line, f"expected at least {width} fields, got {len(row)}", path)
        pid, demo = row[pos["probe_id"]].strip(), row[pos["probe_demo"]].strip()
        in_g = _parse_bool(row[pos["in_gallery"]], line, path)
        mate = row[pos["mate_id"]].strip() or None
        gid = row[pos["gallery_id"]].strip()
        if not pid or not demo or not gid:
            raise MalformedRow(line, "empty probe_id, probe_demo or gallery_id", path)
        try:
            score = float(row[pos["score"]].strip())
        except ValueError:
            raise MalformedRow(line, f"score {row[pos['score']]!r} is not a number", path) from None
        if not math.isfinite(score):
            raise MalformedRow(line, f"non-finite score {row[pos['score']]!r}", path)
        entry = probes.setdefault(pid, {"demo": demo, "in_gallery": in_g, "mate": mate,
                                        "scores": {}, "line": line})
        if (entry["demo"], entry["in_gallery"], entry["mate"]) != (demo, in_g, mate):
            raise MalformedRow(line, f"probe {pid!r} rows disagree on probe_demo/in_gallery/mate_id", path)
        if gid in entry["scores"]:
            raise MalformedRow(line, f"probe {pid!r} scored twice against {gid!r}", path)
        entry["scores"][gid] = sign * score
    if not probes:
        raise EmptyFile(path)
    trials = []
    for pid, e in probes.items():
        try:
            trials.append(IdentificationTrial(pid, e["demo"], e["in_gallery"], e["mate"], e["scores"]))
        except InvalidTrial as exc:
            raise MalformedRow(e["line"], str(exc), path) from None
    return GallerySet(tuple(trials))


def load_trials(path, polarity: Polarity | str = Polarity.SIMILARITY) -> GallerySet:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_trials(fh, polarity, path)


def write_trials(gallery: GallerySet, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for t in gallery.trials:
            for gid, s in t.gallery_scores.items():
                w.writerow((t.probe_id, t.probe_demo, "true" if t.in_gallery else "false",
                            t.mate_id or "", gid, s))
