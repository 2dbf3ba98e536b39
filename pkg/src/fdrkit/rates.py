"""Error rates at a shared decision threshold.

A threshold is calibrated once on pooled development impostors (all
demographics together) and then applied unchanged to every demographic cell
of the test set. Acceptance is ``score >= tau`` throughout, so ties count as
matches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .scores import ScoreSet

# Slack on "achieved FMR <= target" so that e.g. 10/100000 vs 10**-4 compares
# as equal despite float rounding of the target.
_TARGET_RTOL = 1e-9


class NoImpostors(ValueError):
    """Calibration set has no impostor scores."""


class EmptyCell(ValueError):
    """A rate was requested for a cell with no comparisons."""


@dataclass(frozen=True)
class Threshold:
    """Decision threshold calibrated at FMR target ``10**-target_exponent``.

    ``degenerate`` marks targets finer than the calibration set can resolve;
    ``tau`` is then one unit above the largest calibration score so that
    nothing in the calibration set is accepted.
    """

    tau: float
    target_exponent: float
    achieved_dev_fmr: float
    degenerate: bool = False

    @property
    def target_fmr(self) -> float:
        return 10.0 ** -self.target_exponent


@dataclass(frozen=True)
class Cell:
    """A rate with its support: ``rate == errors / total``."""

    errors: int
    total: int

    @property
    def rate(self) -> float:
        return self.errors / self.total


@dataclass(frozen=True)
class RateTable:
    """Per-demographic error rates of one test set at one threshold.

    Cells without data are simply missing from the mappings.
    """

    threshold: Threshold
    labels: tuple[str, ...]
    fmr_cells: dict[tuple[str, str], Cell]
    fnmr_cells: dict[str, Cell]
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def per_pair_fmr(self) -> dict[tuple[str, str], float]:
        return {k: c.rate for k, c in self.fmr_cells.items()}

    @property
    def per_demo_fnmr(self) -> dict[str, float]:
        return {k: c.rate for k, c in self.fnmr_cells.items()}

    def homogeneous_fmr(self) -> dict[str, float]:
        return {e: c.rate for (e, p), c in self.fmr_cells.items() if e == p}

    def fmr(self, enroll: str, probe: str) -> float | None:
        cell = self.fmr_cells.get((enroll, probe))
        return None if cell is None else cell.rate

    def fnmr(self, demo: str) -> float | None:
        cell = self.fnmr_cells.get(demo)
        return None if cell is None else cell.rate


def _as_scores(values) -> np.ndarray:
    if isinstance(values, ScoreSet):
        return values.scores
    arr = np.asarray(
        [getattr(v, "score", v) for v in values] if not isinstance(values, np.ndarray) else values,
        dtype=np.float64,
    )
    return arr.ravel()


def _check_exponent(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"FMR exponent must be finite and >= 0, got {x}")
    return x


def calibrate_sorted(sorted_impostors: np.ndarray, x: float) -> Threshold:
    """Calibrate on an ascending array of impostor scores.

    Picks the smallest observed score ``s`` with
    ``#{impostors >= s} / N <= 10**-x``.
    """
    x = _check_exponent(x)
    n = len(sorted_impostors)
    if n == 0:
        raise NoImpostors("calibration set has no impostor scores")
    target = 10.0 ** -x
    distinct = np.unique(sorted_impostors)
    accepted = n - np.searchsorted(sorted_impostors, distinct, side="left")
    ok = accepted / n <= target * (1 + _TARGET_RTOL)
    if not ok.any():
        return Threshold(float(sorted_impostors[-1]) + 1.0, x, 0.0, degenerate=True)
    i = int(np.argmax(ok))
    return Threshold(float(distinct[i]), x, float(accepted[i] / n))


def calibrate_threshold(calibration: ScoreSet | Iterable[float], x: float) -> Threshold:
    """Threshold at FMR target ``10**-x`` on the pooled impostors.

    ``calibration`` is a :class:`ScoreSet` (its impostors across every
    demographic are pooled) or a plain sequence of impostor scores.

    Raises:
        NoImpostors: nothing to calibrate on.
    """
    if isinstance(calibration, ScoreSet):
        imp = calibration.impostor_scores()
    else:
        imp = _as_scores(calibration)
    return calibrate_sorted(np.sort(imp, kind="stable"), x)


def fmr(impostor_scores, tau: float) -> float:
    """Fraction of impostor scores accepted (``>= tau``)."""
    s = _as_scores(impostor_scores)
    if len(s) == 0:
        raise EmptyCell("FMR of an empty impostor cell")
    return int(np.count_nonzero(s >= tau)) / len(s)


def fnmr(genuine_scores, tau: float) -> float:
    """Fraction of genuine scores rejected (``< tau``)."""
    s = _as_scores(genuine_scores)
    if len(s) == 0:
        raise EmptyCell("FNMR of an empty genuine cell")
    return int(np.count_nonzero(s < tau)) / len(s)


def rate_table(test: ScoreSet, threshold: Threshold | float) -> RateTable:
    """FMR for every ordered (enroll, probe) pair and FNMR per demographic.

    Pairs with no impostors and demographics with no genuine comparisons
    are left out (absent, not zero).
    """
    if not isinstance(threshold, Threshold):
        threshold = Threshold(float(threshold), math.nan, math.nan)
    tau = threshold.tau
    k = len(test.labels)
    accepted = test.scores >= tau
    imp = ~test.genuine

    pair = test.enroll.astype(np.int64) * k + test.probe
    imp_total = np.bincount(pair[imp], minlength=k * k)
    imp_err = np.bincount(pair[imp & accepted], minlength=k * k)
    gen_total = np.bincount(test.enroll[test.genuine], minlength=k)
    gen_err = np.bincount(test.enroll[test.genuine & ~accepted], minlength=k)

    labels = test.labels
    fmr_cells = {
        (labels[i // k], labels[i % k]): Cell(int(imp_err[i]), int(imp_total[i]))
        for i in range(k * k) if imp_total[i]
    }
    fnmr_cells = {
        labels[i]: Cell(int(gen_err[i]), int(gen_total[i]))
        for i in range(k) if gen_total[i]
    }
    diagnostics = []
    for d in labels:
        if (d, d) not in fmr_cells:
            diagnostics.append(f"no homogeneous impostor comparisons for {d!r}; FMR cell absent")
        if d not in fnmr_cells:
            diagnostics.append(f"no genuine comparisons for {d!r}; FNMR cell absent")
    return RateTable(threshold, labels, fmr_cells, fnmr_cells, tuple(diagnostics))


def det_points(test: ScoreSet, demo: str) -> list[tuple[float, float]]:
    """DET curve of one demographic with its own threshold sweep.

    ``tau`` runs over the sorted union of the demographic's homogeneous
    impostor and genuine scores; one ``(fmr, fnmr)`` pair per distinct tau.

    Raises:
        EmptyCell: the demographic lacks homogeneous impostors or genuines.
    """
    _, fmr_v, fnmr_v = det_curve(test, demo)
    return list(zip(fmr_v.tolist(), fnmr_v.tolist()))


def det_curve(test: ScoreSet, demo: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays ``(taus, fmr, fnmr)`` behind :func:`det_points`."""
    if demo not in test.labels:
        raise EmptyCell(f"demographic {demo!r} not present")
    c = test.code(demo)
    homog = (test.enroll == c) & (test.probe == c)
    imp = np.sort(test.scores[homog & ~test.genuine])
    gen = np.sort(test.scores[homog & test.genuine])
    if len(imp) == 0 or len(gen) == 0:
        raise EmptyCell(f"demographic {demo!r} needs homogeneous impostor and genuine scores")
    taus = np.unique(np.concatenate([imp, gen]))
    fmr_v = (len(imp) - np.searchsorted(imp, taus, side="left")) / len(imp)
    fnmr_v = np.searchsorted(gen, taus, side="left") / len(gen)
    return taus, fmr_v, fnmr_v
