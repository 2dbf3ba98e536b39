"""Fairness Discrepancy Rate.

For a shared threshold ``tau``::

    A(tau)   = max |FMR_i - FMR_j|     over homogeneous cells (enroll == probe)
    B(tau)   = max |FNMR_i - FNMR_j|   over demographics
    FDR(tau) = 1 - (alpha * A + (1 - alpha) * B)

FDR is 1 at perfect parity. Cross-demographic impostor cells are reported
in rate tables but never enter ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rates import RateTable, Threshold, calibrate_sorted, rate_table
from .scores import OperatingPointGrid, SplitDataset

DEFAULT_ALPHA = 0.5

# Verdict boundary slack; keeps e.g. fdr=0.95, eps=0.05 on the fair side.
_VERDICT_ATOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside [0, 1]."""


class NoHomogeneousCells(ValueError):
    pass


class NoGenuineCells(ValueError):
    pass


class TooFewPoints(ValueError):
    pass


def _unit(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return value


def max_gap(values: Iterable[float]) -> float:
    """Largest absolute pairwise difference; 0 for fewer than two values."""
    vals = list(values)
    if not vals:
        raise ValueError("max_gap of an empty collection")
    return max(vals) - min(vals)


def a_gap(table: RateTable | Mapping[str, float]) -> float:
    """False-match discrepancy over homogeneous cells only.

    ``table`` is a :class:`RateTable` or a mapping demographic -> homogeneous
    FMR (absent demographics omitted).
    """
    cells = table.homogeneous_fmr() if isinstance(table, RateTable) else dict(table)
    if not cells:
        raise NoHomogeneousCells("no homogeneous FMR cell present")
    return max_gap(cells.values())


def b_gap(table: RateTable | Mapping[str, float]) -> float:
    """False-non-match discrepancy across demographics."""
    cells = table.per_demo_fnmr if isinstance(table, RateTable) else dict(table)
    if not cells:
        raise NoGenuineCells("no FNMR cell present")
    return max_gap(cells.values())


def fdr(a_gap: float, b_gap: float, alpha: float = DEFAULT_ALPHA) -> float:
    a = _unit("a_gap", a_gap)
    b = _unit("b_gap", b_gap)
    alpha = _unit("alpha", alpha)
    return 1.0 - (alpha * a + (1.0 - alpha) * b)


@dataclass(frozen=True)
class Verdict:
    fair: bool
    epsilon: float
    fdr: float


def verdict(fdr_value: float, epsilon: float) -> Verdict:
    """Fair iff ``fdr_value >= 1 - epsilon`` (boundary inclusive)."""
    fdr_value = _unit("fdr", fdr_value)
    epsilon = _unit("epsilon", epsilon)
    return Verdict(fdr_value >= 1.0 - epsilon - _VERDICT_ATOL, epsilon, fdr_value)


@dataclass(frozen=True)
class FdrPoint:
    exponent: float
    threshold: Threshold
    a_gap: float
    b_gap: float
    fdr: float
    alpha: float


@dataclass(frozen=True)
class FdrCurve:
    """FDR over an operating grid.

    ``aufdr`` is None when the grid has a single point; whenever it is
    reported, ``exponent_range`` must be reported alongside it.
    """

    points: tuple[FdrPoint, ...]
    alpha: float
    aufdr: float | None
    exponent_range: tuple[float, float]

    @property
    def exponents(self) -> list[float]:
        return [p.exponent for p in self.points]

    @property
    def values(self) -> list[float]:
        return [p.fdr for p in self.points]


def area_under_curve(exponents: Sequence[float], values: Sequence[float]) -> float:
    """Trapezoidal area with the exponent axis rescaled onto [0, 1]."""
    xs = np.asarray(exponents, dtype=np.float64)
    ys = np.asarray(values, dtype=np.float64)
    if len(xs) < 2:
        raise TooFewPoints(f"area needs at least 2 points, got {len(xs)}")
    if len(xs) != len(ys):
        raise ValueError("exponents and values differ in length")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("exponents must be strictly increasing")
    u = (xs - xs[0]) / (xs[-1] - xs[0])
    return float(np.trapezoid(ys, u))


def area_under_fdr(curve: FdrCurve) -> float:
    """Area under FDR against x, x rescaled so the grid spans [0, 1]."""
    return area_under_curve(curve.exponents, curve.values)


@dataclass(frozen=True)
class GridEvaluation:
    """Thresholds and test-set rate tables for every grid exponent.

    Thresholds never depend on alpha, so one evaluation serves any number
    of curves.
    """

    grid: OperatingPointGrid
    thresholds: tuple[Threshold, ...]
    tables: tuple[RateTable, ...]
    a_gaps: tuple[float, ...]
    b_gaps: tuple[float, ...]
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def all_degenerate(self) -> bool:
        return all(t.degenerate for t in self.thresholds)

    def curve(self, alpha: float = DEFAULT_ALPHA) -> FdrCurve:
        alpha = _unit("alpha", alpha)
        points = tuple(
            FdrPoint(x, t, a, b, fdr(a, b, alpha), alpha)
            for x, t, a, b in zip(self.grid, self.thresholds, self.a_gaps, self.b_gaps)
        )
        xs = self.grid.exponents
        aufdr = area_under_curve(xs, [p.fdr for p in points]) if len(points) >= 2 else None
        return FdrCurve(points, alpha, aufdr, (xs[0], xs[-1]))


def evaluate_grid(data: SplitDataset, grid: OperatingPointGrid) -> GridEvaluation:
    """Calibrate on pooled dev impostors and tabulate test rates per exponent."""
    sorted_dev = np.sort(data.dev.impostor_scores(), kind="stable")
    thresholds, tables, a_gaps, b_gaps = [], [], [], []
    diagnostics: list[str] = []
    if data.unseen_test_labels:
        diagnostics.append(
            f"test demographics absent from dev are still evaluated: {sorted(data.unseen_test_labels)}"
        )
    for x in grid:
        t = calibrate_sorted(sorted_dev, x)
        if t.degenerate:
            diagnostics.append(
                f"x={x:g}: target FMR {t.target_fmr:g} finer than 1/{len(sorted_dev)} dev impostors; "
                f"reject-all threshold used"
            )
        table = rate_table(data.test, t)
        thresholds.append(t)
        tables.append(table)
        a_gaps.append(a_gap(table))
        b_gaps.append(b_gap(table))
    seen = set()
    for table in tables:
        for d in table.diagnostics:
            if d not in seen:
                seen.add(d)
                diagnostics.append(d)
    return GridEvaluation(grid, tuple(thresholds), tuple(tables),
                          tuple(a_gaps), tuple(b_gaps), tuple(diagnostics))


def fdr_curve(data: SplitDataset, grid: OperatingPointGrid, alpha: float = DEFAULT_ALPHA) -> FdrCurve:
    return evaluate_grid(data, grid).curve(alpha)


def alpha_sweep(data: SplitDataset | GridEvaluation, grid: OperatingPointGrid | None = None,
                alphas: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0)) -> dict[float, float]:
    """Area under FDR for each alpha, reusing one set of thresholds."""
    for a in alphas:
        _unit("alpha", a)
    if isinstance(data, GridEvaluation):
        evaluation = data
    else:
        if grid is None:
            raise ValueError("grid is required when passing a dataset")
        evaluation = evaluate_grid(data, grid)
    if len(evaluation.grid) < 2:
        raise TooFewPoints("alpha sweep needs a grid of at least 2 exponents")
    return {float(a): evaluation.curve(a).aufdr for a in alphas}
