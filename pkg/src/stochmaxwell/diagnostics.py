"""Energy functional, L2 errors and convergence-order estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import FieldState, Grid, Medium


def _sumsq(a: np.ndarray) -> float:
    # np.sum over a contiguous 1-D buffer uses pairwise summation in a fixed order
    flat = np.ascontiguousarray(a).ravel()
    return float(np.sum(flat * flat))


def discrete_energy(state: FieldState, grid: Grid, medium: Medium) -> float:
    """``eps*||E||^2 + mu*||H||^2`` with the lattice norm ``h_x h_y h_z sum U^2``."""
    vol = grid.cell_volume
    return vol * (medium.eps * _sumsq(state.E) + medium.mu * _sumsq(state.H))


def l2_error(state: FieldState, reference: FieldState, grid: Grid) -> float:
    if state.data.shape != reference.data.shape:
        raise ValueError(f"shape mismatch {state.data.shape} vs {reference.data.shape}")
    return math.sqrt(grid.cell_volume * _sumsq(state.data - reference.data))


@dataclass(frozen=True)
class MeanSquareError:
    value: float
    stderr: float
    n: int

    def __float__(self):
        return self.value


def mean_square_error(per_path_errors: Sequence[float]) -> MeanSquareError:
    """``sqrt(mean(e^2))`` with a delta-method standard error.

    The standard error of the mean of ``e^2`` is propagated through the square
    root; it is 0 for a single sample.
    """
    e = np.asarray(per_path_errors, dtype=np.float64).ravel()
    if e.size == 0:
        raise ValueError("mean_square_error needs at least one sample")
    sq = e * e
    ms = float(np.mean(sq))
    value = math.sqrt(ms)
    if e.size < 2 or value == 0:
        return MeanSquareError(value, 0.0, int(e.size))
    se_ms = float(np.std(sq, ddof=1)) / math.sqrt(e.size)
    return MeanSquareError(value, se_ms / (2 * value), int(e.size))


@dataclass
class OrderTable:
    taus: list[float]
    errors: list[float]
    orders: list[float | None]
    stderrs: list[float] = field(default_factory=list)

    def rows(self):
        se = self.stderrs or [float("nan")] * len(self.taus)
        return list(zip(self.taus, self.errors, self.orders, se))


def convergence_orders(errors: Sequence[float], taus: Sequence[float] | None = None, stderrs=None) -> OrderTable:
    """Observed orders ``log2(err[j-1] / err[j])`` for step sizes halved row by row."""
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ValueError("need at least two error values")
    if any(not e > 0 for e in errors):
        raise ValueError(f"errors must be positive, got {errors}")
    if taus is None:
        taus = [2.0**-j for j in range(len(errors))]
    taus = [float(t) for t in taus]
    if len(taus) != len(errors):
        raise ValueError("taus and errors differ in length")
    for a, b in zip(taus, taus[1:]):
        if not math.isclose(a / b, 2.0, rel_tol=1e-12):
            raise ValueError(f"time steps must halve down the rows, got {taus}")
    orders = [None] + [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    return OrderTable(taus, errors, orders, list(stderrs) if stderrs is not None else [])


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    halfwidth: float  # 95% confidence half-width of the slope


def fit_order(taus: Sequence[float], errors: Sequence[float]) -> SlopeFit:
    """Least-squares slope of ``log2(error)`` against ``log2(tau)``."""
    x = np.log2(np.asarray(taus, dtype=np.float64))
    y = np.log2(np.asarray(errors, dtype=np.float64))
    if x.size < 2:
        raise ValueError("need at least two points to fit an order")
    X = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    halfwidth = float("nan")
    if x.size > 2:
        resid = y - X @ coef
        s2 = float(resid @ resid) / (x.size - 2)
        se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
        # two-sided 95% Student t quantiles for small dof
        t = {1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365, 8: 2.306}.get(x.size - 2, 1.96)
        halfwidth = t * se
    return SlopeFit(slope, intercept, halfwidth)
