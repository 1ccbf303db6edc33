"""Series preprocessing: cloud-gap filling, smoothing and resampling.

The usual order is fill -> smooth -> resample (see :func:`prepare`).
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .exceptions import (
    CoverageError,
    EmptyIntersectionError,
    ParameterError,
    UnfillableError,
    ValidationError,
)
from .series import QualityFlag, Series, TimeGrid

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# cloud gap filling


def fill_cloud_gaps_idw(series: Series) -> Series:
    """Replace non-clear samples by inverse-day-distance weighting.

    Each cloudy or shadowed sample takes the weighted mean of the nearest
    clear sample on either side, with weights ``1 / |dt|`` in days. When only
    one side has a clear sample its value is copied. Clear samples are left
    untouched and every output flag is clear.
    """
    clear = series.clear_mask
    if not clear.any():
        raise UnfillableError("series has no clear sample to fill from")
    days, values = series.days, series.values.copy()
    clear_idx = np.flatnonzero(clear)
    for i in np.flatnonzero(~clear):
        pos = np.searchsorted(clear_idx, i)
        left = clear_idx[pos - 1] if pos > 0 else None
        right = clear_idx[pos] if pos < clear_idx.size else None
        if left is None:
            values[i] = series.values[right]
        elif right is None:
            values[i] = series.values[left]
        else:
            wl = 1.0 / abs(days[i] - days[left])
            wr = 1.0 / abs(days[right] - days[i])
            values[i] = (series.values[left] * wl + series.values[right] * wr) / (wl + wr)
    return Series(days, values, (QualityFlag.CLEAR,) * len(series))


# ---------------------------------------------------------------------------
# Savitzky-Golay


@functools.lru_cache(maxsize=64)
def _sg_weights(n: int, window: int, order: int) -> np.ndarray:
    # row i holds the weights that produce smoothed sample i
    half = window // 2
    weights = np.zeros((n, n))
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        offsets = np.arange(lo, hi) - i
        deg = min(order, hi - lo - 1)
        vander = np.vander(offsets.astype(float), deg + 1, increasing=True)
        # constant term of the least-squares polynomial = value at the center
        weights[i, lo:hi] = np.linalg.pinv(vander)[0]
    weights.setflags(write=False)
    return weights


def savitzky_golay(series: Series, window: int = 5, order: int = 2) -> Series:
    """Savitzky-Golay smoothing by sample index.

    Each value is replaced by the degree-`order` least-squares polynomial
    fitted over the `window` samples centered on it, evaluated at the center.
    Near the ends the window is truncated to the available samples.

    Parameters
    ----------
    series : Series
        Gap-filled input; samples are treated uniformly by index.
    window : int
        Odd window length in samples, ``order < window <= len(series)``.
    order : int
        Polynomial degree.
    """
    n = len(series)
    if window % 2 != 1 or window < 1:
        raise ParameterError(f"window must be an odd positive integer, got {window}")
    if not 0 <= order < window:
        raise ParameterError(f"order must satisfy 0 <= order < window, got {order}")
    if window > n:
        raise ParameterError(f"window {window} exceeds the series length {n}")
    smoothed = _sg_weights(n, window, order) @ series.values
    return series.with_values(smoothed)


# ---------------------------------------------------------------------------
# double sigmoid


@dataclass(frozen=True)
class SigmoidParams:
    """Double-logistic phenology curve.

    ``f(t) = v_min + (v_max - v_min) * max(0, s(m1 (t - s1)) - s(m2 (t - s2)))``
    with ``s`` the logistic function: green-up around day `s1` and senescence
    around day `s2`.
    """

    v_min: float
    v_max: float
    s1: float
    s2: float
    m1: float
    m2: float
    degraded: bool = False

    def __post_init__(self):
        if not self.s1 < self.s2:
            raise ParameterError(f"need s1 < s2, got {self.s1}, {self.s2}")
        if not (self.m1 > 0 and self.m2 > 0):
            raise ParameterError("slopes m1, m2 must be positive")
        if not self.v_max >= self.v_min:
            raise ParameterError("need v_max >= v_min")

    def __call__(self, t):
        return self.v_min + (self.v_max - self.v_min) * _shape(
            np.asarray(t, dtype=float), self.s1, self.s2, self.m1, self.m2
        )


def _shape(t, s1, s2, m1, m2):
    # clipped at 0 so that unequal slopes cannot dip below v_min
    return np.maximum(expit(m1 * (t - s1)) - expit(m2 * (t - s2)), 0.0)


def eval_double_sigmoid(params: SigmoidParams, grid) -> Series:
    """Evaluate `params` on every day of `grid` (a TimeGrid or day array)."""
    days = grid.days if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    return Series(days, params(days))


def _levels(h, y):
    # closed-form least squares for y ~ v_min + (v_max - v_min) * h
    hc = h - h.mean()
    denom = hc @ hc
    amp = (hc @ (y - y.mean())) / denom if denom > 1e-12 else 0.0
    amp = max(amp, 0.0)
    base = y.mean() - amp * h.mean()
    return base, base + amp


def fit_double_sigmoid(
    series: Series, max_iter: int = 500, tol: float = 1e-8, slope: float = 0.1
) -> SigmoidParams:
    """Least-squares double-logistic fit.

    A coarse grid over the inflection days ``(s1, s2)`` with closed-form
    levels gives the starting point, which Nelder-Mead then refines. If the
    refinement does not improve the residual the starting point is returned
    with ``degraded=True``.
    """
    if len(series) < 7:
        raise ValidationError("double sigmoid fit needs at least 7 samples")
    t, y = series.days, series.values
    span = t[-1] - t[0]
    cands = np.linspace(t[0], t[-1], 13)

    def rmse(p):
        return float(np.sqrt(np.mean((p(t) - y) ** 2)))

    best, best_err = None, np.inf
    for s1 in cands:
        for s2 in cands[cands > s1]:
            h = _shape(t, s1, s2, slope, slope)
            lo, hi = _levels(h, y)
            p = SigmoidParams(lo, hi, s1, s2, slope, slope)
            err = rmse(p)
            if err < best_err:
                best, best_err = p, err

    def unpack(z):
        s1, gap, lm1, lm2 = z[2], np.exp(z[3]), z[4], z[5]
        return SigmoidParams(
            z[0], z[0] + abs(z[1]), s1, s1 + gap, np.exp(lm1), np.exp(lm2)
        )

    def objective(z):
        if not np.all(np.isfinite(z)) or abs(z[4]) > 20 or abs(z[5]) > 20:
            return np.inf
        p = unpack(z)
        return float(np.mean((p(t) - y) ** 2))

    z0 = np.array(
        [best.v_min, best.v_max - best.v_min, best.s1,
         np.log(best.s2 - best.s1), np.log(best.m1), np.log(best.m2)]
    )
    res = minimize(
        objective, z0, method="Nelder-Mead",
        options=dict(maxiter=max_iter, xatol=1e-6 * max(span, 1.0), fatol=tol ** 2,
                     adaptive=True),
    )
    try:
        refined = unpack(res.x)
    except ParameterError:
        refined = None
    if refined is None or not rmse(refined) < best_err:
        if best_err > tol:
            logger.debug("double sigmoid refinement did not improve the grid fit")
            return SigmoidParams(
                best.v_min, best.v_max, best.s1, best.s2, best.m1, best.m2, degraded=True
            )
        return best
    return refined


# ---------------------------------------------------------------------------
# time grids and resampling


def common_grid(calendars: Iterable[Sequence[float]], step: float = 1) -> TimeGrid:
    """Largest interval covered by every year's acquisition calendar."""
    calendars = [np.asarray(c, dtype=float) for c in calendars]
    if not calendars:
        raise ValidationError("at least one calendar is required")
    for c in calendars:
        if c.size < 2:
            raise ValidationError("each calendar needs at least 2 acquisition days")
    t_l = max(c.min() for c in calendars)
    t_u = min(c.max() for c in calendars)
    if t_l >= t_u:
        raise EmptyIntersectionError(
            f"calendars do not overlap (latest start {t_l:g} >= earliest end {t_u:g})"
        )
    return TimeGrid(t_l, t_u, step)


def resample_linear(series: Series, grid: TimeGrid) -> Series:
    """Linearly interpolate `series` onto every day of `grid`."""
    days = grid.days
    if series.days[0] > days[0] or series.days[-1] < days[-1]:
        raise CoverageError(
            f"series spans [{series.days[0]:g}, {series.days[-1]:g}] but the grid "
            f"needs [{days[0]:g}, {days[-1]:g}]"
        )
    return Series(days, np.interp(days, series.days, series.values))


def prepare(
    series: Series,
    grid: TimeGrid,
    smoothing: str = "sg",
    sg_window: int = 5,
    sg_order: int = 2,
) -> Series:
    """Fill cloudy gaps, smooth, then resample onto `grid`.

    `smoothing` is ``"sg"``, ``"sigmoid"`` or ``"none"``. When a series is
    shorter than the SG window the window is reduced to the largest odd
    length that fits (and the order capped below it).
    """
    filled = fill_cloud_gaps_idw(series)
    if smoothing == "sg":
        window = min(sg_window, len(filled) if len(filled) % 2 else len(filled) - 1)
        if window >= 1:
            filled = savitzky_golay(filled, window, min(sg_order, window - 1))
    elif smoothing == "sigmoid":
        params = fit_double_sigmoid(filled)
        filled = filled.with_values(params(filled.days))
    elif smoothing != "none":
        raise ParameterError(f"unknown smoothing {smoothing!r}")
    return resample_linear(filled, grid)
