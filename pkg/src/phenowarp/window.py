"""Selection of the most discriminative time window between crop classes.

For two class median profiles the pivot day is where they differ most.
Expanding an interval outward from the pivot, the DTW score between the two
restricted profiles grows while the classes still differ and flattens once
they coincide. The window ends on each side where the score curve's first
and second differences vanish.
"""

from __future__ import annotations

import csv
import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .distance import Measure, WarpConfig, _accumulate, local_cost_matrix
from .exceptions import ParameterError, ValidationError
from .series import FieldSample, Series

logger = logging.getLogger(__name__)

Window = Tuple[float, float]


class WindowMode(str, enum.Enum):
    MIN_LENGTH = "min_length"
    UNION = "union"


@dataclass(frozen=True)
class WindowPolicy:
    """How boundaries are detected and pairwise windows combined.

    `eps1` and `eps2` are fractions of the score range; `smoothing` is the
    moving-average width (samples) applied to the score curves, and
    `run_length` the number of consecutive flat samples required.
    """

    mode: WindowMode = WindowMode.MIN_LENGTH
    eps1: float = 1e-2
    eps2: float = 1e-2
    smoothing: int = 3
    run_length: int = 3

    def __post_init__(self):
        object.__setattr__(self, "mode", WindowMode(self.mode))
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ParameterError("eps1 and eps2 must be positive")
        if self.smoothing < 1 or self.run_length < 1:
            raise ParameterError("smoothing and run_length must be >= 1")


@dataclass(frozen=True)
class ExpansionScores:
    """DTW scores of intervals grown from the pivot.

    ``left[k]`` scores ``[left_days[k], pivot]`` and ``right[k]`` scores
    ``[pivot, right_days[k]]``; index 0 is the pivot alone on both sides.
    """

    pivot: float
    left_days: np.ndarray
    left: np.ndarray
    right_days: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class WindowResult:
    pivot: float
    scores: ExpansionScores
    window: Window
    per_pair: Dict[Tuple[str, str], Window] = field(default_factory=dict)
    no_plateau: bool = False

    @property
    def length(self) -> float:
        return self.window[1] - self.window[0]


def _same_grid(a: Series, b: Series):
    if len(a) != len(b) or not np.array_equal(a.days, b.days):
        raise ValidationError("profiles must share the same grid")


def median_profile(samples: Sequence, grid=None) -> Series:
    """Pointwise median of series that share one grid.

    `samples` holds FieldSample or Series objects. When `grid` is given
    every series must lie on its days.
    """
    if not samples:
        raise ValidationError("cannot build a median profile of an empty class")
    series = [s.series if isinstance(s, FieldSample) else s for s in samples]
    days = series[0].days if grid is None else getattr(grid, "days", np.asarray(grid))
    for s in series:
        if len(s) != len(days) or not np.array_equal(s.days, days):
            raise ValidationError("all samples must be resampled to the same grid")
    return Series(days, np.median(np.stack([s.values for s in series]), axis=0))


def pivot_day(a: Series, b: Series) -> float:
    """Day of largest absolute difference; the earliest day wins ties."""
    _same_grid(a, b)
    return float(a.days[int(np.argmax(np.abs(a.values - b.values)))])


def _prefix_scores(x: Series, y: Series, cfg: WarpConfig) -> np.ndarray:
    # DTW of the prefixes [0..k] of both series is the diagonal of one DP
    acc = _accumulate(np.ascontiguousarray(local_cost_matrix(x, y, cfg)))
    return np.diag(acc).copy()


def _reverse(s: Series) -> Series:
    # mirrored days keep the band geometry and the increasing-day invariant
    return Series(-s.days[::-1], s.values[::-1])


def expansion_scores(
    a: Series, b: Series, pivot: float, cfg: WarpConfig = WarpConfig(measure=Measure.DTW)
) -> ExpansionScores:
    """Score every interval between the pivot and each other grid day.

    Scores use plain DTW with the band of `cfg` (its measure is ignored).
    """
    _same_grid(a, b)
    hits = np.flatnonzero(a.days == pivot)
    if hits.size != 1:
        raise ValidationError(f"pivot {pivot:g} is not a grid day")
    p = int(hits[0])
    cfg = cfg.replace(measure=Measure.DTW)
    ra = Series(a.days[p:], a.values[p:])
    rb = Series(b.days[p:], b.values[p:])
    la = _reverse(Series(a.days[: p + 1], a.values[: p + 1]))
    lb = _reverse(Series(b.days[: p + 1], b.values[: p + 1]))
    return ExpansionScores(
        pivot=float(pivot),
        left_days=a.days[: p + 1][::-1].copy(),
        left=_prefix_scores(la, lb, cfg),
        right_days=a.days[p:].copy(),
        right=_prefix_scores(ra, rb, cfg),
    )


def _moving_average(x: np.ndarray, width: int) -> np.ndarray:
    if width <= 1 or x.size == 0:
        return x.astype(float)
    half = width // 2
    csum = np.concatenate([[0.0], np.cumsum(x, dtype=float)])
    idx = np.arange(x.size)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, x.size)
    return (csum[hi] - csum[lo]) / (hi - lo)


def _first_flat(curve: np.ndarray, tol1: float, tol2: float, run: int) -> Optional[int]:
    """Index of the first point where the curve stays flat, scanning outward.

    Differences are one-sided in the scan direction. A point qualifies when
    its first difference (and second, where defined) are within tolerance,
    and so are those of the following ``run - 1`` points that have one.
    """
    n = curve.size
    if n == 1:
        return 0
    d1 = np.abs(np.diff(curve))
    d2 = np.abs(np.diff(curve, 2))
    flat = np.array(
        [d1[i] < tol1 and (i >= d2.size or d2[i] < tol2) for i in range(n - 1)], dtype=bool
    )
    for i in range(n - 1):
        if flat[i : i + run].all():
            return i
    return None


def optimal_window(scores: ExpansionScores, policy: WindowPolicy = WindowPolicy()):
    """Window boundaries from the expansion score curves.

    Returns
    -------
    window : (o1, o2)
        Boundary days. A side without a plateau falls back to its grid end.
    no_plateau : bool
        True if either side fell back.
    """
    left = _moving_average(scores.left, policy.smoothing)
    right = _moving_average(scores.right, policy.smoothing)
    both = np.concatenate([left, right])
    span = float(both.max() - both.min()) if both.size else 0.0
    scale = span if span > 0 else 1.0
    tol1, tol2 = policy.eps1 * scale, policy.eps2 * scale

    no_plateau = False
    bounds = []
    for curve, days in ((left, scores.left_days), (right, scores.right_days)):
        k = _first_flat(curve, tol1, tol2, policy.run_length)
        if k is None:
            no_plateau = True
            k = days.size - 1
        bounds.append(float(days[k]))
    if no_plateau:
        logger.info("no score plateau found on at least one side; using the grid end")
    return (bounds[0], bounds[1]), no_plateau


def combine_windows(windows: Iterable[Window], mode=WindowMode.MIN_LENGTH) -> Window:
    """Shortest window (first wins ties) or the hull of all windows."""
    windows = list(windows)
    if not windows:
        raise ValidationError("no windows to combine")
    if WindowMode(mode) is WindowMode.MIN_LENGTH:
        return min(windows, key=lambda w: w[1] - w[0])
    return (min(w[0] for w in windows), max(w[1] for w in windows))


def pair_window(a: Series, b: Series, policy=WindowPolicy(), cfg=WarpConfig(measure=Measure.DTW)):
    """Pivot, scores and window for one pair of class profiles."""
    pivot = pivot_day(a, b)
    scores = expansion_scores(a, b, pivot, cfg)
    window, flag = optimal_window(scores, policy)
    return WindowResult(pivot, scores, window, no_plateau=flag)


def multiclass_window(
    profiles: Mapping[str, Series],
    policy: WindowPolicy = WindowPolicy(),
    cfg: WarpConfig = WarpConfig(measure=Measure.DTW),
) -> WindowResult:
    """Combine the windows of every class pair according to ``policy.mode``.

    The reported pivot and score curves are those of the pair whose window
    is selected (``min_length``) or of the pair with the largest pivot
    difference (``union``).
    """
    if len(profiles) < 2:
        raise ValidationError("window selection needs at least 2 classes")
    results = {}
    for ca, cb in itertools.combinations(sorted(profiles), 2):
        results[(ca, cb)] = pair_window(profiles[ca], profiles[cb], policy, cfg)
    per_pair = {k: r.window for k, r in results.items()}
    window = combine_windows(per_pair.values(), policy.mode)
    if policy.mode is WindowMode.MIN_LENGTH:
        key = next(k for k, w in per_pair.items() if w == window)
    else:
        def gap(k):
            a, b = profiles[k[0]], profiles[k[1]]
            return float(np.max(np.abs(a.values - b.values)))
        key = max(results, key=gap)
    chosen = results[key]
    return WindowResult(
        pivot=chosen.pivot,
        scores=chosen.scores,
        window=window,
        per_pair=per_pair,
        no_plateau=any(r.no_plateau for r in results.values()),
    )


def class_profiles(samples: Iterable[FieldSample]) -> Dict[str, Series]:
    """Median profile of every labeled class."""
    by_class: Dict[str, list] = {}
    for s in samples:
        if s.label is None:
            continue
        by_class.setdefault(s.label, []).append(s.series)
    return {c: median_profile(v) for c, v in sorted(by_class.items())}


def select_window(
    samples: Iterable[FieldSample],
    policy: WindowPolicy = WindowPolicy(),
    cfg: WarpConfig = WarpConfig(measure=Measure.DTW),
) -> WindowResult:
    """Window from the median profiles of labeled training samples."""
    return multiclass_window(class_profiles(samples), policy, cfg)


def crop_series_to_window(series: Series, window: Window) -> Series:
    """Samples with ``o1 <= day <= o2``."""
    o1, o2 = window
    if o1 > o2:
        raise ValidationError(f"window start {o1:g} is after its end {o2:g}")
    if o2 < series.days[0] or o1 > series.days[-1]:
        raise ValidationError(
            f"window [{o1:g}, {o2:g}] lies outside the series span "
            f"[{series.days[0]:g}, {series.days[-1]:g}]"
        )
    keep = (series.days >= o1) & (series.days <= o2)
    if not keep.any():
        raise ValidationError(f"window [{o1:g}, {o2:g}] contains no samples")
    return Series(
        series.days[keep], series.values[keep], tuple(np.array(series.flags)[keep])
    )


def write_score_curve(scores: ExpansionScores, stream) -> None:
    """CSV ``day,score_left,score_right``; cells off a side are empty."""
    left = dict(zip(scores.left_days.tolist(), scores.left.tolist()))
    right = dict(zip(scores.right_days.tolist(), scores.right.tolist()))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["day", "score_left", "score_right"])
    for day in sorted(set(left) | set(right)):
        writer.writerow(
            [f"{day:g}", _fmt(left.get(day)), _fmt(right.get(day))]
        )


def _fmt(v):
    return "" if v is None else repr(float(v))
