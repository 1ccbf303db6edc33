"""Elastic and angular distances between vegetation-index series.

Four measures are provided:

* ``SAM`` -- spectral angle between the two value vectors.
* ``DTW`` -- dynamic time warping over ``|x_i - y_j|``.
* ``TWDTW`` -- DTW with an additive logistic penalty on the day gap.
* ``VDTW`` -- DTW whose local cost is the angle between unit vectors built
  from consecutive value pairs ``(v[i-1], v[i])``. Multiplying a series by a
  positive gain leaves every such vector unchanged, so VDTW inherits SAM's
  insensitivity to illumination gain while keeping DTW's elasticity in time.

All warping variants share one dynamic program with the symmetric step
pattern ``d[i, j] = c[i, j] + min(d[i-1, j-1], d[i-1, j], d[i, j-1])`` and a
band expressed in days: cells whose acquisition days differ by more than
``band_days`` are excluded.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numba as nb
import numpy as np

from .exceptions import NoPathError, ParameterError, ValidationError
from .series import Series

_JIT = dict(nogil=True, cache=True)

# local-cost kernels understood by the compiled dynamic program
_ABS, _TIME_WEIGHTED, _ANGLE = 0, 1, 2


class Measure(str, enum.Enum):
    SAM = "SAM"
    DTW = "DTW"
    TWDTW = "TWDTW"
    VDTW = "VDTW"

    @classmethod
    def parse(cls, value) -> "Measure":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ParameterError(
                f"unknown measure {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class WarpConfig:
    """Distance selection and warping parameters.

    Attributes
    ----------
    measure : Measure
        Which distance to evaluate.
    band_days : float
        Half-width of the warping band in days; ``inf`` disables the band.
    twdtw_alpha, twdtw_beta : float
        Steepness (1/day) and midpoint (days) of the TWDTW logistic weight.
    zero_vector_eps : float
        Pair vectors with a raw norm below this are treated as degenerate.
    vector_mode : {"pair", "segment"}
        How VDTW builds its vectors. ``"pair"`` uses ``(v[i-1], v[i])`` and is
        the gain-invariant default; ``"segment"`` uses the time-value segment
        ``(day[i] - day[i-1], v[i] - v[i-1])`` and is kept for experiments.
    """

    measure: Measure = Measure.VDTW
    band_days: float = 15.0
    twdtw_alpha: float = 0.1
    twdtw_beta: float = 50.0
    zero_vector_eps: float = 1e-12
    vector_mode: str = "pair"

    def __post_init__(self):
        object.__setattr__(self, "measure", Measure.parse(self.measure))
        if self.band_days is None:
            object.__setattr__(self, "band_days", math.inf)
        if not self.band_days >= 0:
            raise ParameterError("band_days must be >= 0")
        if not self.twdtw_alpha > 0:
            raise ParameterError("twdtw_alpha must be > 0")
        if not self.zero_vector_eps > 0:
            raise ParameterError("zero_vector_eps must be > 0")
        if self.vector_mode not in ("pair", "segment"):
            raise ParameterError(f"unknown vector_mode {self.vector_mode!r}")

    def replace(self, **changes) -> "WarpConfig":
        params = {k: getattr(self, k) for k in self.__dataclass_fields__}
        params.update(changes)
        return WarpConfig(**params)


@dataclass(frozen=True)
class CostMatrices:
    """Local cost matrix ``psi`` and accumulated matrix ``acc`` of one alignment.

    Band-excluded cells hold ``inf`` in both matrices.
    """

    psi: np.ndarray
    acc: np.ndarray
    n: int
    m: int

    @property
    def distance(self) -> float:
        return float(self.acc[-1, -1])


# ---------------------------------------------------------------------------
# compiled kernels


@nb.njit(**_JIT)
def _unit_angle(ux, uy, vx, vy):
    # zero vectors mark degenerate pairs
    u_zero = ux == 0.0 and uy == 0.0
    v_zero = vx == 0.0 and vy == 0.0
    if u_zero and v_zero:
        return 0.0
    if u_zero or v_zero:
        return 0.5 * math.pi
    # 2*atan2(|u-v|, |u+v|) == arccos(u.v) for unit vectors, without the
    # loss of precision arccos suffers near 0 and pi
    dx = ux - vx
    dy = uy - vy
    sx = ux + vx
    sy = uy + vy
    return 2.0 * math.atan2(math.sqrt(dx * dx + dy * dy), math.sqrt(sx * sx + sy * sy))


@nb.njit(**_JIT)
def _local_cost(kind, xa, xb, xd, ya, yb, yd, alpha, beta):
    if kind == _ANGLE:
        return _unit_angle(xa, xb, ya, yb)
    c = abs(xa - ya)
    if kind == _TIME_WEIGHTED:
        c += 1.0 / (1.0 + math.exp(-alpha * (abs(xd - yd) - beta)))
    return c


@nb.njit(**_JIT)
def _warp(xa, xb, xd, n, ya, yb, yd, m, band, kind, alpha, beta, row, prev):
    """Final accumulated cost using two rolling rows of length ``m``."""
    inf = np.inf
    for i in range(n):
        for j in range(m):
            if abs(xd[i] - yd[j]) > band:
                row[j] = inf
                continue
            c = _local_cost(kind, xa[i], xb[i], xd[i], ya[j], yb[j], yd[j], alpha, beta)
            if i == 0 and j == 0:
                best = 0.0
            elif i == 0:
                best = row[j - 1]
            elif j == 0:
                best = prev[j]
            else:
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if row[j - 1] < best:
                    best = row[j - 1]
            row[j] = c + best
        for j in range(m):
            prev[j] = row[j]
    return prev[m - 1]


@nb.njit(**_JIT)
def _accumulate(psi):
    n, m = psi.shape
    acc = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            c = psi[i, j]
            if i == 0 and j == 0:
                best = 0.0
            elif i == 0:
                best = acc[i, j - 1]
            elif j == 0:
                best = acc[i - 1, j]
            else:
                best = acc[i - 1, j - 1]
                if acc[i - 1, j] < best:
                    best = acc[i - 1, j]
                if acc[i, j - 1] < best:
                    best = acc[i, j - 1]
            acc[i, j] = c + best
    return acc


@nb.njit(**_JIT)
def _pairwise_rows(XA, XB, XD, xlen, YA, YB, YD, ylen, band, kind, alpha, beta, lo, hi, out):
    row = np.empty(YA.shape[1])
    prev = np.empty(YA.shape[1])
    for i in range(lo, hi):
        for j in range(YA.shape[0]):
            out[i, j] = _warp(
                XA[i], XB[i], XD[i], xlen[i], YA[j], YB[j], YD[j], ylen[j],
                band, kind, alpha, beta, row, prev,
            )


# ---------------------------------------------------------------------------
# vector construction and local costs


def pair_vectors(x: Series, eps: float = 1e-12, mode: str = "pair"):
    """Unit vectors built from consecutive samples of `x`.

    For ``i = 1 .. n-1`` (zero-based) the raw vector is ``(v[i-1], v[i])``
    (or the time-value segment in ``"segment"`` mode), normalized to unit
    length.

    Returns
    -------
    units : ndarray, shape (n - 1, 2)
        Unit vectors. Degenerate rows are exactly ``(0, 0)``.
    degenerate : ndarray of bool, shape (n - 1,)
        True where the raw vector norm is below `eps`.
    """
    if len(x) < 2:
        raise ValidationError("pair vectors need a series of at least 2 samples")
    v = x.values
    if mode == "pair":
        raw = np.column_stack([v[:-1], v[1:]])
    elif mode == "segment":
        raw = np.column_stack([np.diff(x.days), np.diff(v)])
    else:
        raise ParameterError(f"unknown vector_mode {mode!r}")
    norm = np.hypot(raw[:, 0], raw[:, 1])
    degenerate = norm < eps
    units = np.zeros_like(raw)
    ok = ~degenerate
    units[ok] = raw[ok] / norm[ok, None]
    return units, degenerate


def _operands(x: Series, cfg: WarpConfig):
    """Per-sample kernel inputs ``(a, b, days)`` for `x` under `cfg`."""
    if cfg.measure is Measure.VDTW:
        units, _ = pair_vectors(x, cfg.zero_vector_eps, cfg.vector_mode)
        # pair vector k belongs to sample k + 1
        return units[:, 0].copy(), units[:, 1].copy(), x.days[1:].copy()
    v = np.ascontiguousarray(x.values, dtype=float)
    return v, np.zeros_like(v), np.ascontiguousarray(x.days, dtype=float)


def _kind(cfg: WarpConfig) -> int:
    return {Measure.DTW: _ABS, Measure.TWDTW: _TIME_WEIGHTED, Measure.VDTW: _ANGLE}[
        cfg.measure
    ]


def time_weight(dt, alpha: float = 0.1, beta: float = 50.0):
    """Logistic TWDTW penalty ``1 / (1 + exp(-alpha * (|dt| - beta)))``."""
    dt = np.abs(np.asarray(dt, dtype=float))
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-alpha * (dt - beta)))


def _band_mask(dx, dy, band):
    return np.abs(dx[:, None] - dy[None, :]) > band


def angular_cost_matrix(x: Series, y: Series, cfg: WarpConfig = WarpConfig()) -> np.ndarray:
    """Angles between the pair vectors of `x` and `y`, shape ``(n-1, m-1)``.

    Entry ``[k, l]`` compares the vector ending at sample ``k + 1`` of `x`
    with the one ending at sample ``l + 1`` of `y`. Cells outside the day
    band are ``inf``; degenerate-vs-degenerate costs 0 and
    degenerate-vs-regular costs ``pi / 2``.
    """
    cfg = cfg.replace(measure=Measure.VDTW)
    xa, xb, xd = _operands(x, cfg)
    ya, yb, yd = _operands(y, cfg)
    psi = np.empty((xa.size, ya.size))
    for k in range(xa.size):
        for l in range(ya.size):
            psi[k, l] = _unit_angle(xa[k], xb[k], ya[l], yb[l])
    psi[_band_mask(xd, yd, cfg.band_days)] = np.inf
    return psi


def local_cost_matrix(x: Series, y: Series, cfg: WarpConfig) -> np.ndarray:
    """Local cost matrix for any warping measure (band cells set to ``inf``)."""
    if cfg.measure is Measure.VDTW:
        return angular_cost_matrix(x, y, cfg)
    if cfg.measure is Measure.SAM:
        raise ParameterError("SAM has no local cost matrix")
    psi = np.abs(x.values[:, None] - y.values[None, :])
    if cfg.measure is Measure.TWDTW:
        psi = psi + time_weight(
            x.days[:, None] - y.days[None, :], cfg.twdtw_alpha, cfg.twdtw_beta
        )
    psi[_band_mask(x.days, y.days, cfg.band_days)] = np.inf
    return psi


def accumulate(psi):
    """Accumulate a local cost matrix with the symmetric step pattern.

    The first row and column are running sums; every other cell adds its
    local cost to the cheapest of its three predecessors. The last cell is
    the minimum total cost over all monotone warping paths.

    Returns
    -------
    acc : ndarray
        Accumulated cost matrix (``inf`` where unreachable).
    distance : float
        ``acc[-1, -1]``.

    Raises
    ------
    NoPathError
        If the last cell is unreachable through finite cells.
    """
    psi = np.ascontiguousarray(psi, dtype=float)
    if psi.ndim != 2 or psi.size == 0:
        raise ValidationError("psi must be a non-empty 2-D matrix")
    if np.isnan(psi).any():
        raise ValidationError("psi contains NaN")
    acc = _accumulate(psi)
    final = float(acc[-1, -1])
    if not np.isfinite(final):
        raise NoPathError("no finite warping path within the band")
    return acc, final


def cost_matrices(x: Series, y: Series, cfg: WarpConfig = WarpConfig()) -> CostMatrices:
    """Both matrices of one alignment, for inspection and debugging."""
    psi = local_cost_matrix(x, y, cfg)
    acc = _accumulate(np.ascontiguousarray(psi))
    return CostMatrices(psi=psi, acc=acc, n=len(x), m=len(y))


# ---------------------------------------------------------------------------
# distances


def sam(x: Series, y: Series) -> float:
    """Spectral angle (radians) between the value vectors of `x` and `y`."""
    a = np.asarray(getattr(x, "values", x), dtype=float)
    b = np.asarray(getattr(y, "values", y), dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise ValidationError(f"SAM needs equal, non-zero lengths ({a.size} vs {b.size})")
    na, nb_ = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb_ == 0:
        raise ValidationError("SAM is undefined for an all-zero vector")
    ua, ub = a / na, b / nb_
    # same value as arccos(clip(cos, -1, 1)), accurate near 0 and pi
    return float(2.0 * np.arctan2(np.linalg.norm(ua - ub), np.linalg.norm(ua + ub)))


def _check_lengths(x, y, minimum):
    if len(x) < minimum or len(y) < minimum:
        raise ValidationError(f"series must have at least {minimum} samples")


def _run(x: Series, y: Series, cfg: WarpConfig) -> float:
    xa, xb, xd = _operands(x, cfg)
    ya, yb, yd = _operands(y, cfg)
    row, prev = np.empty(ya.size), np.empty(ya.size)
    d = _warp(
        xa, xb, xd, xa.size, ya, yb, yd, ya.size, float(cfg.band_days),
        _kind(cfg), float(cfg.twdtw_alpha), float(cfg.twdtw_beta), row, prev,
    )
    if not np.isfinite(d):
        raise NoPathError("no finite warping path within the band")
    return float(d)


def vdtw(x: Series, y: Series, cfg: WarpConfig = WarpConfig()) -> float:
    """Vector dynamic time warping distance (radians, summed along the path)."""
    _check_lengths(x, y, 2)
    return _run(x, y, cfg.replace(measure=Measure.VDTW))


def dtw(x: Series, y: Series, cfg: WarpConfig = WarpConfig(measure=Measure.DTW)) -> float:
    """Banded DTW over absolute value differences."""
    _check_lengths(x, y, 1)
    return _run(x, y, cfg.replace(measure=Measure.DTW))


def twdtw(x: Series, y: Series, cfg: WarpConfig = WarpConfig(measure=Measure.TWDTW)) -> float:
    """Time-weighted DTW: ``|dv| + time_weight(dt)`` as local cost."""
    _check_lengths(x, y, 1)
    return _run(x, y, cfg.replace(measure=Measure.TWDTW))


def distance(x: Series, y: Series, cfg: WarpConfig) -> float:
    """Dispatch on ``cfg.measure``."""
    if cfg.measure is Measure.SAM:
        return sam(x, y)
    return {Measure.DTW: dtw, Measure.TWDTW: twdtw, Measure.VDTW: vdtw}[cfg.measure](
        x, y, cfg
    )


def _pack(series: Sequence[Series], cfg: WarpConfig):
    ops = [_operands(s, cfg) for s in series]
    lens = np.array([o[0].size for o in ops], dtype=np.int64)
    width = max(int(lens.max()), 1)
    A = np.zeros((len(ops), width))
    B = np.zeros((len(ops), width))
    D = np.zeros((len(ops), width))
    for k, (a, b, d) in enumerate(ops):
        A[k, : a.size], B[k, : a.size], D[k, : a.size] = a, b, d
    return A, B, D, lens


def pairwise(
    xs: Sequence[Series], ys: Sequence[Series], cfg: WarpConfig, threads: int = 1
) -> np.ndarray:
    """Distance matrix ``out[i, j] = distance(xs[i], ys[j])``.

    Unreachable pairs (band-blocked) are ``inf`` rather than an error so that
    callers can decide. Rows are split across `threads` worker threads; each
    cell is computed independently, so the result does not depend on the
    thread count.
    """
    out = np.empty((len(xs), len(ys)))
    if not len(xs) or not len(ys):
        return out
    if cfg.measure is Measure.SAM:
        X = np.array([s.values for s in xs], dtype=float)
        Y = np.array([s.values for s in ys], dtype=float)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
            raise ValidationError("SAM needs all series on one common grid")
        Xu = X / np.linalg.norm(X, axis=1, keepdims=True)
        Yu = Y / np.linalg.norm(Y, axis=1, keepdims=True)
        for i in range(len(xs)):
            diff = np.linalg.norm(Xu[i] - Yu, axis=1)
            summ = np.linalg.norm(Xu[i] + Yu, axis=1)
            out[i] = 2.0 * np.arctan2(diff, summ)
        return out
    minimum = 2 if cfg.measure is Measure.VDTW else 1
    if min(len(s) for s in list(xs) + list(ys)) < minimum:
        raise ValidationError(f"series must have at least {minimum} samples")
    XA, XB, XD, xl = _pack(xs, cfg)
    YA, YB, YD, yl = _pack(ys, cfg)
    args = (
        XA, XB, XD, xl, YA, YB, YD, yl, float(cfg.band_days), _kind(cfg),
        float(cfg.twdtw_alpha), float(cfg.twdtw_beta),
    )
    threads = max(1, int(threads))
    if threads == 1:
        _pairwise_rows(*args, 0, len(xs), out)
        return out
    bounds = np.linspace(0, len(xs), threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        jobs = [
            pool.submit(_pairwise_rows, *args, int(lo), int(hi), out)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for job in jobs:
            job.result()
    return out
