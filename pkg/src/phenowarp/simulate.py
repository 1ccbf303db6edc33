"""Synthetic phenologies and shift/gain perturbation scenarios.

A synthetic field is a double-logistic curve whose inflection days are
jittered (sowing date), scaled by a random gain and overlaid with Gaussian
noise. A :class:`Scenario` then perturbs a whole "year": systematic and
per-field random day shifts, multiplicative gain, additive offset, extra noise
and optionally cloud-flagged samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .exceptions import CoverageError, ParameterError
from .preprocess import SigmoidParams
from .series import FieldSample, QualityFlag, Series, TimeGrid

logger = logging.getLogger(__name__)

CLIP_RANGE = (-0.2, 1.0)


@dataclass(frozen=True)
class ClassSpec:
    """Generative model of one crop class."""

    name: str
    base: SigmoidParams
    sowing_jitter: float = 0.0
    gain_range: tuple = (1.0, 1.0)
    noise: float = 0.0

    def __post_init__(self):
        lo, hi = self.gain_range
        if self.sowing_jitter < 0 or self.noise < 0:
            raise ParameterError("jitter and noise must be non-negative")
        if not 0 < lo <= hi:
            raise ParameterError(f"gain range must satisfy 0 < lo <= hi, got {self.gain_range}")


@dataclass(frozen=True)
class Scenario:
    """Year-level perturbation.

    Every field gets a day shift ``shift_days + U(-shift_spread, shift_spread)``
    and a gain ``gain * U(1 - gain_spread, 1 + gain_spread)``; values become
    ``gain * value + offset + N(0, noise)``. A fraction `cloud_fraction` of
    samples may additionally be flagged as cloud.
    """

    shift_days: float = 0.0
    gain: float = 1.0
    offset: float = 0.0
    noise: float = 0.0
    shift_spread: float = 0.0
    gain_spread: float = 0.0
    cloud_fraction: float = 0.0

    def __post_init__(self):
        if not self.gain > 0:
            raise ParameterError("scenario gain must be > 0")
        if not 0 <= self.gain_spread < 1:
            raise ParameterError("gain_spread must lie in [0, 1)")
        if self.shift_spread < 0 or self.noise < 0:
            raise ParameterError("shift_spread and noise must be non-negative")
        if not 0 <= self.cloud_fraction < 1:
            raise ParameterError("cloud_fraction must lie in [0, 1)")

    @property
    def is_identity(self) -> bool:
        return self == Scenario()

    def draw(self, rng: np.random.Generator):
        """Per-field ``(shift, gain)`` realization."""
        shift = self.shift_days
        if self.shift_spread:
            shift += rng.uniform(-self.shift_spread, self.shift_spread)
        gain = self.gain
        if self.gain_spread:
            gain *= rng.uniform(1 - self.gain_spread, 1 + self.gain_spread)
        return shift, gain


IDENTITY = Scenario()

# shift-only, gain-only, gain + shift, gain + shift + noise
SCENARIOS = {
    "S0": IDENTITY,
    "S1": Scenario(shift_spread=10.0),
    "S2": Scenario(gain_spread=0.15),
    "S3": Scenario(shift_spread=10.0, gain_spread=0.15),
    "S4": Scenario(shift_spread=10.0, gain_spread=0.15, noise=0.02),
}

# corn sown late (second crop) and greening fast; cotton sown early with a
# long plateau; both senesce close together
CORN = ClassSpec(
    "corn",
    SigmoidParams(v_min=0.15, v_max=0.85, s1=195.0, s2=265.0, m1=0.15, m2=0.12),
    sowing_jitter=10.0,
    gain_range=(0.75, 1.25),
    noise=0.01,
)
COTTON = ClassSpec(
    "cotton",
    SigmoidParams(v_min=0.15, v_max=0.85, s1=160.0, s2=280.0, m1=0.08, m2=0.07),
    sowing_jitter=10.0,
    gain_range=(0.75, 1.25),
    noise=0.01,
)
DEFAULT_CLASSES = (CORN, COTTON)

# 8-day acquisitions over the season (27 dates)
ACQUISITION_GRID = TimeGrid(94, 306, 8)
# analysis grid after smoothing and resampling (50 days, 4-day step)
ANALYSIS_GRID = TimeGrid(102, 298, 4)
DEFAULT_GRID = ACQUISITION_GRID


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _days(grid) -> np.ndarray:
    return grid.days if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)


@dataclass(frozen=True)
class _Field:
    # one persistent synthetic field: jittered curve, field gain, noise draw
    params: SigmoidParams
    gain: float
    noise: np.ndarray

    def realize(self, days, shift=0.0, gain=1.0, offset=0.0, extra_noise=None):
        values = self.gain * self.params(days - shift) + self.noise
        values = gain * values + offset
        if extra_noise is not None:
            values = values + extra_noise
        return np.clip(values, *CLIP_RANGE)


def _draw_field(spec: ClassSpec, days: np.ndarray, rng) -> _Field:
    jitter = rng.normal(0.0, spec.sowing_jitter) if spec.sowing_jitter else 0.0
    params = replace(spec.base, s1=spec.base.s1 + jitter, s2=spec.base.s2 + jitter)
    lo, hi = spec.gain_range
    gain = rng.uniform(lo, hi) if hi > lo else lo
    noise = rng.normal(0.0, spec.noise, days.size) if spec.noise else np.zeros(days.size)
    return _Field(params, gain, noise)


def synth_profile(spec: ClassSpec, grid, seed=None) -> Series:
    """One synthetic series of class `spec` on `grid`, clipped to [-0.2, 1]."""
    days = _days(grid)
    f = _draw_field(spec, days, _rng(seed))
    return Series(days, f.realize(days))


def apply_scenario(series: Series, sc: Scenario, seed=None) -> Series:
    """Perturb an existing series by one realization of `sc`.

    The curve is delayed by the drawn shift and re-interpolated onto the
    original days (days left uncovered by the shifted support take the
    nearest edge value), then ``value <- gain * value + offset + noise``.

    Raises
    ------
    CoverageError
        If the shifted support no longer overlaps the original days.
    """
    rng = _rng(seed)
    shift, gain = sc.draw(rng)
    days, values = series.days, series.values
    if shift:
        src = days - shift
        if src[-1] < days[0] or src[0] > days[-1]:
            raise CoverageError(f"shift of {shift:g} days moves the series off its grid")
        values = np.interp(src, days, values)
    values = gain * values + sc.offset
    if sc.noise:
        values = values + rng.normal(0.0, sc.noise, values.size)
    flags = series.flags
    if sc.cloud_fraction:
        cloudy = rng.random(values.size) < sc.cloud_fraction
        flags = tuple(QualityFlag.CLOUD if c else f for c, f in zip(cloudy, flags))
    return Series(days, values, flags)


def generate_dataset(
    specs: Sequence[ClassSpec] = DEFAULT_CLASSES,
    n_per_class: int = 500,
    scenario_a: Scenario = IDENTITY,
    scenario_b: Scenario = SCENARIOS["S4"],
    grid=DEFAULT_GRID,
    seed: int = 0,
    years: tuple = (1, 2),
):
    """Two labeled synthetic "years" of the same fields.

    Each field's jittered curve, gain and noise are drawn once; year A and
    year B are the realizations of that field under `scenario_a` and
    `scenario_b`. Identical scenarios therefore give identical years.

    Returns
    -------
    year_a, year_b : list of FieldSample
    """
    if n_per_class < 1:
        raise ParameterError("n_per_class must be >= 1")
    days = _days(grid)
    root = np.random.SeedSequence(seed)
    field_ss, a_ss, b_ss = root.spawn(3)
    field_rng = np.random.default_rng(field_ss)
    out = ([], [])
    scen_rngs = (np.random.default_rng(a_ss), np.random.default_rng(b_ss))
    for spec in specs:
        for k in range(n_per_class):
            fld = _draw_field(spec, days, field_rng)
            fid = f"{spec.name}-{k:04d}"
            for year, sc, rng, sink in zip(years, (scenario_a, scenario_b), scen_rngs, out):
                shift, gain = sc.draw(rng)
                extra = rng.normal(0.0, sc.noise, days.size) if sc.noise else None
                values = fld.realize(days, shift, gain, sc.offset, extra)
                flags = None
                if sc.cloud_fraction:
                    cloudy = rng.random(days.size) < sc.cloud_fraction
                    flags = tuple(
                        QualityFlag.CLOUD if c else QualityFlag.CLEAR for c in cloudy
                    )
                sink.append(FieldSample(fid, year, Series(days, values, flags), spec.name))
    return out


def benchmark(
    scenario="S4",
    n_per_class: int = 500,
    seed: int = 2024,
    specs: Sequence[ClassSpec] = DEFAULT_CLASSES,
    acquisitions: TimeGrid = ACQUISITION_GRID,
    grid: TimeGrid = ANALYSIS_GRID,
    sg_window: int = 5,
    sg_order: int = 2,
):
    """Preprocessed two-year benchmark.

    Year 1 is the unperturbed season and year 2 the same fields under
    `scenario` (a name from :data:`SCENARIOS` or a :class:`Scenario`). Both
    years are simulated on `acquisitions`, Savitzky-Golay smoothed and
    resampled onto `grid`.

    Returns
    -------
    list of FieldSample
        Samples of both years (``year`` 1 and 2).
    """
    from .preprocess import prepare

    sc = SCENARIOS[scenario] if isinstance(scenario, str) else scenario
    year_a, year_b = generate_dataset(specs, n_per_class, IDENTITY, sc, acquisitions, seed)
    out = []
    for s in year_a + year_b:
        series = prepare(s.series, grid, "sg", sg_window, sg_order)
        out.append(FieldSample(s.field_id, s.year, series, s.label))
    return out
