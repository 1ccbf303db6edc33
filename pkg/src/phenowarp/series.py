"""Core data model: quality flags, vegetation-index series and time grids."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import ParameterError, ValidationError


class QualityFlag(enum.Enum):
    CLEAR = "clear"
    CLOUD = "cloud"
    SHADOW = "shadow"

    @classmethod
    def parse(cls, text: str) -> "QualityFlag":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(
                f"unknown quality flag {text!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


@dataclass(frozen=True, eq=False)
class Series:
    """A vegetation-index trajectory sampled on strictly increasing days.

    Parameters
    ----------
    days : array_like
        Day-of-year of each sample. Must be strictly increasing.
    values : array_like
        Index value of each sample.
    flags : sequence of QualityFlag, optional
        Per-sample quality. Defaults to all clear.
    """

    days: np.ndarray
    values: np.ndarray
    flags: tuple = field(default=None)

    def __post_init__(self):
        days = np.asarray(self.days, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if days.shape != values.shape:
            raise ValidationError(
                f"days and values differ in length ({days.size} vs {values.size})"
            )
        if days.size > 1 and np.any(np.diff(days) <= 0):
            raise ValidationError("series days must be strictly increasing")
        flags = self.flags
        if flags is None:
            flags = (QualityFlag.CLEAR,) * days.size
        else:
            flags = tuple(
                f if isinstance(f, QualityFlag) else QualityFlag.parse(f) for f in flags
            )
        if len(flags) != days.size:
            raise ValidationError("flags and days differ in length")
        days.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "days", days)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "flags", flags)

    def __len__(self):
        return self.days.size

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            np.array_equal(self.days, other.days)
            and np.array_equal(self.values, other.values)
            and self.flags == other.flags
        )

    __hash__ = None

    @property
    def clear_mask(self) -> np.ndarray:
        return np.array([f is QualityFlag.CLEAR for f in self.flags], dtype=bool)

    def with_values(self, values, flags=None) -> "Series":
        return Series(self.days, values, self.flags if flags is None else flags)

    def scaled(self, gain: float) -> "Series":
        """Return the series with every value multiplied by `gain`."""
        return self.with_values(self.values * gain)


@dataclass(frozen=True)
class TimeGrid:
    """Regular day grid ``t_l, t_l + step, ...`` not exceeding ``t_u``."""

    t_l: float
    t_u: float
    step: float = 1

    def __post_init__(self):
        if not self.t_l < self.t_u:
            raise ParameterError(f"grid needs t_l < t_u, got [{self.t_l}, {self.t_u}]")
        if self.step < 1:
            raise ParameterError(f"grid step must be >= 1 day, got {self.step}")

    @property
    def days(self) -> np.ndarray:
        n = int(np.floor((self.t_u - self.t_l) / self.step + 1e-9)) + 1
        return self.t_l + self.step * np.arange(n, dtype=float)

    def __len__(self):
        return self.days.size


@dataclass(frozen=True)
class FieldSample:
    """One field observed in one year; the unit of classification."""

    field_id: str
    year: int
    series: Series
    label: Optional[str] = None

    def __post_init__(self):
        if len(self.series) < 1:
            raise ValidationError(f"field {self.field_id}/{self.year} has an empty series")

    @property
    def key(self):
        return (self.field_id, self.year)
