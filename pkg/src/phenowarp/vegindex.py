"""Vegetation indices from surface reflectance.

All functions accept scalars or numpy arrays of reflectance in [0, 1].
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ParameterError


class IndexKind(str, enum.Enum):
    NDVI = "NDVI"
    SAVI = "SAVI"
    OSAVI = "OSAVI"
    MSAVI = "MSAVI"
    EVI = "EVI"
    WDRVI = "WDRVI"
    ENDVI = "ENDVI"

    @classmethod
    def parse(cls, value) -> "IndexKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ParameterError(
                f"unknown index {value!r}; expected one of {[k.value for k in cls]}"
            ) from None


@dataclass(frozen=True)
class IndexParams:
    """Constants of the parameterized indices (canonical literature values)."""

    savi_L: float = 0.5
    osavi_L: float = 0.16
    wdrvi_alpha: float = 0.2
    evi_G: float = 2.5
    evi_C1: float = 6.0
    evi_C2: float = 7.5
    evi_L: float = 1.0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.savi_L < 0:
            raise ParameterError("savi_L must be >= 0")


# indices that need each band
REQUIRED_BANDS = {
    IndexKind.NDVI: ("red", "nir"),
    IndexKind.SAVI: ("red", "nir"),
    IndexKind.OSAVI: ("red", "nir"),
    IndexKind.MSAVI: ("red", "nir"),
    IndexKind.WDRVI: ("red", "nir"),
    IndexKind.EVI: ("blue", "red", "nir"),
    IndexKind.ENDVI: ("blue", "green", "nir"),
}


def _ratio(num, den, name):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if np.any(den == 0):
        raise DomainError(f"{name}: zero denominator")
    out = num / den
    return out.item() if out.ndim == 0 else out


def ndvi(red, nir):
    return _ratio(np.subtract(nir, red), np.add(nir, red), "NDVI")


def savi(red, nir, L=0.5):
    red, nir = np.asarray(red, dtype=float), np.asarray(nir, dtype=float)
    return _ratio((1 + L) * (nir - red), nir + red + L, "SAVI")


def msavi(red, nir):
    """Modified SAVI with the self-calibrated soil line.

    ``(2 nir + 1 - sqrt((2 nir + 1)^2 - 8 (nir - red))) / 2``
    """
    red, nir = np.asarray(red, dtype=float), np.asarray(nir, dtype=float)
    radicand = (2 * nir + 1) ** 2 - 8 * (nir - red)
    if np.any(radicand < 0):
        raise DomainError("MSAVI: negative radicand")
    out = (2 * nir + 1 - np.sqrt(radicand)) / 2
    return out.item() if out.ndim == 0 else out


def evi(blue, red, nir, G=2.5, C1=6.0, C2=7.5, L=1.0):
    blue, red, nir = (np.asarray(b, dtype=float) for b in (blue, red, nir))
    return _ratio(G * (nir - red), nir + C1 * red - C2 * blue + L, "EVI")


def wdrvi(red, nir, alpha=0.2):
    red, nir = np.asarray(red, dtype=float), np.asarray(nir, dtype=float)
    return _ratio(alpha * nir - red, alpha * nir + red, "WDRVI")


def endvi(blue, green, nir):
    blue, green, nir = (np.asarray(b, dtype=float) for b in (blue, green, nir))
    return _ratio((nir + green) - 2 * blue, (nir + green) + 2 * blue, "ENDVI")


def compute_index(kind, blue=None, green=None, red=None, nir=None, params=IndexParams()):
    """Evaluate vegetation index `kind` from band reflectances.

    Raises
    ------
    DomainError
        On a zero denominator or a negative MSAVI radicand.
    ParameterError
        If a band required by `kind` is missing.
    """
    kind = IndexKind.parse(kind)
    bands = dict(blue=blue, green=green, red=red, nir=nir)
    missing = [b for b in REQUIRED_BANDS[kind] if bands[b] is None]
    if missing:
        raise ParameterError(f"{kind.value} needs bands {missing}")
    if kind is IndexKind.NDVI:
        return ndvi(red, nir)
    if kind is IndexKind.SAVI:
        return savi(red, nir, params.savi_L)
    if kind is IndexKind.OSAVI:
        return savi(red, nir, params.osavi_L)
    if kind is IndexKind.MSAVI:
        return msavi(red, nir)
    if kind is IndexKind.EVI:
        return evi(blue, red, nir, params.evi_G, params.evi_C1, params.evi_C2, params.evi_L)
    if kind is IndexKind.WDRVI:
        return wdrvi(red, nir, params.wdrvi_alpha)
    return endvi(blue, green, nir)
