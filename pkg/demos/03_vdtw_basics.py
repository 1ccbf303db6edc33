"""
Vector DTW versus DTW and SAM
=============================

VDTW warps sequences of unit vectors built from consecutive sample pairs and
sums the angles between aligned vectors. Scaling a series by a positive gain
leaves every vector unchanged, so VDTW is blind to illumination changes while
keeping DTW's tolerance of sowing-date shifts.
"""

import math

import numpy as np

from phenowarp.distance import WarpConfig, cost_matrices, dtw, sam, twdtw, vdtw
from phenowarp.series import Series
from phenowarp.simulate import CORN

# %% a worked example small enough to check by hand
x = Series([1, 2, 3], [0.0, 1.0, 1.0])
y = Series([1, 2, 3], [1.0, 1.0, 0.0])
cm = cost_matrices(x, y, WarpConfig(band_days=None))
print("angles between pair vectors (radians):\n", np.round(cm.psi, 4))
print("accumulated costs:\n", np.round(cm.acc, 4))
print(f"VDTW = {cm.distance:.6f}  (pi/2 = {math.pi / 2:.6f})")

# %% gain: the same curve 20% brighter
days = np.arange(100, 301, 4.0)
base = Series(days, CORN.base(days))
bright = base.scaled(1.2)
# %% shift: the same curve sown 8 days later
late = Series(days, CORN.base(days - 8))

print(f"\n{'':>12}{'gain 1.2':>12}{'shift 8 d':>12}")
for name, fn in [("DTW", dtw), ("TWDTW", twdtw), ("SAM", sam), ("VDTW", vdtw)]:
    print(f"{name:>12}{fn(base, bright):>12.4f}{fn(base, late):>12.4f}")

# %% the band limits how far the alignment may stray, in days
for band in (0, 4, 8, 15):
    print(f"band {band:>2} days: VDTW(base, late) = {vdtw(base, late, WarpConfig(band_days=band)):.4f}")
