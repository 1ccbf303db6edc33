"""
Vegetation indices from band reflectance
========================================

Every index is a scalar built from two to four surface-reflectance bands.
MSAVI is the default for classification because it needs no soil-line
constant.
"""

import numpy as np

from phenowarp.vegindex import IndexKind, compute_index

# a green canopy and a bare soil pixel
pixels = {
    "canopy": dict(blue=0.03, green=0.07, red=0.05, nir=0.45),
    "soil": dict(blue=0.10, green=0.14, red=0.20, nir=0.26),
}

print(f"{'index':<6}" + "".join(f"{name:>10}" for name in pixels))
for kind in IndexKind:
    row = [compute_index(kind, **bands) for bands in pixels.values()]
    print(f"{kind.value:<6}" + "".join(f"{v:>10.4f}" for v in row))

# the functions are vectorized, so a whole scene of reflectances works too
rng = np.random.default_rng(0)
red, nir = rng.uniform(0.02, 0.3, 5), rng.uniform(0.2, 0.6, 5)
print("\nMSAVI of five random pixels:", np.round(compute_index("MSAVI", red=red, nir=nir), 3))

# NDVI is a ratio, so a common brightness factor cancels out
print("NDVI(0.1, 0.5) =", compute_index("NDVI", red=0.1, nir=0.5))
print("NDVI(0.2, 1.0) =", compute_index("NDVI", red=0.2, nir=1.0))
