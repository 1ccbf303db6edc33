"""
Choosing the most discriminative part of the season
===================================================

Corn and cotton look alike once both canopies close and again after
harvest. The pivot day is where the class medians differ most. Intervals
grown outward from it are scored with DTW, and the window stops on each side
where the score curve goes flat.
"""

import io

import numpy as np

from phenowarp.simulate import benchmark
from phenowarp.window import WindowPolicy, class_profiles, select_window, write_score_curve

samples = [s for s in benchmark("S4", n_per_class=200, seed=3) if s.year == 1]
profiles = class_profiles(samples)
for name, p in profiles.items():
    print(f"{name:>7} median peaks at day {p.days[np.argmax(p.values)]:g}")

result = select_window(samples)
o1, o2 = result.window
n_total = len(samples[0].series)
n_kept = int(np.sum((samples[0].series.days >= o1) & (samples[0].series.days <= o2)))
print(f"\npivot day {result.pivot:g}; window [{o1:g}, {o2:g}] keeps {n_kept} of {n_total} samples")

# %% the score curves behind the decision, ready for plotting
buf = io.StringIO()
write_score_curve(result.scores, buf)
lines = buf.getvalue().splitlines()
print("\n" + "\n".join(lines[:4] + ["..."] + lines[-3:]))

# %% the union policy keeps every pair's window; with two classes it is the same
print("\nunion policy:", select_window(samples, WindowPolicy(mode="union")).window)
