"""
Training on one year, classifying the next
==========================================

Year 2 of the synthetic benchmark perturbs every field with a random gain,
a sowing shift and extra noise. Each measure classifies year 2 by 1-NN
against k labelled year-1 fields, repeated over stratified draws.
"""

from phenowarp.classify import ExperimentConfig, run_experiment
from phenowarp.distance import WarpConfig
from phenowarp.simulate import benchmark
from phenowarp.window import select_window

samples = benchmark("S4", n_per_class=150, seed=11)
window = select_window([s for s in samples if s.year == 1]).window

print(f"{'measure':<8}{'k=5':>8}{'k=50':>8}")
for measure in ("DTW", "TWDTW", "SAM", "VDTW"):
    row = []
    for k in (5, 50):
        cfg = ExperimentConfig(WarpConfig(measure=measure), k=k, replications=20, seed=1)
        row.append(run_experiment(cfg, samples).report.overall_accuracy)
    print(f"{measure:<8}" + "".join(f"{v:>8.4f}" for v in row))

cfg = ExperimentConfig(k=50, replications=20, seed=1, window=window)
res = run_experiment(cfg, samples)
print(f"\nPVDTW on [{window[0]:g}, {window[1]:g}]: OA {res.report.overall_accuracy:.4f}, "
      f"kappa {res.report.kappa:.4f}")
print("mean confusion (rows predicted, columns observed):")
print(res.mean_confusion.classes)
print(res.mean_confusion.counts.round(1))
