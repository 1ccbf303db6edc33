"""
The whole pipeline from the command line
========================================

Runs the ``phenowarp`` commands in sequence inside a temporary directory:
simulate two years, preprocess each, pick a window and classify. The same
steps work from a shell, e.g. ``phenowarp simulate --out sim``.
"""

import json
import pathlib
import tempfile

from phenowarp.cli import main

work = pathlib.Path(tempfile.mkdtemp(prefix="phenowarp-"))


def run(*argv):
    print("$ phenowarp", " ".join(map(str, argv)))
    code = main([str(a) for a in argv])
    assert code == 0, code


run("simulate", "--n-per-class", 60, "--seed", 5, "--cloud-fraction", 0.05, "--out", work / "sim")
for year in (1, 2):
    run("preprocess", "--observations", work / "sim" / f"year{year}.csv",
        "--labels", work / "sim" / "labels.csv", "--grid-step", 4, "--out", work / f"pre{year}")

# the two preprocessed years go into one dataset file
a = (work / "pre1" / "dataset.csv").read_text()
b = (work / "pre2" / "dataset.csv").read_text().split("\n", 1)[1]
(work / "dataset.csv").write_text(a + b)

# a config file holds the shared options; flags still override it
(work / "run.cfg").write_text(
    f"dataset = {work / 'dataset.csv'}\nlabels = {work / 'sim' / 'labels.csv'}\n"
    "train_year = 1\n# ten replications keep the demo quick\nreplications = 10\n"
)
run("select-window", "--dataset", work / "dataset.csv", "--labels", work / "sim" / "labels.csv",
    "--train-year", 1, "--out", work / "window")
run("classify", "--config", work / "run.cfg", "--test-year", 2, "--k", 10, "--out", work / "vdtw")
run("classify", "--config", work / "run.cfg", "--test-year", 2, "--k", 10,
    "--window-file", work / "window" / "window.json", "--out", work / "pvdtw")

for name in ("vdtw", "pvdtw"):
    report = json.loads((work / name / "metrics.json").read_text())
    print(f"{name}: OA {report['overall_accuracy']:.4f}")

run("distance", "--dataset", work / "dataset.csv", "--a", "corn-0000:1", "--b", "corn-0000:2")
print("outputs in", work)
