import json
import math

import pytest

from phenowarp.cli import build_parser, main, read_config

HEADER = "field_id,year,doy,blue,green,red,nir,qa,vi\n"


def write(path, text):
    path.write_text(text)
    return str(path)


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """simulate -> preprocess (both years) -> merged dataset."""
    root = tmp_path_factory.mktemp("pipe")
    assert run("simulate", "--n-per-class", 15, "--seed", 4, "--scenario", "S2", "--out", root / "sim") == 0
    parts = []
    for year in (1, 2):
        out = root / f"pre{year}"
        assert run(
            "preprocess", "--observations", root / "sim" / f"year{year}.csv",
            "--labels", root / "sim" / "labels.csv", "--grid-step", 4, "--out", out,
        ) == 0
        parts.append((out / "dataset.csv").read_text())
    merged = parts[0] + parts[1].split("\n", 1)[1]
    return root, write(root / "all.csv", merged), str(root / "sim" / "labels.csv")


# ---------------------------------------------------------------------------
# parser and config


@pytest.mark.parametrize(
    "command", ["preprocess", "classify", "select-window", "simulate", "distance", "evaluate"]
)
def test_help_lists_flags(command, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "--config" in out
    if command != "distance":
        assert "--seed" in out and "--out" in out


def test_unknown_flag_is_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus", "1"])
    assert exc.value.code == 2


def test_read_config(tmp_path):
    cfg = write(tmp_path / "c.cfg", "# comment\nseed = 5  # trailing\nn-per-class=3\n\n")
    assert read_config(cfg) == {"seed": "5", "n_per_class": "3"}


def test_config_values_and_cli_override(tmp_path):
    cfg = write(tmp_path / "c.cfg", "seed = 5\nn_per_class = 2\nscenario = S1\n")
    assert run("simulate", "--config", cfg, "--out", tmp_path / "a") == 0
    assert run("simulate", "--config", cfg, "--seed", 6, "--out", tmp_path / "b") == 0
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert (ma["seed"], mb["seed"]) == (5, 6)
    assert ma["config"]["n_per_class"] == 2 and ma["config"]["scenario"] == "S1"
    assert "version" in ma


@pytest.mark.parametrize("text", ["bogus = 1\n", "seed\n", "scenario = S9\n"])
def test_bad_config(tmp_path, text, capsys):
    cfg = write(tmp_path / "c.cfg", text)
    assert run("simulate", "--config", cfg, "--out", tmp_path / "x") == 2
    assert "error" in capsys.readouterr().err


def test_build_parser_commands():
    sub = build_parser()._subparsers._group_actions[0].choices
    assert set(sub) == {"preprocess", "classify", "select-window", "simulate", "distance", "evaluate"}


# ---------------------------------------------------------------------------
# preprocess


def _obs(rows):
    return HEADER + "".join(rows)


def test_preprocess_reports_filled_gaps(tmp_path):
    rows = [f"F1,2013,{d},,,,,{'cloud' if d == 30 else 'clear'},0.{d // 10}\n" for d in range(10, 80, 10)]
    obs = write(tmp_path / "o.csv", _obs(rows))
    assert run("preprocess", "--observations", obs, "--out", tmp_path / "p") == 0
    report = json.loads((tmp_path / "p" / "preprocess_report.json").read_text())
    assert report["filled_gaps"] == 1
    assert report["grid"]["t_l"] == 10 and report["grid"]["t_u"] == 70
    clean = write(tmp_path / "c.csv", _obs(r.replace("cloud", "clear") for r in rows))
    assert run("preprocess", "--observations", clean, "--out", tmp_path / "q") == 0
    assert json.loads((tmp_path / "q" / "preprocess_report.json").read_text())["filled_gaps"] == 0


def test_preprocess_disjoint_years(tmp_path, capsys):
    rows = [f"F1,2013,{d},,,,,clear,0.3\n" for d in (100, 150)]
    rows += [f"F1,2014,{d},,,,,clear,0.3\n" for d in (200, 250)]
    obs = write(tmp_path / "o.csv", _obs(rows))
    assert run("preprocess", "--observations", obs, "--out", tmp_path / "p") == 2
    assert "do not overlap" in capsys.readouterr().err


def test_preprocess_drops_unfillable(tmp_path):
    rows = [f"F1,2013,{d},,,,,clear,0.3\n" for d in (10, 20, 30)]
    rows += [f"F2,2013,{d},,,,,cloud,0.3\n" for d in (10, 20, 30)]
    obs = write(tmp_path / "o.csv", _obs(rows))
    assert run("preprocess", "--observations", obs, "--out", tmp_path / "p") == 0
    report = json.loads((tmp_path / "p" / "preprocess_report.json").read_text())
    assert [d["field_id"] for d in report["dropped"]] == ["F2"]
    assert report["n_samples"] == 1


# ---------------------------------------------------------------------------
# pipeline commands


def test_classify_outputs_and_idempotence(pipeline, tmp_path):
    root, data, labels = pipeline
    args = ["classify", "--dataset", data, "--labels", labels, "--train-year", 1,
            "--test-year", 2, "--k", 5, "--replications", 3, "--seed", 1]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--threads", 2, "--out", tmp_path / "b") == 0
    for name in ("metrics.json", "confusion.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert run(*args, "--out", tmp_path / "c") == 0
    for name in ("metrics.json", "confusion.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    metrics = json.loads((tmp_path / "a" / "metrics.json").read_text())
    assert len(metrics["per_replication"]) == 3
    assert (tmp_path / "a" / "confusion.csv").read_text().startswith("pred\\obs,corn,cotton")


def test_classify_same_year(pipeline, tmp_path):
    root, data, labels = pipeline
    assert run("classify", "--dataset", data, "--labels", labels, "--train-year", 1,
               "--test-year", 1, "--k", 5, "--replications", 2, "--out", tmp_path) == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["overall_accuracy"] == 1.0
    assert all(r["n_test"] == 20 for r in metrics["per_replication"])


def test_vdtw_beats_dtw_under_gain_scenario(pipeline, tmp_path):
    root, data, labels = pipeline
    oa = {}
    for measure in ("VDTW", "DTW"):
        out = tmp_path / measure
        assert run("classify", "--dataset", data, "--labels", labels, "--train-year", 1,
                   "--test-year", 2, "--k", 5, "--replications", 5, "--measure", measure,
                   "--out", out) == 0
        oa[measure] = json.loads((out / "metrics.json").read_text())["overall_accuracy"]
    assert oa["VDTW"] >= oa["DTW"]


def test_select_window_then_classify(pipeline, tmp_path):
    root, data, labels = pipeline
    assert run("select-window", "--dataset", data, "--labels", labels, "--train-year", 1,
               "--out", tmp_path / "w") == 0
    win = json.loads((tmp_path / "w" / "window.json").read_text())
    o1, o2 = win["window"]
    assert o1 <= win["pivot"] <= o2 and win["policy"] == "min_length"
    curve = (tmp_path / "w" / "score_curve.csv").read_text().splitlines()
    assert curve[0] == "day,score_left,score_right"
    assert run("classify", "--dataset", data, "--labels", labels, "--train-year", 1,
               "--test-year", 2, "--k", 5, "--replications", 2,
               "--window-file", tmp_path / "w" / "window.json", "--out", tmp_path / "c") == 0
    manifest = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert manifest["window"] == [o1, o2]


def test_evaluate(tmp_path):
    preds = write(tmp_path / "p.csv", "field_id,year,predicted\nA,1,corn\nB,1,corn\n")
    labels = write(tmp_path / "l.csv", "field_id,year,crop\nA,1,corn\nB,1,cotton\n")
    assert run("evaluate", "--predictions", preds, "--labels", labels, "--out", tmp_path / "e") == 0
    metrics = json.loads((tmp_path / "e" / "metrics.json").read_text())
    assert metrics["overall_accuracy"] == 0.5


# ---------------------------------------------------------------------------
# distance debugging


@pytest.fixture
def pair_file(tmp_path):
    rows = [f"X,2013,{d},,,,,clear,{v}\n" for d, v in zip((1, 2, 3), (0, 1, 1))]
    rows += [f"Y,2013,{d},,,,,clear,{v}\n" for d, v in zip((1, 2, 3), (1, 1, 0))]
    rows += [f"Z,2013,{d},,,,,clear,{v}\n" for d, v in zip((101, 102, 103), (1, 1, 0))]
    return write(tmp_path / "d.csv", _obs(rows))


def test_distance_identity(pair_file, capsys):
    assert run("distance", "--dataset", pair_file, "--a", "X", "--b", "X:2013") == 0
    assert "VDTW distance: 0.0" in capsys.readouterr().out


def test_distance_hand_example(pair_file, capsys):
    assert run("distance", "--dataset", pair_file, "--a", "X", "--b", "Y", "--band-days", 1000) == 0
    out = capsys.readouterr().out
    assert "psi:" in out and "D:" in out
    value = float(out.strip().splitlines()[-1].split(":")[1])
    assert value == pytest.approx(math.pi / 2, abs=1e-15)


def test_distance_no_path(pair_file, capsys):
    assert run("distance", "--dataset", pair_file, "--a", "X", "--b", "Z") == 1
    assert "no finite warping path" in capsys.readouterr().out


def test_distance_unknown_field(pair_file, capsys):
    assert run("distance", "--dataset", pair_file, "--a", "Q", "--b", "X") == 2
    assert "not found" in capsys.readouterr().err


def test_config_can_supply_required_options(pipeline, tmp_path):
    root, data, labels = pipeline
    cfg = write(
        tmp_path / "run.cfg",
        f"dataset = {data}\nlabels = {labels}\ntrain_year = 1\ntest_year = 2\n"
        "k = 5\nreplications = 2\nmeasure = SAM\n",
    )
    assert run("classify", "--config", cfg, "--out", tmp_path / "o") == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["measure"] == "SAM"
