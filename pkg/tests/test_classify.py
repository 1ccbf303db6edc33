import io
import json
import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phenowarp.classify import (
    ConfusionMatrix,
    ExperimentConfig,
    confusion,
    evaluate_predictions,
    metrics,
    nn_classify,
    read_predictions,
    run_experiment,
    stratified_sample,
    template_classify,
)
from phenowarp.distance import WarpConfig
from phenowarp.exceptions import (
    InsufficientSamplesError,
    ParameterError,
    SchemaError,
    UnclassifiableError,
    ValidationError,
)
from phenowarp.series import FieldSample
from phenowarp.simulate import SCENARIOS, generate_dataset

from conftest import make_series


def fs(fid, values, label, year=1, step=1.0):
    return FieldSample(fid, year, make_series(values, step=step), label)


# ---------------------------------------------------------------------------
# sampling


def test_stratified_sample_sizes_and_disjoint():
    labels = ["a"] * 100 + ["b"] * 200
    train, rest = stratified_sample(labels, 5, seed=1)
    assert sorted(np.array(labels)[train].tolist()) == ["a"] * 5 + ["b"] * 5
    assert not set(train) & set(rest)
    assert len(train) + len(rest) == 300


def test_stratified_sample_deterministic():
    labels = ["a", "b"] * 30
    first = stratified_sample(labels, 4, seed=7)
    second = stratified_sample(labels, 4, seed=7)
    assert all(np.array_equal(x, y) for x, y in zip(first, second))


def test_stratified_sample_whole_class(caplog):
    with caplog.at_level(logging.WARNING):
        train, rest = stratified_sample(["a"] * 3 + ["b"] * 5, 3, seed=0)
    assert "used entirely" in caplog.text
    assert set(rest) <= set(range(3, 8))


def test_stratified_sample_too_few():
    with pytest.raises(InsufficientSamplesError):
        stratified_sample(["a"] * 2 + ["b"] * 5, 3, seed=0)


# ---------------------------------------------------------------------------
# classification rules

TRAIN = [
    fs("t1", [0.1, 0.2, 0.6, 0.9], "corn"),
    fs("t2", [0.5, 0.5, 0.4, 0.2], "cotton"),
]


def test_nn_exact_match():
    assert nn_classify(TRAIN[1].series, TRAIN) == "cotton"


def test_nn_single_training_sample():
    assert nn_classify(make_series([0.9, 0.1, 0.3, 0.3]), TRAIN[:1]) == "corn"


def test_nn_tie_goes_to_lexicographic_label():
    same = [0.1, 0.2, 0.6, 0.9]
    train = [fs("x", same, "b"), fs("y", same, "a")]
    assert nn_classify(make_series(same), train) == "a"


def test_nn_all_blocked():
    far = FieldSample("f", 1, make_series([0.1, 0.2], start=100), "a")
    with pytest.raises(UnclassifiableError):
        nn_classify(make_series([0.1, 0.2]), [far])


def test_nn_needs_training():
    with pytest.raises(ValidationError):
        nn_classify(make_series([0.1, 0.2]), [])


def test_template_classify_order_independent():
    templates = {s.label: s.series for s in TRAIN}
    test = make_series([0.15, 0.25, 0.55, 0.8])
    reversed_templates = dict(reversed(list(templates.items())))
    assert template_classify(test, templates) == template_classify(test, reversed_templates) == "corn"
    assert template_classify(TRAIN[1].series, templates) == "cotton"


def test_template_tie_rule():
    cfg = WarpConfig(measure="DTW", band_days=None)
    templates = {"b": make_series([0.0, 0.0]), "a": make_series([1.0, 1.0])}
    assert template_classify(make_series([0.5, 0.5]), templates, cfg) == "a"


@pytest.mark.parametrize("measure", ["VDTW", "SAM"])
@given(c=st.floats(0.1, 10), values=st.lists(st.floats(0.05, 1), min_size=4, max_size=4))
def test_classification_gain_invariant(measure, c, values):
    cfg = WarpConfig(measure=measure)
    test = make_series(values)
    assert nn_classify(test.scaled(c), TRAIN, cfg) == nn_classify(test, TRAIN, cfg)


# ---------------------------------------------------------------------------
# confusion and metrics


def test_confusion_examples():
    cm = confusion(["a", "b", "b", "a"], ["a", "b", "a", "a"])
    assert cm.classes == ("a", "b")
    # rows are predictions, columns observations
    assert cm.counts.tolist() == [[2, 0], [1, 1]]
    assert confusion(["a", "a"], ["a", "b"]).counts.tolist() == [[1, 1], [0, 0]]
    assert confusion(["a", "b"], ["a", "b"]).counts.tolist() == [[1, 0], [0, 1]]


def test_confusion_errors():
    with pytest.raises(ValidationError):
        confusion(["a"], ["a", "b"])
    with pytest.raises(ValidationError):
        confusion(["c"], ["a"], classes=["a", "b"])


@pytest.mark.parametrize(
    "counts, oa, kappa",
    [([[50, 0], [0, 50]], 1.0, 1.0), ([[40, 10], [10, 40]], 0.8, 0.6), ([[25, 25], [25, 25]], 0.5, 0.0)],
)
def test_metrics_examples(counts, oa, kappa):
    m = metrics(ConfusionMatrix(("a", "b"), np.array(counts)))
    assert m.overall_accuracy == oa
    assert m.kappa == pytest.approx(kappa, abs=1e-15)


def test_metrics_user_and_producer_accuracy():
    m = metrics(ConfusionMatrix(("a", "b", "c"), np.array([[30, 10, 0], [0, 60, 0], [0, 0, 0]])))
    assert m.users_accuracy == {"a": 0.75, "b": 1.0, "c": None}
    assert m.producers_accuracy == {"a": 1.0, "b": pytest.approx(60 / 70), "c": None}


def test_metrics_empty():
    with pytest.raises(ValidationError):
        metrics(ConfusionMatrix(("a",), np.zeros((1, 1))))


@given(st.lists(st.integers(0, 30), min_size=9, max_size=9))
def test_metrics_ranges(cells):
    if sum(cells) == 0:
        return
    m = metrics(ConfusionMatrix(("a", "b", "c"), np.array(cells).reshape(3, 3)))
    assert 0 <= m.overall_accuracy <= 1
    assert -1 - 1e-12 <= m.kappa <= 1 + 1e-12
    for v in list(m.users_accuracy.values()) + list(m.producers_accuracy.values()):
        assert v is None or 0 <= v <= 1


def test_report_serialization():
    m = metrics(ConfusionMatrix(("a", "b"), np.array([[40, 10], [10, 40]])))
    buf = io.StringIO()
    m.to_json(buf)
    assert set(json.loads(buf.getvalue())) == {
        "overall_accuracy", "kappa", "users_accuracy", "producers_accuracy", "per_replication",
    }
    buf = io.StringIO()
    ConfusionMatrix(("a", "b"), np.array([[40, 10], [10, 40]])).to_csv(buf)
    assert buf.getvalue() == "pred\\obs,a,b\na,40,10\nb,10,40\n"


# ---------------------------------------------------------------------------
# experiments


@pytest.fixture(scope="module")
def small_dataset():
    a, b = generate_dataset(n_per_class=20, scenario_b=SCENARIOS["S2"], seed=5)
    return a + b


def test_separated_constants_classify_perfectly():
    samples = [fs(f"a{k}", [0.1 + 0.001 * k] * 5, "a") for k in range(4)]
    samples += [fs(f"b{k}", [0.9 - 0.001 * k] * 5, "b") for k in range(4)]
    cfg = ExperimentConfig(WarpConfig(measure="DTW"), train_year=1, test_year=1, k=3, replications=1)
    assert run_experiment(cfg, samples).report.overall_accuracy == 1.0


def test_experiment_deterministic(small_dataset):
    cfg = ExperimentConfig(k=5, replications=4, seed=3)
    r1, r2 = run_experiment(cfg, small_dataset), run_experiment(cfg, small_dataset)
    assert r1.report.to_dict() == r2.report.to_dict()
    assert r1.mean_confusion.counts.tobytes() == r2.mean_confusion.counts.tobytes()


def test_experiment_threads_do_not_change_results(small_dataset):
    one = run_experiment(ExperimentConfig(k=5, replications=3, threads=1), small_dataset)
    three = run_experiment(ExperimentConfig(k=5, replications=3, threads=3), small_dataset)
    assert one.report.to_dict() == three.report.to_dict()


def test_same_year_excludes_training(small_dataset):
    cfg = ExperimentConfig(train_year=1, test_year=1, k=5, replications=2)
    res = run_experiment(cfg, small_dataset)
    for rep in res.report.per_replication:
        assert rep["n_test"] == 40 - 10


def test_cross_year_tests_everything(small_dataset):
    res = run_experiment(ExperimentConfig(k=5, replications=2), small_dataset)
    assert all(r["n_test"] == 40 for r in res.report.per_replication)
    # equal test sizes: OA of the mean matrix is the mean OA
    cm = res.mean_confusion.counts
    assert np.trace(cm) / cm.sum() == pytest.approx(res.report.overall_accuracy, abs=1e-12)
    assert res.mean_confusion.counts.sum() == pytest.approx(40)


@pytest.mark.parametrize("mode", ["nearest_neighbor", "median_template"])
def test_modes_and_window(small_dataset, mode):
    cfg = ExperimentConfig(k=5, replications=2, mode=mode, window=(150, 250))
    assert run_experiment(cfg, small_dataset).report.overall_accuracy > 0.8


def test_experiment_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig(k=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(replications=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(window=(200, 100))


def test_experiment_missing_year(small_dataset):
    with pytest.raises(ValidationError):
        run_experiment(ExperimentConfig(train_year=9), small_dataset)


# ---------------------------------------------------------------------------
# prediction files


def test_evaluate_predictions():
    preds = read_predictions(b"field_id,year,predicted\nF1,2013,corn\nF2,2013,cotton\nF3,2013,corn\n")
    labels = {("F1", 2013): "corn", ("F2", 2013): "corn", ("F3", 2013): "corn"}
    cm, report = evaluate_predictions(preds, labels)
    assert cm.counts.tolist() == [[2, 0], [1, 0]]
    assert report.overall_accuracy == pytest.approx(2 / 3)


def test_read_predictions_schema():
    with pytest.raises(SchemaError):
        read_predictions(b"field_id,year\nF1,2013\n")
