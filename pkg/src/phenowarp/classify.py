"""Nearest-neighbour and median-template classification, accuracy metrics and
the replicated stratified experiment harness."""

from __future__ import annotations

import csv
import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .distance import WarpConfig, pairwise
from .exceptions import (
    InsufficientSamplesError,
    ParameterError,
    UnclassifiableError,
    ValidationError,
)
from .series import FieldSample, Series
from .window import crop_series_to_window, median_profile

logger = logging.getLogger(__name__)


class ClassifierMode(str, enum.Enum):
    NEAREST_NEIGHBOR = "nearest_neighbor"
    MEDIAN_TEMPLATE = "median_template"


@dataclass(frozen=True)
class ExperimentConfig:
    """One replicated classification experiment.

    ``train_year == test_year`` runs a same-year test in which the training
    fields are excluded from the test set; otherwise every field of
    `test_year` is classified.
    """

    warp: WarpConfig = WarpConfig()
    train_year: int = 1
    test_year: int = 2
    k: int = 50
    replications: int = 100
    seed: int = 0
    mode: ClassifierMode = ClassifierMode.NEAREST_NEIGHBOR
    window: Optional[Tuple[float, float]] = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", ClassifierMode(self.mode))
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if self.replications < 1:
            raise ParameterError("replications must be >= 1")
        if self.window is not None:
            o1, o2 = self.window
            if o1 > o2:
                raise ParameterError("window start must not exceed its end")
            object.__setattr__(self, "window", (float(o1), float(o2)))

    @property
    def same_year(self) -> bool:
        return self.train_year == self.test_year


# ---------------------------------------------------------------------------
# sampling and classification rules


def stratified_sample(labels: Sequence[str], k: int, seed=None):
    """Pick `k` indices per class uniformly without replacement.

    Returns
    -------
    train, rest : ndarray of int
        Sorted training indices and the sorted complement.
    """
    labels = np.asarray(labels, dtype=object)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    train = []
    for c in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == c)
        if members.size < k:
            raise InsufficientSamplesError(
                f"class {c!r} has {members.size} samples, fewer than k={k}"
            )
        if members.size == k:
            logger.warning("class %r is used entirely for training; none left to test", c)
        train.append(rng.choice(members, size=k, replace=False))
    train = np.sort(np.concatenate(train)) if train else np.array([], dtype=int)
    rest = np.setdiff1d(np.arange(labels.size), train)
    return train, rest


def _pick(dists: np.ndarray, labels: Sequence[str]) -> str:
    """Label of the minimum; ties by label, then by lower index."""
    dists = np.asarray(dists, dtype=float)
    finite = np.isfinite(dists)
    if not finite.any():
        raise UnclassifiableError("no candidate is reachable within the warping band")
    best = dists[finite].min()
    tied = np.flatnonzero(finite & (dists == best))
    winner = min(tied, key=lambda i: (labels[i], i))
    return labels[winner]


def nn_classify(test: Series, train: Sequence[FieldSample], cfg: WarpConfig = WarpConfig()) -> str:
    """1-nearest-neighbour label of `test` among the training samples."""
    if not train:
        raise ValidationError("at least one training sample is required")
    d = pairwise([test], [s.series for s in train], cfg)[0]
    return _pick(d, [s.label for s in train])


def template_classify(
    test: Series, templates: Mapping[str, Series], cfg: WarpConfig = WarpConfig()
) -> str:
    """Label of the closest class template (same tie rule as 1-NN)."""
    if not templates:
        raise ValidationError("at least one template is required")
    names = sorted(templates)
    d = pairwise([test], [templates[c] for c in names], cfg)[0]
    return _pick(d, names)


# ---------------------------------------------------------------------------
# confusion matrix and metrics


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = predicted class, columns = observed class."""

    classes: Tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self):
        return self.counts.sum()

    def to_csv(self, stream, decimals: Optional[int] = None) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["pred\\obs", *self.classes])
        for c, row in zip(self.classes, self.counts):
            if decimals is None:
                cells = [repr(v) if isinstance(v, float) else str(v) for v in row.tolist()]
            else:
                cells = [f"{v:.{decimals}f}" for v in row]
            writer.writerow([c, *cells])


def confusion(predictions: Sequence[str], truth: Sequence[str], classes=None) -> ConfusionMatrix:
    if len(predictions) != len(truth):
        raise ValidationError("predictions and truth differ in length")
    if classes is None:
        classes = sorted(set(predictions) | set(truth))
    classes = tuple(classes)
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, t in zip(predictions, truth):
        if p not in pos or t not in pos:
            raise ValidationError(f"unknown label {p if p not in pos else t!r}")
        counts[pos[p], pos[t]] += 1
    return ConfusionMatrix(classes, counts)


@dataclass
class MetricsReport:
    overall_accuracy: float
    kappa: float
    users_accuracy: Dict[str, Optional[float]]
    producers_accuracy: Dict[str, Optional[float]]
    per_replication: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "overall_accuracy": self.overall_accuracy,
            "kappa": self.kappa,
            "users_accuracy": self.users_accuracy,
            "producers_accuracy": self.producers_accuracy,
            "per_replication": self.per_replication,
        }

    def to_json(self, stream) -> None:
        json.dump(self.to_dict(), stream, indent=2, sort_keys=True)
        stream.write("\n")


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Overall accuracy, Cohen's kappa, user's and producer's accuracies.

    A class whose row (or column) is empty gets ``None`` for its user's (or
    producer's) accuracy.
    """
    counts = np.asarray(cm.counts)
    if not np.issubdtype(counts.dtype, np.integer):
        counts = counts.astype(float)
    total = counts.sum()
    if total <= 0:
        raise ValidationError("confusion matrix is empty")
    diag = np.diag(counts)
    rows, cols = counts.sum(axis=1), counts.sum(axis=0)
    oa = diag.sum() / total
    # kappa = (oa - pe) / (1 - pe) rearranged to a single division, so that
    # integer counts give the correctly rounded value
    chance = sum(r * c for r, c in zip(rows.tolist(), cols.tolist()))
    trace, n = diag.sum().item(), total.item()
    kappa = 1.0 if chance == n * n else (n * trace - chance) / (n * n - chance)
    ua = {c: (float(diag[i] / rows[i]) if rows[i] else None) for i, c in enumerate(cm.classes)}
    pa = {c: (float(diag[i] / cols[i]) if cols[i] else None) for i, c in enumerate(cm.classes)}
    return MetricsReport(float(oa), float(kappa), ua, pa)


def _mean_defined(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


# ---------------------------------------------------------------------------
# experiment harness


@dataclass
class ExperimentResult:
    report: MetricsReport
    mean_confusion: ConfusionMatrix
    n_samples: int = 0


def _prepare(series: Series, window) -> Series:
    return series if window is None else crop_series_to_window(series, window)


def run_experiment(cfg: ExperimentConfig, samples: Sequence[FieldSample]) -> ExperimentResult:
    """Replicated stratified experiment on labeled samples of one or two years.

    Each replication draws `k` training fields per class from `train_year`
    with a generator seeded by ``(seed, replication)``. Same-year runs test
    on the remaining fields; cross-year runs test on every field of
    `test_year`. Distances between the test pool and the training pool are
    computed once and reused across replications.
    """
    train_pool = [s for s in samples if s.year == cfg.train_year and s.label is not None]
    test_pool = (
        train_pool
        if cfg.same_year
        else [s for s in samples if s.year == cfg.test_year and s.label is not None]
    )
    if not train_pool:
        raise ValidationError(f"no labeled samples for training year {cfg.train_year}")
    if not test_pool:
        raise ValidationError(f"no labeled samples for test year {cfg.test_year}")

    train_labels = [s.label for s in train_pool]
    test_labels = np.array([s.label for s in test_pool], dtype=object)
    classes = tuple(sorted(set(train_labels) | set(test_labels.tolist())))
    train_series = [_prepare(s.series, cfg.window) for s in train_pool]
    test_series = (
        train_series if cfg.same_year else [_prepare(s.series, cfg.window) for s in test_pool]
    )

    nn = cfg.mode is ClassifierMode.NEAREST_NEIGHBOR
    if nn:
        dist = pairwise(test_series, train_series, cfg.warp, threads=cfg.threads)

    per_rep, cms = [], []
    train_arr = np.array(train_labels, dtype=object)
    for rep in range(cfg.replications):
        rng = np.random.default_rng([cfg.seed, rep])
        train_idx, rest = stratified_sample(train_labels, cfg.k, rng)
        test_idx = rest if cfg.same_year else np.arange(len(test_pool))
        if test_idx.size == 0:
            raise ValidationError("no test samples left after training selection")
        if nn:
            sub = dist[np.ix_(test_idx, train_idx)]
            cand = train_arr[train_idx].tolist()
            preds = [_pick(row, cand) for row in sub]
        else:
            names = sorted(set(train_arr[train_idx].tolist()))
            templates = [
                median_profile([train_series[i] for i in train_idx if train_labels[i] == c])
                for c in names
            ]
            sub = pairwise([test_series[i] for i in test_idx], templates, cfg.warp, cfg.threads)
            preds = [_pick(row, names) for row in sub]
        cm = confusion(preds, test_labels[test_idx].tolist(), classes)
        m = metrics(cm)
        cms.append(cm.counts)
        per_rep.append(
            {
                "replication": rep,
                "overall_accuracy": m.overall_accuracy,
                "kappa": m.kappa,
                "users_accuracy": m.users_accuracy,
                "producers_accuracy": m.producers_accuracy,
                "n_test": int(test_idx.size),
            }
        )

    report = MetricsReport(
        overall_accuracy=float(np.mean([r["overall_accuracy"] for r in per_rep])),
        kappa=float(np.mean([r["kappa"] for r in per_rep])),
        users_accuracy={
            c: _mean_defined([r["users_accuracy"][c] for r in per_rep]) for c in classes
        },
        producers_accuracy={
            c: _mean_defined([r["producers_accuracy"][c] for r in per_rep]) for c in classes
        },
        per_replication=per_rep,
    )
    mean_cm = ConfusionMatrix(classes, np.mean(np.stack(cms), axis=0))
    return ExperimentResult(report, mean_cm, n_samples=len(test_pool))


def read_predictions(source) -> Dict[Tuple[str, int], str]:
    """Parse a ``field_id,year,predicted`` CSV."""
    from .ingest import _open_text

    stream = _open_text(source)
    with stream:
        reader = csv.DictReader(stream)
        missing = {"field_id", "year", "predicted"} - set(reader.fieldnames or ())
        if missing:
            from .exceptions import SchemaError

            raise SchemaError(f"missing required column(s): {', '.join(sorted(missing))}")
        return {(r["field_id"].strip(), int(r["year"])): r["predicted"].strip() for r in reader}


def evaluate_predictions(predictions: Mapping, labels: Mapping) -> Tuple[ConfusionMatrix, MetricsReport]:
    """Confusion matrix and metrics of predictions against a label table."""
    keys = sorted(k for k in predictions if k in labels)
    if not keys:
        raise ValidationError("no prediction matches a labeled field")
    cm = confusion([predictions[k] for k in keys], [labels[k] for k in keys])
    return cm, metrics(cm)
