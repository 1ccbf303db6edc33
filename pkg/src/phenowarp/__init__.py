"""Vector dynamic time warping for multi-year crop-type classification.

The package turns field-level vegetation-index time series into a
classification pipeline that tolerates year-to-year changes in illumination
(multiplicative gain) and sowing date (temporal shift).
"""

__version__ = "0.1.0"

from .classify import (
    ClassifierMode,
    ConfusionMatrix,
    ExperimentConfig,
    MetricsReport,
    confusion,
    metrics,
    nn_classify,
    run_experiment,
    stratified_sample,
    template_classify,
)
from .distance import (
    CostMatrices,
    Measure,
    WarpConfig,
    accumulate,
    angular_cost_matrix,
    dtw,
    pair_vectors,
    pairwise,
    sam,
    twdtw,
    vdtw,
)
from .series import FieldSample, QualityFlag, Series, TimeGrid
from .vegindex import IndexKind, IndexParams, compute_index
from .window import WindowPolicy, WindowResult, multiclass_window, select_window

__all__ = [
    "ClassifierMode",
    "ConfusionMatrix",
    "CostMatrices",
    "ExperimentConfig",
    "FieldSample",
    "IndexKind",
    "IndexParams",
    "Measure",
    "MetricsReport",
    "QualityFlag",
    "Series",
    "TimeGrid",
    "WarpConfig",
    "WindowPolicy",
    "WindowResult",
    "accumulate",
    "angular_cost_matrix",
    "compute_index",
    "confusion",
    "dtw",
    "metrics",
    "multiclass_window",
    "nn_classify",
    "pair_vectors",
    "pairwise",
    "run_experiment",
    "sam",
    "select_window",
    "stratified_sample",
    "template_classify",
    "twdtw",
    "vdtw",
]
