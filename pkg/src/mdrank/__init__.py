"""Evaluate and rank binary diagnostic classifiers, with an emphasis on
high-sensitivity measures and Gaussian discriminant classifiers."""

__version__ = "0.1.0"

from .data import (  # noqa: E402
    DataError,
    FeatureDataset,
    JoinError,
    Label,
    LabeledScore,
    PredictionSet,
    join,
    parse_features,
    parse_predictions,
    parse_truth,
)
from .gda import GdaModel, fit_gda, posterior, prior_sweep_roc, threshold_sweep_roc  # noqa: E402
from .measures import (  # noqa: E402
    MeasureReport,
    RocCurve,
    auc_roc,
    average_precision,
    measure_report,
    partial_auc,
    roc_curve,
    spec_at_sensitivity,
)
from .ranking import cross_ranking_table, kendall_tau, rank_by_measure, rank_stability  # noqa: E402
from .resampling import bootstrap_measure, cv_measure, stratified_kfold  # noqa: E402
from .synth import BinormalSpec, binormal_scores, crossing_pair, gaussian_features  # noqa: E402
