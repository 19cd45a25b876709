"""ROC and precision-recall curves and the accuracy measures built on them.

Conventions used throughout:

* an item is called malignant iff ``score >= threshold``;
* tied scores form one operating point (no intra-tie ordering), so the ROC
  area equals the pairwise probability with half credit for ties;
* average precision is the non-interpolated step sum ``sum_k dR_k * P_k``
  over tie-grouped thresholds;
* specificity at a target sensitivity defaults to the ``"at-least"`` rule:
  the operating point with the fewest predicted positives whose sensitivity
  reaches the target.

The array-level functions (``*_arrays``) take ``scores`` and boolean
``labels`` directly; they are what the resampling code calls in its inner
loop. The public functions take a :class:`~mdrank.data.PredictionSet`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .data import PredictionSet

__all__ = [
    "ConfusionCounts",
    "OperatingPoint",
    "RocCurve",
    "PrCurve",
    "MeasureReport",
    "SPEC_TARGETS",
    "MEASURES",
    "confusion_at_threshold",
    "roc_curve",
    "pr_curve",
    "auc_roc",
    "average_precision",
    "spec_at_sensitivity",
    "required_true_positives",
    "partial_auc",
    "measure_report",
    "get_measure",
]

SPEC_TARGETS = (0.95, 0.98, 0.99)
Convention = Literal["at-least", "interpolate"]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int


@dataclass(frozen=True)
class OperatingPoint:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def sensitivity(self) -> float:
        return self.tp / (self.tp + self.fn)

    @property
    def specificity(self) -> float:
        return self.tn / (self.tn + self.fp)

    @property
    def precision(self) -> float | None:
        """None at the zero-prediction point, where precision is 0/0."""
        n = self.tp + self.fp
        return self.tp / n if n else None


def confusion_at_threshold(ps: PredictionSet, t: float) -> ConfusionCounts:
    pred = ps.scores >= t
    tp = int(np.sum(pred & ps.labels))
    fp = int(np.sum(pred & ~ps.labels))
    return ConfusionCounts(tp=tp, fp=fp, tn=ps.n_neg - fp, fn=ps.n_pos - tp)


def _grouped_counts(scores: np.ndarray, labels: np.ndarray):
    """Distinct scores in decreasing order with cumulative (tp, fp) at each.

    Entry k holds the counts for the rule ``score >= thresholds[k]``.
    """
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y, dtype=np.int64)
    fp = np.cumsum(~y, dtype=np.int64)
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    return s[last], tp[last], fp[last]


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points in decreasing-threshold order.

    The first point is the virtual all-benign point (threshold ``+inf``) and
    the last the virtual all-malignant point (threshold ``-inf``); between
    them there is one point per distinct score. The last real point already
    predicts every item malignant, so it coincides with the closing endpoint.
    """

    thresholds: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    n_pos: int
    n_neg: int
    label: str = ""

    @classmethod
    def from_scores(cls, scores, labels, label: str = "") -> "RocCurve":
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels, dtype=bool)
        t, tp, fp = _grouped_counts(scores, labels)
        n_pos = int(labels.sum())
        n_neg = labels.size - n_pos
        return cls(
            thresholds=np.r_[np.inf, t, -np.inf],
            tp=np.r_[0, tp, n_pos],
            fp=np.r_[0, fp, n_neg],
            n_pos=n_pos,
            n_neg=n_neg,
            label=label,
        )

    @property
    def sensitivity(self) -> np.ndarray:
        return self.tp / self.n_pos

    @property
    def specificity(self) -> np.ndarray:
        return (self.n_neg - self.fp) / self.n_neg

    @property
    def fpr(self) -> np.ndarray:
        return self.fp / self.n_neg

    @property
    def points(self) -> list[OperatingPoint]:
        return [
            OperatingPoint(float(t), int(a), int(b), self.n_neg - int(b), self.n_pos - int(a))
            for t, a, b in zip(self.thresholds, self.tp, self.fp)
        ]

    def point_set(self) -> set[tuple[int, int]]:
        """Distinct (tp, fp) pairs; comparable across different score scales."""
        return set(zip(self.tp.tolist(), self.fp.tolist()))

    def __len__(self) -> int:
        return self.thresholds.size

    def area(self) -> float:
        """Trapezoidal area in (1 - specificity, sensitivity) space."""
        # integer arithmetic until the final division keeps this exact
        dfp = np.diff(self.fp)
        tp_sum = self.tp[1:] + self.tp[:-1]
        return float(np.dot(dfp, tp_sum)) / (2.0 * self.n_pos * self.n_neg)


@dataclass(frozen=True, eq=False)
class PrCurve:
    """(recall, precision) per distinct score, decreasing threshold.

    The zero-prediction endpoint is omitted since its precision is 0/0.
    """

    thresholds: np.ndarray
    recall: np.ndarray
    precision: np.ndarray


def roc_curve(ps: PredictionSet) -> RocCurve:
    return RocCurve.from_scores(ps.scores, ps.labels, label=ps.system_id)


def pr_curve(ps: PredictionSet) -> PrCurve:
    t, tp, fp = _grouped_counts(ps.scores, ps.labels)
    return PrCurve(t, tp / ps.n_pos, tp / (tp + fp))


# ---------------------------------------------------------------------------
# array-level measures

def auc_arrays(scores: np.ndarray, labels: np.ndarray) -> float:
    return RocCurve.from_scores(scores, labels).area()


def ap_arrays(scores: np.ndarray, labels: np.ndarray) -> float:
    _, tp, fp = _grouped_counts(scores, labels)
    d_tp = np.diff(tp, prepend=0)
    # fsum is correctly rounded, so the result does not depend on summation order
    return math.fsum(d_tp * (tp / (tp + fp))) / float(tp[-1])


def required_true_positives(target: float, n_pos: int) -> int:
    """Fewest detected positives giving sensitivity >= target.

    The product is rounded to 9 decimals first so that, e.g., 0.95 * 20 is
    treated as exactly 19 rather than 19.000000000000004.
    """
    return max(0, math.ceil(round(target * n_pos, 9)))


def _spec_at_curve(roc: RocCurve, target: float, convention: Convention) -> float:
    if not 0.0 < target <= 1.0:
        raise ValueError(f"target sensitivity must be in (0, 1], got {target}")
    need = required_true_positives(target, roc.n_pos)
    # tp is nondecreasing; first index reaching `need` has the fewest predicted positives
    k = int(np.searchsorted(roc.tp, need, side="left"))
    sp = roc.specificity
    if convention == "at-least":
        return float(sp[k])
    if convention != "interpolate":
        raise ValueError(f"unknown convention {convention!r}")
    se = roc.sensitivity
    if se[k] == target or k == 0:
        return float(sp[k])
    se0, se1, sp0, sp1 = se[k - 1], se[k], sp[k - 1], sp[k]
    return float(sp0 + (target - se0) / (se1 - se0) * (sp1 - sp0))


def spec_at_arrays(scores, labels, target: float, convention: Convention = "at-least") -> float:
    return _spec_at_curve(RocCurve.from_scores(scores, labels), target, convention)


def _pauc_curve(roc: RocCurve, lo: float) -> float:
    if not 0.0 <= lo < 1.0:
        raise ValueError(f"lower sensitivity bound must be in [0, 1), got {lo}")
    # staircase: on (se_prev, se_k] the at-least specificity is the best one at level se_k
    levels, first = np.unique(roc.tp, return_index=True)
    se = levels / roc.n_pos
    sp = roc.specificity[first]
    left = np.r_[0.0, se[:-1]]
    width = np.clip(np.minimum(se, 1.0) - np.maximum(left, lo), 0.0, None)
    return float(np.dot(width, sp)) / (1.0 - lo)


def pauc_arrays(scores, labels, lo: float = 0.95) -> float:
    return _pauc_curve(RocCurve.from_scores(scores, labels), lo)


# ---------------------------------------------------------------------------
# public measures on prediction sets

def auc_roc(ps: PredictionSet) -> float:
    """Area under the ROC curve (trapezoid rule; ties get half credit)."""
    return auc_arrays(ps.scores, ps.labels)


def average_precision(ps: PredictionSet) -> float:
    """Step-sum average precision, ``sum_k (R_k - R_{k-1}) * P_k`` with ``R_0 = 0``."""
    return ap_arrays(ps.scores, ps.labels)


def spec_at_sensitivity(ps: PredictionSet, target: float, convention: Convention = "at-least") -> float:
    """Specificity at a target sensitivity.

    ``"at-least"`` takes the operating point with the fewest predicted
    positives whose sensitivity is >= ``target``. ``"interpolate"`` linearly
    interpolates specificity between the two ROC points bracketing the target.

    With 75 positives the at-least rule needs 72, 74 and 75 detections for
    targets 0.95, 0.98 and 0.99; so 0.99 demands every melanoma, whereas one
    miss (74/75 = 0.9867) only reaches the 0.98 level.
    """
    return spec_at_arrays(ps.scores, ps.labels, target, convention)


def partial_auc(ps: PredictionSet, lo: float = 0.95) -> float:
    """Normalised area under specificity as a function of sensitivity over ``[lo, 1]``.

    Uses the at-least staircase, so the result is the mean of
    ``spec_at_sensitivity(ps, s)`` for ``s`` uniform on ``(lo, 1]``. A perfect
    classifier scores 1.
    """
    return pauc_arrays(ps.scores, ps.labels, lo)


@dataclass(frozen=True)
class MeasureReport:
    system_id: str
    average_precision: float
    auc_roc: float
    spec_at: dict
    pauc_95_100: float
    convention: str = "at-least"

    ROW_LABELS = (
        ("average_precision", "Average precision"),
        ("auc_roc", "AUC of the ROC"),
        ("spec_at_95", "SE = 95%"),
        ("spec_at_98", "SE = 98%"),
        ("spec_at_99", "SE = 99%"),
        ("pauc_95_100", "pAUC SE 95-100%"),
    )

    def as_dict(self) -> dict[str, float]:
        """Flat ``{measure name: value}`` in display order."""
        out = {"average_precision": self.average_precision, "auc_roc": self.auc_roc}
        for t in sorted(self.spec_at):
            out[_spec_name(t)] = self.spec_at[t]
        out["pauc_95_100"] = self.pauc_95_100
        return out

    def render(self) -> str:
        return render_score_table([self])


def _spec_name(t: float) -> str:
    return f"spec_at_{round(t * 100):d}"


def render_score_table(reports: list[MeasureReport], title: str | None = None) -> str:
    """Measures as rows, systems as columns, two decimals."""
    names = [r.system_id for r in reports]
    rows = []
    keys = list(reports[0].as_dict())
    labels = dict(MeasureReport.ROW_LABELS)
    width = max(len(labels.get(k, k)) for k in keys) + 2
    colw = max([8] + [len(n) + 2 for n in names])
    head = " " * width + "".join(n.rjust(colw) for n in names)
    rows.append(head.rstrip())
    for k in keys:
        cells = "".join(f"{r.as_dict()[k]:.2f}".rjust(colw) for r in reports)
        rows.append(labels.get(k, k).ljust(width) + cells)
    if title:
        rows.insert(0, title)
    return "\n".join(rows)


def measure_report(ps: PredictionSet, convention: Convention = "at-least", targets=SPEC_TARGETS) -> MeasureReport:
    roc = roc_curve(ps)
    return MeasureReport(
        system_id=ps.system_id,
        average_precision=ap_arrays(ps.scores, ps.labels),
        auc_roc=roc.area(),
        spec_at={t: _spec_at_curve(roc, t, convention) for t in targets},
        pauc_95_100=_pauc_curve(roc, 0.95),
        convention=convention,
    )


# name -> f(scores, labels); used by resampling and ranking
MEASURES: dict[str, Callable[[np.ndarray, np.ndarray], float]] = {
    "average_precision": ap_arrays,
    "auc_roc": auc_arrays,
    "spec_at_95": lambda s, y: spec_at_arrays(s, y, 0.95),
    "spec_at_98": lambda s, y: spec_at_arrays(s, y, 0.98),
    "spec_at_99": lambda s, y: spec_at_arrays(s, y, 0.99),
    "pauc_95_100": lambda s, y: pauc_arrays(s, y, 0.95),
}


def get_measure(measure) -> Callable[[np.ndarray, np.ndarray], float]:
    """Resolve a measure name, or pass an array-level callable through."""
    if callable(measure):
        return measure
    try:
        return MEASURES[measure]
    except KeyError:
        raise ValueError(f"unknown measure {measure!r}; choose from {', '.join(MEASURES)}") from None
