"""Bootstrap and stratified cross-validation estimates of the measures.

Bootstrap applies to fixed prediction sets (a submission cannot be refitted);
cross-validation applies to classifier experiments on feature datasets.

Every replicate draws from its own generator seeded with ``(seed, index)``,
so results do not depend on how replicates are scheduled across threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import FeatureDataset, PredictionSet
from .gda import fit_gda, score_dataset
from .measures import get_measure

__all__ = [
    "ResampleSummary",
    "FoldAssignment",
    "ResamplingError",
    "percentile_interval",
    "bootstrap_indices",
    "bootstrap_measure",
    "stratified_kfold",
    "cv_scores",
    "cv_measure",
]

MAX_REDRAWS = 100


class ResamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResampleSummary:
    measure_name: str
    point_estimate: float
    replicate_values: tuple[float, ...]
    mean: float
    ci_lo: float
    ci_hi: float
    n_replicates: int
    seed: int
    level: float = 0.95
    method: str = "bootstrap"

    def as_dict(self, with_replicates: bool = False) -> dict:
        d = {
            "method": self.method,
            "point_estimate": self.point_estimate,
            "mean": self.mean,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "level": self.level,
            "n_replicates": self.n_replicates,
            "seed": self.seed,
        }
        if with_replicates:
            d["replicate_values"] = list(self.replicate_values)
        return d


def percentile_interval(values, level: float = 0.95) -> tuple[float, float]:
    """Percentile interval whose ends are order statistics of ``values``.

    With sorted values ``v[0..n-1]`` and ``a = (1 - level) / 2`` the bounds are
    ``v[floor(a (n-1))]`` and ``v[ceil((1-a) (n-1))]``.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return float("nan"), float("nan")
    a = (1.0 - level) / 2.0
    lo = np.quantile(v, a, method="lower")
    hi = np.quantile(v, 1.0 - a, method="higher")
    return float(lo), float(hi)


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def bootstrap_indices(labels: np.ndarray, rng: np.random.Generator, stratified: bool = True) -> np.ndarray:
    """Indices of one bootstrap resample.

    Stratified draws resample positives and negatives separately, keeping both
    class counts. Unstratified draws are redrawn (up to ``MAX_REDRAWS`` times)
    until both classes appear.
    """
    labels = np.asarray(labels, dtype=bool)
    if stratified:
        pos = np.flatnonzero(labels)
        neg = np.flatnonzero(~labels)
        return np.concatenate([rng.choice(pos, pos.size), rng.choice(neg, neg.size)])
    n = labels.size
    for _ in range(MAX_REDRAWS):
        idx = rng.integers(0, n, n)
        y = labels[idx]
        if y.any() and not y.all():
            return idx
    raise ResamplingError(f"no two-class resample in {MAX_REDRAWS} draws; use stratified resampling")


def _map(fn, n: int, n_jobs: int):
    if n_jobs is None or n_jobs <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, range(n)))


def bootstrap_measure(
    ps: PredictionSet,
    measure="auc_roc",
    n_replicates: int = 1000,
    seed: int = 0,
    stratified: bool = True,
    level: float = 0.95,
    n_jobs: int = 1,
) -> ResampleSummary:
    """Bootstrap distribution of one measure for a fixed prediction set.

    ``measure`` is a name from :data:`mdrank.measures.MEASURES` or a callable
    ``f(scores, labels) -> float``.
    """
    if n_replicates < 1:
        raise ValueError("n_replicates must be >= 1")
    f = get_measure(measure)
    scores, labels = ps.scores, ps.labels

    def one(i):
        idx = bootstrap_indices(labels, _rng(seed, i), stratified)
        return f(scores[idx], labels[idx])

    reps = np.array(_map(one, n_replicates, n_jobs), dtype=np.float64)
    lo, hi = percentile_interval(reps, level)
    return ResampleSummary(
        measure_name=measure if isinstance(measure, str) else getattr(measure, "__name__", "custom"),
        point_estimate=f(scores, labels),
        replicate_values=tuple(reps.tolist()),
        mean=float(reps.mean()),
        ci_lo=lo,
        ci_hi=hi,
        n_replicates=n_replicates,
        seed=seed,
        level=level,
    )


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    folds: dict  # item id -> fold index
    stratified: bool = True

    def fold_array(self, ids) -> np.ndarray:
        return np.array([self.folds[i] for i in ids], dtype=np.int64)


def stratified_kfold(ds: FeatureDataset, k: int = 5, seed: int = 0) -> FoldAssignment:
    """Assign items to ``k`` folds, spreading each class as evenly as possible.

    Each class is shuffled and dealt round-robin; the negatives' deal starts
    where the positives' stopped, so fold sizes also differ by at most one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    labels = ds.labels
    for name, n in (("malignant", ds.n_pos), ("benign", ds.n_neg)):
        if n < k:
            raise ValueError(f"class {name!r} has {n} items, fewer than k={k} folds")
    rng = np.random.default_rng(seed)
    fold = np.empty(len(ds), dtype=np.int64)
    start = 0
    for cls in (True, False):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        fold[idx] = (start + np.arange(idx.size)) % k
        start = (start + idx.size) % k
    return FoldAssignment(k, dict(zip(ds.ids, fold.tolist())), True)


def cv_scores(ds: FeatureDataset, variant: str = "qda", k: int = 5, seed: int = 0,
              sweep: str = "threshold", prior="empirical"):
    """Held-out scores pooled over ``k`` stratified folds.

    Returns ``(pooled PredictionSet, per-fold PredictionSets, FoldAssignment)``.
    """
    folds = stratified_kfold(ds, k, seed)
    fa = folds.fold_array(ds.ids)
    scores = np.empty(len(ds))
    per_fold = []
    for j in range(k):
        test = fa == j
        try:
            model = fit_gda(ds.subset(np.flatnonzero(~test)), variant, prior)
        except ValueError as exc:
            raise type(exc)(f"fold {j}: {exc}") from None
        held = ds.subset(np.flatnonzero(test))
        scores[test] = score_dataset(model, held, sweep).scores
        if held.n_pos and held.n_neg:
            per_fold.append(PredictionSet(f"fold{j}", held.ids, scores[test], held.labels))
    pooled = PredictionSet(f"{variant}-cv{k}", ds.ids, scores, ds.labels)
    return pooled, per_fold, folds


def cv_measure(ds: FeatureDataset, variant: str = "qda", k: int = 5, measure="spec_at_95",
               seed: int = 0, sweep: str = "threshold", level: float = 0.95) -> ResampleSummary:
    """Cross-validated measure: computed once on the pooled held-out scores.

    Per-fold values are kept in ``replicate_values`` to show dispersion only.
    """
    f = get_measure(measure)
    pooled, per_fold, _ = cv_scores(ds, variant, k, seed, sweep)
    reps = np.array([f(p.scores, p.labels) for p in per_fold], dtype=np.float64)
    lo, hi = percentile_interval(reps, level)
    return ResampleSummary(
        measure_name=measure if isinstance(measure, str) else getattr(measure, "__name__", "custom"),
        point_estimate=f(pooled.scores, pooled.labels),
        replicate_values=tuple(reps.tolist()),
        mean=float(reps.mean()) if reps.size else float("nan"),
        ci_lo=lo,
        ci_hi=hi,
        n_replicates=int(reps.size),
        seed=seed,
        level=level,
        method=f"{k}-fold stratified CV, pooled",
    )
