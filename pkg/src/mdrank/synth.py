"""Synthetic cohorts with known ground truth.

The default cohort shape is 75 malignant and 304 benign items, the size of
the ISBI 2016 melanoma test set, so that one missed melanoma moves
sensitivity by 1/75.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from .data import FeatureDataset, PredictionSet

__all__ = [
    "BinormalSpec",
    "SynthChallengeSpec",
    "binormal_auc",
    "binormal_scores",
    "challenge_field",
    "gaussian_features",
    "heteroscedastic_features",
    "crossing_pair",
]

DEFAULT_POS = 75
DEFAULT_NEG = 304


def binormal_auc(mu: float, sigma: float) -> float:
    """AUC when negatives are N(0, 1) and positives N(mu, sigma^2)."""
    return float(norm.cdf(mu / np.sqrt(1.0 + sigma**2)))


def _item_ids(n: int) -> tuple[str, ...]:
    return tuple(f"IMG_{i:05d}" for i in range(n))


@dataclass(frozen=True)
class BinormalSpec:
    n_pos: int = DEFAULT_POS
    n_neg: int = DEFAULT_NEG
    mu: float = 1.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("n_pos and n_neg must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")

    @property
    def analytic_auc(self) -> float:
        return binormal_auc(self.mu, self.sigma)


def _shuffled_labels(n_pos: int, n_neg: int, rng: np.random.Generator) -> np.ndarray:
    labels = np.r_[np.ones(n_pos, bool), np.zeros(n_neg, bool)]
    return labels[rng.permutation(labels.size)]


def binormal_scores(spec: BinormalSpec, as_probability: bool = False, system_id: str = "binormal") -> PredictionSet:
    """Negatives ~ N(0, 1), positives ~ N(mu, sigma^2), items in shuffled order.

    ``as_probability`` maps scores through the logistic function; the map is
    strictly increasing, so no measure changes.
    """
    rng = np.random.default_rng(spec.seed)
    labels = _shuffled_labels(spec.n_pos, spec.n_neg, rng)
    scores = np.empty(labels.size)
    scores[~labels] = rng.normal(0.0, 1.0, spec.n_neg)
    scores[labels] = rng.normal(spec.mu, spec.sigma, spec.n_pos)
    if as_probability:
        scores = expit(scores)
    return PredictionSet(system_id, _item_ids(labels.size), scores, labels)


@dataclass(frozen=True)
class SynthChallengeSpec:
    """Many systems scoring one shared item set.

    ``systems`` lists ``(mu, sigma)`` per system; when empty, ``n_systems``
    pairs are drawn with mu in [0.8, 2.2] and sigma in [0.4, 2.5], which
    gives plenty of crossing ROC curves.
    """

    n_systems: int = 10
    n_pos: int = DEFAULT_POS
    n_neg: int = DEFAULT_NEG
    systems: tuple = field(default=())
    seed: int = 0


def challenge_field(spec: SynthChallengeSpec, as_probability: bool = True) -> list[PredictionSet]:
    rng = np.random.default_rng(spec.seed)
    labels = _shuffled_labels(spec.n_pos, spec.n_neg, rng)
    params = list(spec.systems) or [
        (float(rng.uniform(0.8, 2.2)), float(rng.uniform(0.4, 2.5))) for _ in range(spec.n_systems)
    ]
    ids = _item_ids(labels.size)
    width = len(str(len(params)))
    out = []
    for k, (mu, sigma) in enumerate(params):
        scores = np.empty(labels.size)
        scores[~labels] = rng.normal(0.0, 1.0, spec.n_neg)
        scores[labels] = rng.normal(mu, sigma, spec.n_pos)
        if as_probability:
            scores = expit(scores)
        out.append(PredictionSet(f"system{k + 1:0{width}d}", ids, scores, labels))
    return out


def gaussian_features(n_per_class, means, covariances, seed: int = 0) -> FeatureDataset:
    """Multivariate normal features.

    ``n_per_class`` is an int or ``(n_benign, n_malignant)``; ``means`` and
    ``covariances`` are ``(benign, malignant)`` pairs.
    """
    n_b, n_m = (n_per_class, n_per_class) if np.isscalar(n_per_class) else n_per_class
    means = [np.atleast_1d(np.asarray(m, dtype=np.float64)) for m in means]
    covs = [np.atleast_2d(np.asarray(c, dtype=np.float64)) for c in covariances]
    d = means[0].size
    chols = []
    for name, m, c in zip(("benign", "malignant"), means, covs):
        if m.shape != (d,) or c.shape != (d, d):
            raise ValueError(f"{name}: mean/covariance shapes do not match d={d}")
        if not np.allclose(c, c.T):
            raise ValueError(f"{name} covariance is not symmetric")
        try:
            chols.append(np.linalg.cholesky(c))
        except np.linalg.LinAlgError:
            raise ValueError(f"{name} covariance is not positive definite") from None
    rng = np.random.default_rng(seed)
    labels = _shuffled_labels(n_m, n_b, rng)
    X = np.empty((labels.size, d))
    for cls, m, L in ((False, means[0], chols[0]), (True, means[1], chols[1])):
        rows = labels == cls
        X[rows] = m + rng.standard_normal((int(rows.sum()), d)) @ L.T
    return FeatureDataset(_item_ids(labels.size), X, labels)


def heteroscedastic_features(n_pos: int = DEFAULT_POS, n_neg: int = DEFAULT_NEG, d: int = 4,
                             separation: float = 1.5, seed: int = 0) -> FeatureDataset:
    """Correlated benign class, wider malignant class with a shifted mean.

    Made so that the four discriminant variants disagree: the classes differ
    in covariance (QDA vs LDA) and the covariances are far from diagonal
    (full vs diagonal).
    """
    rng = np.random.default_rng([seed, 1])
    A = rng.normal(size=(d, d))
    cov_b = 0.6 * A @ A.T / d + 0.4 * np.eye(d)
    B = rng.normal(size=(d, d))
    cov_m = 1.5 * (0.5 * B @ B.T / d + 0.5 * np.eye(d))
    shift = np.linspace(1.0, 0.2, d)
    mean_m = separation * shift / np.linalg.norm(shift)
    return gaussian_features((n_neg, n_pos), (np.zeros(d), mean_m), (cov_b, cov_m), seed)


# Two systems on one 8-item set (3 malignant). Ranked by score, S1 puts two
# melanomas first and the third last; S2 keeps all three mid-table.
_CROSSING_IDS = ("c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8")
_CROSSING_LABELS = (True, True, True, False, False, False, False, False)
_CROSSING_S1 = (0.9, 0.8, 0.2, 0.7, 0.6, 0.5, 0.4, 0.3)
_CROSSING_S2 = (0.8, 0.6, 0.5, 0.9, 0.7, 0.4, 0.3, 0.2)


def crossing_pair() -> tuple[PredictionSet, PredictionSet]:
    """Fixture where average precision prefers S1 (0.79 vs 0.53) but
    specificity at 98% sensitivity prefers S2 (0.6 vs 0.0)."""
    return (
        PredictionSet("S1", _CROSSING_IDS, _CROSSING_S1, _CROSSING_LABELS),
        PredictionSet("S2", _CROSSING_IDS, _CROSSING_S2, _CROSSING_LABELS),
    )
