"""Gaussian discriminant classifiers: LDA, QDA and their diagonal (naive Bayes) forms.

All four variants model each class as a multivariate normal and output the
posterior probability of malignancy. They differ only in the covariance:

========  ===========================================
``lda``   one pooled full covariance
``qda``   a full covariance per class
``dlda``  one pooled covariance, diagonal only
``dqda``  a covariance per class, diagonal only
========  ===========================================

A ridge of ``1e-6 * mean(diag(S))`` is added to every covariance estimate
``S``. Scoring works on the log-likelihood ratio, so posteriors never pass
through a ratio of underflowed densities.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import expit, logit

from .data import FeatureDataset, PredictionSet
from .measures import RocCurve

__all__ = [
    "VARIANTS",
    "GdaModel",
    "FitError",
    "fit_gda",
    "log_likelihood_ratio",
    "posterior",
    "score_dataset",
    "threshold_sweep_roc",
    "prior_sweep_roc",
]

VARIANTS = ("lda", "qda", "dlda", "dqda")
DISPLAY_NAMES = {"lda": "LDA", "qda": "QDA", "dlda": "dLDA", "dqda": "dQDA"}
RIDGE_SCALE = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)


class FitError(ValueError):
    pass


def _check_variant(variant: str) -> str:
    v = variant.lower()
    if v not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    return v


@dataclass(frozen=True, eq=False)
class GdaModel:
    """A fitted two-class Gaussian model.

    ``means`` has shape (2, d) with row 0 benign and row 1 malignant.
    ``covariances`` has shape (1, d, d) for pooled variants and (2, d, d)
    for per-class ones; diagonal variants keep zero off-diagonal entries.
    """

    variant: str
    prior_malignant: float
    means: np.ndarray
    covariances: np.ndarray
    ridge: tuple[float, ...] = ()
    _chol: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        variant = _check_variant(self.variant)
        object.__setattr__(self, "variant", variant)
        if not 0.0 < self.prior_malignant < 1.0:
            raise ValueError(f"prior must be in (0, 1), got {self.prior_malignant}")
        means = np.array(self.means, dtype=np.float64)
        covs = np.array(self.covariances, dtype=np.float64)
        if covs.ndim == 2:
            covs = covs[None]
        d = means.shape[1]
        want = 1 if variant in ("lda", "dlda") else 2
        if means.shape != (2, d) or covs.shape != (want, d, d):
            raise ValueError(f"{variant}: expected means (2, {d}) and covariances ({want}, {d}, {d})")
        if variant in ("dlda", "dqda"):
            covs = np.stack([np.diag(np.diag(c)) for c in covs])
            if np.any(np.diagonal(covs, axis1=1, axis2=2) <= 0):
                raise FitError("diagonal variances must be strictly positive")
        chol = []
        for c in covs:
            if not np.allclose(c, c.T, rtol=0, atol=1e-12 * max(1.0, np.abs(c).max())):
                raise FitError("covariance is not symmetric")
            try:
                chol.append(cho_factor(c, lower=True))
            except LinAlgError:
                raise FitError("covariance is not positive definite") from None
        means.flags.writeable = False
        covs.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        object.__setattr__(self, "_chol", chol)

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def name(self) -> str:
        return DISPLAY_NAMES[self.variant]

    def class_log_density(self, X: np.ndarray, cls: int) -> np.ndarray:
        """Gaussian log-density of each row of ``X`` under class 0 (benign) or 1 (malignant)."""
        X = self._check_X(X)
        k = 0 if len(self._chol) == 1 else cls
        c, low = self._chol[k]
        diff = X - self.means[cls]
        z = cho_solve((c, low), diff.T)
        maha = np.einsum("ij,ji->i", diff, z)
        logdet = 2.0 * np.sum(np.log(np.diag(c)))
        return -0.5 * (maha + logdet + self.d * _LOG_2PI)

    def log_likelihood_ratio(self, X) -> np.ndarray:
        """``log g_malignant(x) - log g_benign(x)`` per row."""
        return self.class_log_density(X, 1) - self.class_log_density(X, 0)

    def posterior(self, X, prior_override: float | None = None) -> np.ndarray:
        prior = self.prior_malignant if prior_override is None else prior_override
        if not 0.0 < prior < 1.0:
            raise ValueError(f"prior must be in (0, 1), got {prior}")
        return expit(self.log_likelihood_ratio(X) + logit(prior))

    def with_prior(self, prior: float) -> "GdaModel":
        return GdaModel(self.variant, prior, self.means, self.covariances, self.ridge)

    def _check_X(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 0:
            X = X.reshape(1, 1)
        elif X.ndim == 1:
            X = X[None, :] if self.d > 1 or X.size == 1 else X[:, None]
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"dimension mismatch: model has d={self.d}, got shape {np.shape(X)}")
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite feature value")
        return X

    # serialisation: JSON with repr() floats, so values round-trip exactly
    def to_json(self) -> str:
        doc = {
            "variant": self.variant,
            "d": self.d,
            "prior_malignant": self.prior_malignant,
            "ridge": list(self.ridge),
            "means": {"benign": self.means[0].tolist(), "malignant": self.means[1].tolist()},
            "covariances": [c.tolist() for c in self.covariances],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GdaModel":
        doc = json.loads(text)
        means = np.array([doc["means"]["benign"], doc["means"]["malignant"]])
        model = cls(doc["variant"], doc["prior_malignant"], means, np.array(doc["covariances"]), tuple(doc.get("ridge", ())))
        if model.d != doc["d"]:
            raise ValueError("dimension field does not match the stored means")
        return model


def _ridged(S: np.ndarray, diagonal: bool) -> tuple[np.ndarray, float]:
    if diagonal:
        S = np.diag(np.diag(S))
    lam = RIDGE_SCALE * float(np.mean(np.diag(S)))
    if lam <= 0:
        raise FitError("all features are constant; covariance is degenerate")
    return S + lam * np.eye(S.shape[0]), lam


def fit_gda(ds: FeatureDataset, variant: str = "qda", prior: float | str = "empirical") -> GdaModel:
    """Fit a Gaussian discriminant model.

    Means are the class sample means. Covariances are unbiased sample
    estimates: per class with ``n_c - 1`` for QDA/dQDA, pooled with
    ``n - 2`` for LDA/dLDA. ``prior`` is ``"empirical"`` (training fraction of
    malignant items) or a fixed value in (0, 1).
    """
    variant = _check_variant(variant)
    X, y = ds.X, ds.labels
    counts = (int((~y).sum()), int(y.sum()))
    for name, n in zip(("benign", "malignant"), counts):
        if n < 2:
            raise FitError(f"class {name!r} has {n} training item(s); at least 2 required")
    const = np.flatnonzero(np.ptp(X, axis=0) == 0)
    if const.size:
        raise FitError(f"feature {int(const[0]) + 1} (column f{int(const[0]) + 1}) is constant across all training items")

    groups = [X[~y], X[y]]
    means = np.stack([g.mean(axis=0) for g in groups])
    diagonal = variant in ("dlda", "dqda")
    if variant in ("lda", "dlda"):
        scatter = sum((g - m).T @ (g - m) for g, m in zip(groups, means))
        S, lam = _ridged(scatter / (len(X) - 2), diagonal)
        covs, ridge = S[None], (lam,)
    else:
        fitted = [_ridged(np.cov(g, rowvar=False, ddof=1).reshape(X.shape[1], X.shape[1]), diagonal) for g in groups]
        covs = np.stack([S for S, _ in fitted])
        ridge = tuple(lam for _, lam in fitted)

    if prior == "empirical":
        pi = counts[1] / len(X)
    else:
        pi = float(prior)
    try:
        return GdaModel(variant, pi, means, covs, ridge)
    except FitError as exc:
        raise FitError(f"{DISPLAY_NAMES[variant]}: {exc}") from None


def log_likelihood_ratio(model: GdaModel, X) -> np.ndarray:
    return model.log_likelihood_ratio(X)


def posterior(model: GdaModel, x, prior_override: float | None = None):
    """Posterior probability of malignancy for one vector (returns float) or rows of a matrix."""
    x = np.asarray(x, dtype=np.float64)
    p = model.posterior(x, prior_override)
    if x.ndim == 0 or (x.ndim == 1 and (model.d > 1 or x.size == 1)):
        return float(p[0])
    return p


def score_dataset(model: GdaModel, test: FeatureDataset, sweep: str = "threshold", system_id: str | None = None) -> PredictionSet:
    """Scores for ``test``: posteriors at the model prior, or log-likelihood ratios for the prior sweep.

    Thresholding the log-likelihood ratio at ``logit(1 - pi)`` gives exactly
    the decisions ``posterior(x, pi) >= 0.5``, so its ROC is the prior sweep.
    """
    if sweep == "threshold":
        scores = model.posterior(test.X)
    elif sweep == "prior":
        scores = model.log_likelihood_ratio(test.X)
    else:
        raise ValueError(f"unknown sweep {sweep!r}; use 'threshold' or 'prior'")
    return PredictionSet(system_id or model.name, test.ids, scores, test.labels)


def threshold_sweep_roc(model: GdaModel, test: FeatureDataset) -> RocCurve:
    """ROC from moving the posterior threshold over [0, 1] at the model prior."""
    ps = score_dataset(model, test, "threshold")
    return RocCurve.from_scores(ps.scores, ps.labels, label=f"{model.name} threshold sweep")


def prior_sweep_roc(model: GdaModel, test: FeatureDataset) -> RocCurve:
    """ROC from sweeping the malignant prior over (0, 1) with the decision cut fixed at 0.5.

    Item x turns malignant once ``pi >= expit(-llr(x))``, so the points are
    the threshold sweep of the log-likelihood ratio. The curve's thresholds
    are log-likelihood ratios; the corresponding prior is ``expit(-threshold)``.
    """
    ps = score_dataset(model, test, "prior")
    return RocCurve.from_scores(ps.scores, ps.labels, label=f"{model.name} prior sweep")
