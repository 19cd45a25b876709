import numpy as np
import pytest
from scipy.stats import multivariate_normal

from mdrank.data import FeatureDataset
from mdrank.gda import (
    FitError,
    GdaModel,
    fit_gda,
    posterior,
    prior_sweep_roc,
    threshold_sweep_roc,
)
from mdrank.synth import gaussian_features

LDA_1D = GdaModel("lda", 0.5, [[0.0], [2.0]], [[[1.0]]])


def ds_from(X, labels):
    X = np.asarray(X, float)
    return FeatureDataset(tuple(f"x{k}" for k in range(len(X))), X, labels)


class TestPosterior:
    def test_midpoint(self):
        assert posterior(LDA_1D, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_logistic(self):
        assert posterior(LDA_1D, 0.0) == pytest.approx(1 / (1 + np.e**2), abs=1e-12)
        assert posterior(LDA_1D, 0.0) == pytest.approx(0.11920, abs=5e-6)

    def test_prior_override(self):
        assert posterior(LDA_1D, 0.0, prior_override=0.9) == pytest.approx(1 / (1 + np.e**2 / 9), abs=1e-12)
        assert posterior(LDA_1D, 0.0, prior_override=0.9) == pytest.approx(0.549147, abs=5e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            posterior(LDA_1D, [[1.0, 2.0]])

    def test_no_underflow(self):
        # far in the tail both densities underflow, but the log-ratio is fine
        x = 400.0
        assert LDA_1D.log_likelihood_ratio(np.array([[x]]))[0] == pytest.approx(2 * x - 2)
        assert posterior(LDA_1D, -300.0) > 0.0

    def test_complement(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 1)) * 5
        llr = LDA_1D.log_likelihood_ratio(X)
        from scipy.special import expit
        assert np.max(np.abs(expit(llr) + expit(-llr) - 1)) <= 1e-12


class TestFit:
    def test_ml_means_and_prior(self):
        X = np.r_[[-1.0, 1.0], [1.0, 3.0]][:, None]
        ds = ds_from(X, [False, False, True, True])
        m = fit_gda(ds, "lda")
        assert m.prior_malignant == 0.5
        assert m.means.ravel().tolist() == [0.0, 2.0]
        # pooled unbiased variance: (2 + 2) / (4 - 2) = 2, plus ridge 2e-6
        assert m.covariances[0, 0, 0] == pytest.approx(2.0 * (1 + 1e-6))

    def test_fixed_prior(self):
        ds = gaussian_features(20, ([0.0], [1.0]), ([[1.0]], [[1.0]]), seed=1)
        assert fit_gda(ds, "qda", prior=0.3).prior_malignant == 0.3

    def test_one_member_class(self):
        ds = ds_from([[0.0], [1.0], [2.0]], [False, False, True])
        with pytest.raises(FitError, match="malignant"):
            fit_gda(ds, "qda")

    def test_constant_feature_named(self):
        X = np.c_[np.arange(6.0), np.full(6, 3.0)]
        ds = ds_from(X, [0, 0, 0, 1, 1, 1])
        with pytest.raises(FitError, match="feature 2"):
            fit_gda(ds, "lda")

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            fit_gda(ds_from([[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1]), "rda")

    def test_storage_shapes(self):
        ds = gaussian_features(30, (np.zeros(3), np.ones(3)), (np.eye(3), 2 * np.eye(3)), seed=2)
        assert fit_gda(ds, "lda").covariances.shape == (1, 3, 3)
        assert fit_gda(ds, "dlda").covariances.shape == (1, 3, 3)
        assert fit_gda(ds, "qda").covariances.shape == (2, 3, 3)
        dq = fit_gda(ds, "dqda").covariances
        assert np.count_nonzero(dq - np.stack([np.diag(np.diag(c)) for c in dq])) == 0

    def test_json_round_trip(self):
        ds = gaussian_features(30, (np.zeros(2), np.ones(2)), (np.eye(2), [[2.0, 0.3], [0.3, 1.0]]), seed=3)
        for v in ("lda", "qda", "dlda", "dqda"):
            m = fit_gda(ds, v)
            back = GdaModel.from_json(m.to_json())
            assert back.variant == v
            assert np.array_equal(back.means, m.means) and np.array_equal(back.covariances, m.covariances)
            assert np.array_equal(back.posterior(ds.X), m.posterior(ds.X))


def _probe_grid(d, n=200, seed=0):
    return np.random.default_rng(seed).normal(scale=2.0, size=(n, d))


class TestVariantRelations:
    ds = gaussian_features(
        (60, 40), ([0.0, 0.0, 0.0], [1.0, 0.5, -0.5]),
        (np.eye(3), [[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 0.7]]), seed=5,
    )

    def test_qda_with_pooled_cov_equals_lda(self):
        lda = fit_gda(self.ds, "lda")
        cov = lda.covariances[0]
        qda = GdaModel("qda", lda.prior_malignant, lda.means, np.stack([cov, cov]))
        X = _probe_grid(3)
        assert np.max(np.abs(lda.posterior(X) - qda.posterior(X))) <= 1e-10

    def test_diagonal_equals_full_on_zeroed_offdiagonals(self):
        for full, diag in (("lda", "dlda"), ("qda", "dqda")):
            mf = fit_gda(self.ds, full)
            zeroed = GdaModel(full, mf.prior_malignant, mf.means,
                              np.stack([np.diag(np.diag(c)) for c in mf.covariances]))
            md = fit_gda(self.ds, diag)
            X = _probe_grid(3)
            assert np.max(np.abs(zeroed.posterior(X) - md.posterior(X))) <= 1e-10

    def test_dqda_matches_qda_for_diagonal_truth(self):
        ds = gaussian_features(4000, ([0.0, 0.0], [1.0, 1.0]), (np.eye(2), np.diag([2.0, 0.5])), seed=6)
        X = _probe_grid(2)
        diff = np.abs(fit_gda(ds, "qda").posterior(X) - fit_gda(ds, "dqda").posterior(X))
        # sample off-diagonal covariance is O(1/sqrt(n)), not zero
        assert diff.max() < 0.05

    @pytest.mark.parametrize("variant", ["lda", "qda"])
    def test_affine_invariance(self, variant):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        b = rng.normal(size=3)
        ds2 = FeatureDataset(self.ds.ids, self.ds.X @ A.T + b, self.ds.labels)
        X = _probe_grid(3)
        p1 = fit_gda(self.ds, variant).log_likelihood_ratio(X)
        p2 = fit_gda(ds2, variant).log_likelihood_ratio(X @ A.T + b)
        assert np.array_equal(np.argsort(p1), np.argsort(p2))

    @pytest.mark.parametrize("variant", ["dlda", "dqda"])
    def test_axis_scaling_invariance(self, variant):
        # the isotropic ridge is 1e-6 of the mean variance, so scale ratios are
        # kept moderate; at ratios ~100x the ridge alone perturbs the ordering
        s = np.array([0.5, 2.0, 4.0])
        ds2 = FeatureDataset(self.ds.ids, self.ds.X * s, self.ds.labels)
        X = _probe_grid(3)
        p1 = fit_gda(self.ds, variant).log_likelihood_ratio(X)
        p2 = fit_gda(ds2, variant).log_likelihood_ratio(X * s)
        assert np.array_equal(np.argsort(p1), np.argsort(p2))


class TestSweeps:
    def test_far_classes_perfect(self):
        ds = gaussian_features(50, ([0.0, 0.0], [20.0, 20.0]), (np.eye(2), np.eye(2)), seed=1)
        m = fit_gda(ds, "lda")
        assert prior_sweep_roc(m, ds).area() == 1.0

    def test_endpoints(self):
        ds = gaussian_features(30, ([0.0], [1.0]), ([[1.0]], [[1.0]]), seed=2)
        roc = prior_sweep_roc(fit_gda(ds, "qda"), ds)
        assert (roc.sensitivity[0], roc.specificity[0]) == (0.0, 1.0)
        assert (roc.sensitivity[-1], roc.specificity[-1]) == (1.0, 0.0)

    def test_null_auc(self):
        ds = gaussian_features(2000, ([0.0, 0.0], [0.0, 0.0]), (np.eye(2), np.eye(2)), seed=3)
        test = gaussian_features(2000, ([0.0, 0.0], [0.0, 0.0]), (np.eye(2), np.eye(2)), seed=4)
        assert abs(threshold_sweep_roc(fit_gda(ds, "lda"), test).area() - 0.5) < 0.05

    def test_saturation_collapses_threshold_sweep(self):
        # widely separated classes: posteriors round to exactly 0.0 or 1.0
        ds = gaussian_features(40, ([0.0], [60.0]), ([[1.0]], [[1.0]]), seed=5)
        m = fit_gda(ds, "lda")
        thr = threshold_sweep_roc(m, ds)
        pri = prior_sweep_roc(m, ds)
        assert len(thr) == 4  # two endpoints plus the tied 1.0 and 0.0 groups
        assert len(pri) == len(ds) + 2
        assert thr.point_set() < pri.point_set()

    def test_prior_decisions_monotone(self):
        ds = gaussian_features(30, ([0.0, 0.0], [1.0, 0.0]), (np.eye(2), 2 * np.eye(2)), seed=8)
        m = fit_gda(ds, "qda")
        priors = np.linspace(0.001, 0.999, 200)
        dec = np.array([m.posterior(ds.X, prior_override=p) >= 0.5 for p in priors])
        assert np.all(dec[1:] >= dec[:-1])
        # every grid decision vector is one of the exact sweep's operating points
        roc = prior_sweep_roc(m, ds)
        pts = roc.point_set()
        for row in dec:
            assert (int((row & ds.labels).sum()), int((row & ~ds.labels).sum())) in pts


def llr_oracle(model, X):
    """Log-likelihood ratio through scipy's eigendecomposition-based density."""
    k1 = 0 if model.covariances.shape[0] == 1 else 1
    lm = multivariate_normal(model.means[1], model.covariances[k1]).logpdf(X)
    lb = multivariate_normal(model.means[0], model.covariances[0]).logpdf(X)
    return np.atleast_1d(lm - lb)


def test_llr_matches_scipy():
    ds = gaussian_features(50, (np.zeros(4), np.full(4, 0.7)), (np.eye(4), 1.5 * np.eye(4)), seed=9)
    for v in ("lda", "qda", "dlda", "dqda"):
        m = fit_gda(ds, v)
        assert np.allclose(m.log_likelihood_ratio(ds.X), llr_oracle(m, ds.X), rtol=1e-10, atol=1e-10)
