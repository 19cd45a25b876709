"""
Four Gaussian classifiers on one dataset
========================================

LDA, QDA and their diagonal-covariance versions are fitted to the same
training features. Their specificity at high sensitivity varies more than
their AUC does.
"""

from mdrank import fit_gda, measure_report
from mdrank.gda import DISPLAY_NAMES, VARIANTS, prior_sweep_roc, score_dataset
from mdrank.report import render_roc_plot, render_variant_grid
from mdrank.synth import heteroscedastic_features

train = heteroscedastic_features(75, 304, seed=1)
test = heteroscedastic_features(75, 304, seed=2)

reports, curves = [], []
for v in VARIANTS:
    model = fit_gda(train, v)
    ps = score_dataset(model, test, sweep="prior", system_id=DISPLAY_NAMES[v])
    reports.append(measure_report(ps))
    curves.append(prior_sweep_roc(model, test))
    print(f"{DISPLAY_NAMES[v]:>5s}  AUC {reports[-1].auc_roc:.3f}")

print(render_variant_grid(reports))

# %%
# Sweeping the malignant prior traces the same curve as thresholding the
# log-likelihood ratio.
render_roc_plot(curves, "classifiers_roc.svg", title="prior sweep")
