"""
Measures on one submission
==========================

A synthetic submission shaped like a small dermoscopy test set (75 melanomas,
304 benign lesions) is scored with the six summary measures, then the ROC
curve is drawn with the high-sensitivity band shaded.
"""

import numpy as np

from mdrank import BinormalSpec, binormal_scores, measure_report, roc_curve, spec_at_sensitivity
from mdrank.measures import required_true_positives
from mdrank.report import render_roc_plot, render_roc_text

ps = binormal_scores(BinormalSpec(mu=1.2, sigma=1.3, seed=1), as_probability=True, system_id="binormal")
print(measure_report(ps).render())

# %%
# With 75 melanomas, "sensitivity at least 99%" means finding all 75.
# Missing exactly one melanoma gives 74/75, which is below 0.99.
for target in (0.95, 0.98, 0.99):
    print(f"SE >= {target}: need {required_true_positives(target, 75)} of 75")
print("interpolated spec@0.99:", round(spec_at_sensitivity(ps, 0.99, "interpolate"), 4))

# %%
# The ROC curve, as text and as a standalone SVG.
roc = roc_curve(ps)
print(render_roc_text([roc], width=40, height=12))
render_roc_plot([roc], "measures_roc.svg", title="binormal submission")
print("operating points:", len(roc), " AUC:", np.round(roc.area(), 4))
