"""
Rankings that depend on the measure
===================================

Ten synthetic submissions share one truth file. Each measure ranks them
differently, and a paired bootstrap shows how often one system beats another.
"""

from mdrank import measure_report
from mdrank.ranking import cross_ranking_table, rank_agreements, rank_stability
from mdrank.synth import SynthChallengeSpec, challenge_field, crossing_pair


field = challenge_field(SynthChallengeSpec(n_systems=10, seed=4))
table = cross_ranking_table([measure_report(ps) for ps in field])
print(table.render())

# %%
# Kendall tau between the rankings produced by each pair of measures.
for a in rank_agreements(table):
    print(f"{a.measure_a:>18s} vs {a.measure_b:<18s} tau = {a.kendall_tau:+.2f}")

# %%
# Two hand-built systems whose order flips between average precision and
# specificity at 98% sensitivity.
s1, s2 = crossing_pair()
pair = cross_ranking_table([measure_report(s1), measure_report(s2)], ["average_precision", "spec_at_98"])
print(pair.render())
for m in ("average_precision", "spec_at_98"):
    st = rank_stability([s1, s2], m, n_replicates=500, seed=0)
    print(f"{m}: S1 beats S2 in {st.fraction('S1', 'S2'):.1%} of resamples, ties {st.tie_fraction('S1', 'S2'):.1%}")
