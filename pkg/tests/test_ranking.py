import itertools
import math

import numpy as np
import pytest

import oracles
from mdrank.data import PredictionSet
from mdrank.measures import MeasureReport, measure_report, spec_at_sensitivity, average_precision
from mdrank.ranking import (
    cross_ranking_table,
    kendall_tau,
    rank_agreements,
    rank_by_measure,
    rank_stability,
)
from mdrank.synth import BinormalSpec, SynthChallengeSpec, binormal_scores, challenge_field, crossing_pair


class TestRankByMeasure:
    def test_distinct(self):
        assert rank_by_measure({"A": 0.64, "B": 0.60, "C": 0.55}) == {"A": 1, "B": 2, "C": 3}

    def test_competition_ties(self):
        assert rank_by_measure({"A": 0.5, "B": 0.5, "C": 0.4}) == {"A": 1, "B": 1, "C": 3}
        assert rank_by_measure({"A": 0.9, "B": 0.5, "C": 0.5, "D": 0.1}) == {"A": 1, "B": 2, "C": 2, "D": 4}

    def test_single(self):
        assert rank_by_measure({"A": 0.1}) == {"A": 1}

    def test_non_finite(self):
        with pytest.raises(ValueError):
            rank_by_measure({"A": float("nan")})


def _report(name, ap, auc, s95, s98, s99, pauc):
    return MeasureReport(name, ap, auc, {0.95: s95, 0.98: s98, 0.99: s99}, pauc)


class TestCrossRanking:
    def test_rank1_cells_show_score(self):
        reps = [
            _report("A", 0.64, 0.80, 0.20, 0.10, 0.05, 0.10),
            _report("B", 0.60, 0.83, 0.25, 0.12, 0.08, 0.12),
            _report("C", 0.55, 0.81, 0.39, 0.33, 0.20, 0.30),
        ]
        t = cross_ranking_table(reps)
        assert t.cell("A", "average_precision") == "0.64"
        assert t.cell("A", "auc_roc") == "3"
        assert t.cell("B", "auc_roc") == "0.83"
        assert t.cell("C", "spec_at_95") == "0.39"
        lines = t.render().splitlines()
        assert lines[0].split() == ["A", "B", "C"]
        assert lines[1].split()[-3:] == ["0.64", "2", "3"]

    def test_single_system(self):
        t = cross_ranking_table([_report("A", 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)])
        assert [t.cell("A", m) for m in t.measures] == ["0.10", "0.20", "0.30", "0.40", "0.50", "0.60"]
        assert rank_agreements(t) == []

    def test_matches_per_column_oracle(self):
        rng = np.random.default_rng(0)
        grid = rng.integers(0, 5, size=(6, 6)) / 4
        reps = [_report(f"S{i}", *grid[i]) for i in range(6)]
        t = cross_ranking_table(reps)
        for j, m in enumerate(t.measures):
            for i in range(6):
                assert t.ranks[f"S{i}"][m] == 1 + int(np.sum(grid[:, j] > grid[i, j]))
            assert min(t.column(m).values()) == 1

    def test_input_order_irrelevant(self):
        reps = [_report(f"S{i}", *np.random.default_rng(i).random(6)) for i in range(5)]
        a = cross_ranking_table(reps)
        b = cross_ranking_table(reps[::-1])
        assert all(a.ranks[s] == b.ranks[s] for s in a.systems)


class TestKendall:
    def test_identity_and_reverse(self):
        x = {"a": 1, "b": 2, "c": 3}
        assert kendall_tau(x, x) == 1.0
        assert kendall_tau(x, {"a": 3, "b": 2, "c": 1}) == -1.0

    def test_one_swap(self):
        assert kendall_tau({"a": 1, "b": 2, "c": 3}, {"a": 2, "b": 1, "c": 3}) == pytest.approx(1 / 3)

    def test_ties(self):
        a = {"a": 1, "b": 1, "c": 3}
        b = {"a": 1, "b": 2, "c": 3}
        assert kendall_tau(a, b) == pytest.approx(2 / math.sqrt(2 * 3))

    def test_constant_is_nan(self):
        assert math.isnan(kendall_tau({"a": 1, "b": 1}, {"a": 1, "b": 2}))

    def test_key_mismatch(self):
        with pytest.raises(ValueError):
            kendall_tau({"a": 1, "b": 2}, {"a": 1, "c": 2})

    def test_vs_scipy(self):
        from scipy.stats import kendalltau
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(3, 12))
            a, b = rng.integers(1, 5, n), rng.integers(1, 5, n)
            ref = kendalltau(a, b, variant="b").statistic
            got = kendall_tau(dict(enumerate(a.tolist())), dict(enumerate(b.tolist())))
            assert (math.isnan(ref) and math.isnan(got)) or got == pytest.approx(ref, abs=1e-12)


class TestStability:
    def test_dominant(self):
        base = binormal_scores(BinormalSpec(20, 40, 0.0, 1.0, seed=1))
        perfect = base.with_scores(base.labels.astype(float) + 0.0, "perfect")
        noisy = base.with_scores(base.scores, "random")
        st = rank_stability([perfect, noisy], "auc_roc", 200, seed=2)
        assert st.fraction("perfect", "random") == 1.0

    def test_self(self):
        ps = binormal_scores(BinormalSpec(20, 40, 1.0, 1.0, seed=1))
        st = rank_stability([ps, ps.with_scores(ps.scores, "twin")], "average_precision", 100, seed=0)
        assert st.tie_fraction(ps.system_id, "twin") == 1.0

    def test_fractions_sum_to_one(self):
        field = challenge_field(SynthChallengeSpec(4, 20, 60, seed=3))
        st = rank_stability(field, "spec_at_95", 150, seed=1)
        total = st.outrank_counts + st.outrank_counts.T + st.tie_counts
        assert np.all(total == 150)
        assert np.all((st.outrank >= 0) & (st.outrank <= 1))

    def test_shared_universe_required(self):
        a = PredictionSet("a", ("x", "y"), [0.1, 0.2], [True, False])
        b = PredictionSet("b", ("x", "z"), [0.1, 0.2], [True, False])
        with pytest.raises(ValueError, match="item set"):
            rank_stability([a, b], "auc_roc", 5)

    def test_item_order_irrelevant(self):
        s1, s2 = crossing_pair()
        perm = [7, 2, 5, 0, 1, 6, 3, 4]
        s2p = PredictionSet("S2", tuple(s2.ids[i] for i in perm), s2.scores[perm], s2.labels[perm])
        a = rank_stability([s1, s2], "average_precision", 100, seed=5)
        b = rank_stability([s1, s2p], "average_precision", 100, seed=5)
        assert np.array_equal(a.outrank_counts, b.outrank_counts)

    def test_crossing_fraction_depends_on_measure(self):
        s1, s2 = crossing_pair()
        n = 300
        ap = rank_stability([s1, s2], "average_precision", n, seed=11)
        sp = rank_stability([s1, s2], "spec_at_98", n, seed=11)
        assert ap.fraction("S1", "S2") != sp.fraction("S1", "S2")
        # per-replicate oracle with the same resamples
        from mdrank.resampling import _rng, bootstrap_indices
        wins = 0
        for r in range(n):
            idx = bootstrap_indices(s1.labels, _rng(11, r))
            y = s1.labels[idx]
            wins += oracles.average_precision_float(s1.scores[idx], y) > oracles.average_precision_float(s2.scores[idx], y)
        assert ap.fraction("S1", "S2") == wins / n


def test_crossing_pair_found_by_exhaustive_search():
    """The fixture is one of the reversals found by enumerating placements of 3 positives among 8 ranks."""
    labels_for = lambda pos: [i in pos for i in range(8)]
    scores = [1 - i / 10 for i in range(8)]
    placements = list(itertools.combinations(range(8), 3))
    vals = {}
    for pos in placements:
        y = labels_for(pos)
        vals[pos] = (oracles.average_precision_float(scores, y), oracles.spec_at_least(scores, y, 0.98))
    reversals = {(a, b) for a in placements for b in placements
                 if vals[a][0] > vals[b][0] and vals[a][1] < vals[b][1]}
    assert reversals
    s1, s2 = crossing_pair()

    def placement(ps):
        order = np.argsort(-ps.scores)
        return tuple(int(k) for k in np.flatnonzero(ps.labels[order]))

    assert (placement(s1), placement(s2)) in reversals
    assert average_precision(s1) > average_precision(s2)
    assert spec_at_sensitivity(s1, 0.98) < spec_at_sensitivity(s2, 0.98)
