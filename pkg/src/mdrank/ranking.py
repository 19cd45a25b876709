"""Leaderboards under several measures and how much they agree.

Every measure here is higher-is-better. Ties use competition ranking
("1, 2, 2, 4"). Agreement between two rankings is Kendall's tau-b.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import PredictionSet
from .measures import MeasureReport, get_measure
from .resampling import _map, _rng, bootstrap_indices

__all__ = [
    "RankingTable",
    "RankAgreement",
    "RankStability",
    "rank_by_measure",
    "cross_ranking_table",
    "kendall_tau",
    "rank_agreements",
    "rank_stability",
]

MEASURE_LABELS = {
    "average_precision": "Av. precision",
    "auc_roc": "AUC of ROC",
    "spec_at_95": "SE = 95%",
    "spec_at_98": "SE = 98%",
    "spec_at_99": "SE = 99%",
    "pauc_95_100": "pAUC 95-100%",
}


def rank_by_measure(scores: Mapping[str, float]) -> dict[str, int]:
    """Competition ranks, rank 1 for the highest score."""
    if not scores:
        raise ValueError("need at least one system")
    for name, v in scores.items():
        if not math.isfinite(v):
            raise ValueError(f"non-finite score for {name!r}")
    return {name: 1 + sum(other > v for other in scores.values()) for name, v in scores.items()}


@dataclass(frozen=True)
class RankingTable:
    """Systems x measures grid of scores and their per-measure ranks."""

    systems: tuple[str, ...]
    measures: tuple[str, ...]
    scores: dict  # system -> measure -> float
    ranks: dict  # system -> measure -> int

    def column(self, measure: str) -> dict[str, int]:
        return {s: self.ranks[s][measure] for s in self.systems}

    def cell(self, system: str, measure: str) -> str:
        """Score for a rank-1 cell, rank integer elsewhere."""
        if self.ranks[system][measure] == 1:
            return f"{self.scores[system][measure]:.2f}"
        return str(self.ranks[system][measure])

    def render(self) -> str:
        """Measures as rows and systems as columns, as in a published leaderboard."""
        labels = [MEASURE_LABELS.get(m, m) for m in self.measures]
        lw = max(len(s) for s in labels) + 2
        cw = max([6] + [len(s) + 2 for s in self.systems])
        out = [(" " * lw + "".join(s.rjust(cw) for s in self.systems)).rstrip()]
        for m, lab in zip(self.measures, labels):
            out.append(lab.ljust(lw) + "".join(self.cell(s, m).rjust(cw) for s in self.systems))
        return "\n".join(out)


def cross_ranking_table(reports: Sequence[MeasureReport], measures: Sequence[str] | None = None) -> RankingTable:
    if not reports:
        raise ValueError("need at least one report")
    rows = {r.system_id: r.as_dict() for r in reports}
    if len(rows) != len(reports):
        raise ValueError("duplicate system ids")
    measures = tuple(measures or next(iter(rows.values())))
    for sid, row in rows.items():
        missing = set(measures) - set(row)
        if missing:
            raise ValueError(f"{sid}: missing measures {sorted(missing)}")
    scores = {s: {m: rows[s][m] for m in measures} for s in rows}
    ranks: dict = {s: {} for s in rows}
    for m in measures:
        for s, r in rank_by_measure({s: scores[s][m] for s in rows}).items():
            ranks[s][m] = r
    return RankingTable(tuple(rows), measures, scores, ranks)


def _pair_counts(a: Sequence[float], b: Sequence[float]):
    conc = disc = tie_a = tie_b = 0
    for i, j in itertools.combinations(range(len(a)), 2):
        da = a[i] - a[j]
        db = b[i] - b[j]
        if da == 0:
            tie_a += 1
        if db == 0:
            tie_b += 1
        if da and db:
            if (da > 0) == (db > 0):
                conc += 1
            else:
                disc += 1
    return conc, disc, tie_a, tie_b


def kendall_tau(rank_a: Mapping[str, float], rank_b: Mapping[str, float]) -> float:
    """Kendall's tau-b between two rankings of the same systems.

    NaN when either ranking is constant (the tie-adjusted denominator is zero).
    """
    if set(rank_a) != set(rank_b):
        raise ValueError("rankings cover different systems")
    if len(rank_a) < 2:
        raise ValueError("need at least two systems")
    keys = sorted(rank_a)
    conc, disc, tie_a, tie_b = _pair_counts([rank_a[k] for k in keys], [rank_b[k] for k in keys])
    n0 = len(keys) * (len(keys) - 1) // 2
    denom = math.sqrt((n0 - tie_a) * (n0 - tie_b))
    if denom == 0:
        return float("nan")
    return (conc - disc) / denom


@dataclass(frozen=True)
class RankAgreement:
    measure_a: str
    measure_b: str
    kendall_tau: float
    pairwise_flip_count: int


def rank_agreements(table: RankingTable) -> list[RankAgreement]:
    """Tau-b and number of discordant system pairs for every pair of measures."""
    if len(table.systems) < 2:
        return []
    out = []
    for ma, mb in itertools.combinations(table.measures, 2):
        ra, rb = table.column(ma), table.column(mb)
        keys = list(table.systems)
        _, disc, _, _ = _pair_counts([ra[k] for k in keys], [rb[k] for k in keys])
        out.append(RankAgreement(ma, mb, kendall_tau(ra, rb), disc))
    return out


@dataclass(frozen=True)
class RankStability:
    """Outranking frequencies over paired bootstrap replicates.

    ``outrank_counts[i, j]`` counts replicates where system i scored strictly
    higher than system j, ``tie_counts[i, j]`` those where they were equal.
    ``outrank`` and ``tie`` are the same as fractions.
    """

    systems: tuple[str, ...]
    measure: str
    outrank_counts: np.ndarray
    tie_counts: np.ndarray
    n_replicates: int
    seed: int

    @property
    def outrank(self) -> np.ndarray:
        return self.outrank_counts / self.n_replicates

    @property
    def tie(self) -> np.ndarray:
        return self.tie_counts / self.n_replicates

    def fraction(self, a: str, b: str) -> float:
        return float(self.outrank[self.systems.index(a), self.systems.index(b)])

    def tie_fraction(self, a: str, b: str) -> float:
        return float(self.tie[self.systems.index(a), self.systems.index(b)])

    def as_dict(self) -> dict:
        return {
            "measure": self.measure,
            "n_replicates": self.n_replicates,
            "seed": self.seed,
            "systems": list(self.systems),
            "outrank_fraction": self.outrank.tolist(),
            "tie_fraction": self.tie.tolist(),
        }


def _aligned(systems: Sequence[PredictionSet]):
    ref = systems[0]
    order = {i: k for k, i in enumerate(ref.ids)}
    scores = np.empty((len(systems), len(ref)))
    for n, ps in enumerate(systems):
        if set(ps.ids) != set(order) or len(ps) != len(ref):
            raise ValueError(f"system {ps.system_id!r} does not share the item set of {ref.system_id!r}")
        pos = np.array([order[i] for i in ps.ids])
        if not np.array_equal(ref.labels[pos], ps.labels):
            raise ValueError(f"system {ps.system_id!r} has labels inconsistent with {ref.system_id!r}")
        scores[n, pos] = ps.scores
    return scores, ref.labels


def rank_stability(systems: Sequence[PredictionSet], measure="auc_roc", n_replicates: int = 1000,
                   seed: int = 0, n_jobs: int = 1) -> RankStability:
    """Paired stratified bootstrap: each replicate resamples one set of items for every system."""
    if not systems:
        raise ValueError("need at least one system")
    f = get_measure(measure)
    scores, labels = _aligned(systems)

    def one(r):
        idx = bootstrap_indices(labels, _rng(seed, r), stratified=True)
        return [f(s[idx], labels[idx]) for s in scores]

    vals = np.array(_map(one, n_replicates, n_jobs))  # (replicates, systems)
    gt = vals[:, :, None] > vals[:, None, :]
    eq = vals[:, :, None] == vals[:, None, :]
    return RankStability(
        systems=tuple(ps.system_id for ps in systems),
        measure=measure if isinstance(measure, str) else "custom",
        outrank_counts=gt.sum(axis=0),
        tie_counts=eq.sum(axis=0),
        n_replicates=n_replicates,
        seed=seed,
    )
