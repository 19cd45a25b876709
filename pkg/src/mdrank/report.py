"""Machine-readable evaluation reports, rendered tables and ROC plots.

JSON is the canonical report format. Measure values are written at 6
significant digits so that reports are byte-stable; meta values are written
as-is (shortest round-trip repr). The CSV form flattens the same structure
into ``key,value`` rows and therefore carries identical numbers.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .measures import MeasureReport, RocCurve
from .ranking import RankAgreement, RankingTable, RankStability
from .resampling import ResampleSummary

__all__ = [
    "EvaluationReport",
    "conventions",
    "render_variant_grid",
    "render_roc_plot",
    "render_roc_text",
]


def conventions(spec_at: str = "at-least", level: float = 0.95) -> dict:
    return {
        "decision_rule": "malignant iff score >= threshold",
        "ties": "tied scores form one operating point",
        "average_precision": "step sum over tie-grouped thresholds, sum (R_k - R_{k-1}) * P_k",
        "auc_roc": "trapezoid rule in (1 - specificity, sensitivity)",
        "spec_at_sensitivity": spec_at,
        "partial_auc": "normalised area under at-least specificity staircase, sensitivity 0.95-1",
        "bootstrap": f"stratified, percentile interval at level {level}",
    }


def _num(v):
    """Round to 6 significant digits; NaN/inf become null."""
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.6g}")


def _rounded(obj):
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, (bool, str, type(None))):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return _num(obj)


@dataclass
class EvaluationReport:
    meta: dict
    systems: list[MeasureReport]
    resampling: dict = field(default_factory=dict)  # system -> measure -> ResampleSummary
    ranking: RankingTable | None = None
    agreement: list[RankAgreement] = field(default_factory=list)
    stability: list[RankStability] = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> rendered text

    @classmethod
    def new(cls, command: str, seed: int | None, systems: Sequence[MeasureReport], n_pos: int, n_neg: int,
            convention: str = "at-least", **meta) -> "EvaluationReport":
        head = {
            "tool": "mdrank",
            "version": __version__,
            "command": command,
            "seed": seed,
            "n_pos": n_pos,
            "n_neg": n_neg,
            "conventions": conventions(convention),
        }
        head.update(meta)
        return cls(head, list(systems))

    def to_dict(self) -> dict:
        body: dict = {
            "systems": [{"system_id": r.system_id, "measures": r.as_dict()} for r in self.systems],
        }
        if self.resampling:
            body["resampling"] = {
                sid: {m: s.as_dict() for m, s in per.items()} for sid, per in self.resampling.items()
            }
        if self.ranking is not None:
            t = self.ranking
            body["ranking"] = {
                "systems": list(t.systems),
                "measures": list(t.measures),
                "ranks": {s: dict(t.ranks[s]) for s in t.systems},
            }
        if self.agreement:
            body["agreement"] = [
                {"measure_a": a.measure_a, "measure_b": a.measure_b,
                 "kendall_tau": a.kendall_tau, "pairwise_flip_count": a.pairwise_flip_count}
                for a in self.agreement
            ]
        if self.stability:
            body["stability"] = [s.as_dict() for s in self.stability]
        if self.tables:
            body["tables"] = dict(self.tables)
        out = {"meta": self.meta}
        out.update(_rounded(body))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        """``key,value`` rows for every numeric leaf, keys as dotted paths."""
        buf = io.StringIO()
        buf.write("key,value\n")

        def walk(prefix, obj):
            if isinstance(obj, dict):
                for k, v in obj.items():
                    walk(f"{prefix}.{k}" if prefix else str(k), v)
            elif isinstance(obj, list):
                for i, v in enumerate(obj):
                    walk(f"{prefix}.{i}", v)
            elif isinstance(obj, bool) or obj is None or isinstance(obj, str):
                return
            else:
                buf.write(f"{prefix},{obj!r}\n")

        d = self.to_dict()
        d.pop("tables", None)
        walk("", d)
        return buf.getvalue()


def render_variant_grid(reports: Sequence[MeasureReport], title: str = "",
                        rows=("spec_at_95", "spec_at_98", "spec_at_99")) -> str:
    """High-sensitivity rows against classifier-variant columns, two decimals."""
    labels = {"spec_at_95": "SE = 95%", "spec_at_98": "SE = 98%", "spec_at_99": "SE = 99%",
              "average_precision": "Av. precision", "auc_roc": "AUC of ROC", "pauc_95_100": "pAUC 95-100%"}
    lw = max(len(labels.get(r, r)) for r in rows) + 2
    cw = max([6] + [len(r.system_id) + 2 for r in reports])
    lines = []
    if title:
        lines.append(" " * lw + title)
    lines.append((" " * lw + "".join(r.system_id.rjust(cw) for r in reports)).rstrip())
    for key in rows:
        lines.append(labels.get(key, key).ljust(lw) + "".join(f"{r.as_dict()[key]:.2f}".rjust(cw) for r in reports))
    return "\n".join(lines)


def render_roc_plot(curves: Sequence[RocCurve], path, title: str | None = None):
    """Write an SVG of sensitivity against specificity, one line per curve.

    The band of sensitivity 0.95-1 is shaded. Output is self-contained and
    byte-stable for identical input.
    """
    if not curves:
        raise ValueError("need at least one curve")
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "mdrank", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.axhspan(0.95, 1.0, color="0.85", zorder=0, label="sensitivity 95-100%")
        for k, c in enumerate(curves):
            ax.plot(c.specificity, c.sensitivity, drawstyle="default", lw=1.5,
                    label=c.label or f"curve {k + 1}")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.invert_xaxis()
        ax.set_xlabel("Specificity")
        ax.set_ylabel("Sensitivity")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower left", fontsize="small")
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path


def render_roc_text(curves: Sequence[RocCurve], width: int = 50, height: int = 20) -> str:
    """Character-grid ROC plot for terminals (specificity decreasing left to right)."""
    if not curves:
        raise ValueError("need at least one curve")
    grid = [[" "] * width for _ in range(height)]
    band = height - 1 - int(round(0.95 * (height - 1)))
    for col in range(width):
        for row in range(band + 1):
            grid[row][col] = "."
    marks = "*o+x#@"
    for k, c in enumerate(curves):
        sp, se = c.specificity, c.sensitivity
        # sample densely along the polyline so steep segments stay connected
        for a in range(len(sp) - 1):
            for t in np.linspace(0.0, 1.0, 2 * (width + height)):
                x = sp[a] + t * (sp[a + 1] - sp[a])
                y = se[a] + t * (se[a + 1] - se[a])
                col = int(round((1.0 - x) * (width - 1)))
                row = height - 1 - int(round(y * (height - 1)))
                grid[row][col] = marks[k % len(marks)]
    lines = ["SE 1 |" + "".join(grid[0])]
    lines += ["     |" + "".join(r) for r in grid[1:-1]]
    lines.append("SE 0 |" + "".join(grid[-1]))
    lines.append("     +" + "-" * width)
    lines.append("      SP=1" + " " * max(0, width - 8) + "SP=0")
    for k, c in enumerate(curves):
        lines.append(f"      {marks[k % len(marks)]} {c.label or f'curve {k + 1}'}")
    lines.append("      . sensitivity 95-100%")
    return "\n".join(lines)
