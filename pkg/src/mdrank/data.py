"""Prediction, truth and feature files, and the validated datasets built from them.

Three comma-separated formats are understood, each with an exact header:

* predictions: ``image_id,score``
* truth:       ``image_id,label``
* features:    ``image_id,label,f1,...,fd``

Labels are ``benign``/``malignant`` (any case) or ``0``/``1`` with 1 meaning
malignant. Fields are whitespace-trimmed; quoting is not supported, so ids
cannot contain commas.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Label",
    "LabeledScore",
    "PredictionSet",
    "FeatureDataset",
    "DataError",
    "JoinError",
    "ScoreRangeWarning",
    "parse_predictions",
    "parse_truth",
    "parse_features",
    "join",
    "format_predictions",
    "format_truth",
    "format_features",
]

PREDICTION_HEADER = ("image_id", "score")
TRUTH_HEADER = ("image_id", "label")


class DataError(ValueError):
    """Invalid input data; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class JoinError(DataError):
    """Prediction and truth tables do not match up."""

    def __init__(self, message: str, ids: Sequence[str] = ()):
        self.ids = tuple(ids)
        super().__init__(message)


class ScoreRangeWarning(UserWarning):
    pass


class Label(str, enum.Enum):
    BENIGN = "benign"
    MALIGNANT = "malignant"

    @classmethod
    def parse(cls, token: str) -> "Label":
        t = token.strip().lower()
        if t in ("malignant", "1"):
            return cls.MALIGNANT
        if t in ("benign", "0"):
            return cls.BENIGN
        raise ValueError(f"unknown label {token!r}")


@dataclass(frozen=True)
class LabeledScore:
    item_id: str
    score: float
    label: Label


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Scores of one system joined with ground truth.

    Stored column-wise: ``ids`` (tuple of str), ``scores`` (float64) and
    ``labels`` (bool, True for malignant). Arrays are read-only.
    """

    system_id: str
    ids: tuple[str, ...]
    scores: np.ndarray
    labels: np.ndarray
    n_pos: int = field(init=False)
    n_neg: int = field(init=False)

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        scores = np.array(self.scores, dtype=np.float64).ravel()
        labels = np.array(self.labels, dtype=bool).ravel()
        if not (len(ids) == scores.size == labels.size):
            raise DataError("ids, scores and labels differ in length")
        if any(not i for i in ids):
            raise DataError("empty item id")
        if len(set(ids)) != len(ids):
            raise DataError("duplicate item ids")
        if not np.all(np.isfinite(scores)):
            raise DataError("non-finite score")
        n_pos = int(labels.sum())
        n_neg = labels.size - n_pos
        if n_pos == 0 or n_neg == 0:
            missing = "malignant" if n_pos == 0 else "benign"
            raise DataError(f"system {self.system_id!r}: no {missing} items (both classes required)")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "scores", _readonly(scores))
        object.__setattr__(self, "labels", _readonly(labels))
        object.__setattr__(self, "n_pos", n_pos)
        object.__setattr__(self, "n_neg", n_neg)

    @classmethod
    def from_items(cls, system_id: str, items: Iterable[LabeledScore]) -> "PredictionSet":
        items = list(items)
        return cls(
            system_id,
            tuple(it.item_id for it in items),
            np.array([it.score for it in items], dtype=np.float64),
            np.array([it.label is Label.MALIGNANT for it in items], dtype=bool),
        )

    @property
    def items(self) -> list[LabeledScore]:
        return [
            LabeledScore(i, float(s), Label.MALIGNANT if y else Label.BENIGN)
            for i, s, y in zip(self.ids, self.scores, self.labels)
        ]

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, PredictionSet):
            return NotImplemented
        return (
            self.system_id == other.system_id
            and self.ids == other.ids
            and np.array_equal(self.scores, other.scores)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None  # type: ignore[assignment]

    def with_scores(self, scores, system_id: str | None = None) -> "PredictionSet":
        """Same items and labels, new scores."""
        return PredictionSet(system_id or self.system_id, self.ids, scores, self.labels)


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Labelled feature vectors; ``X`` has shape (n, d), ``labels`` True for malignant."""

    ids: tuple[str, ...]
    X: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        X = np.array(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        labels = np.array(self.labels, dtype=bool).ravel()
        if X.ndim != 2 or X.shape[1] < 1:
            raise DataError("feature matrix must be 2-D with at least one column")
        if not (len(ids) == X.shape[0] == labels.size):
            raise DataError("ids, features and labels differ in length")
        if len(set(ids)) != len(ids):
            raise DataError("duplicate item ids")
        if not np.all(np.isfinite(X)):
            raise DataError("non-finite feature value")
        if labels.all() or not labels.any():
            raise DataError("both classes required")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_pos(self) -> int:
        return int(self.labels.sum())

    @property
    def n_neg(self) -> int:
        return len(self.ids) - self.n_pos

    def __len__(self) -> int:
        return len(self.ids)

    def subset(self, index) -> "FeatureDataset":
        index = np.asarray(index)
        return FeatureDataset(tuple(self.ids[i] for i in index), self.X[index], self.labels[index])


# ---------------------------------------------------------------------------
# parsing

def _rows(text: str, header: Sequence[str] | None):
    """Yield (line_number, fields) for non-blank data rows after checking the header."""
    lines = text.splitlines()
    numbered = [(n, ln) for n, ln in enumerate(lines, start=1) if ln.strip()]
    if not numbered:
        raise DataError("empty file")
    n0, head = numbered[0]
    head_fields = [f.strip() for f in head.lstrip("﻿").split(",")]
    if header is not None and tuple(head_fields) != tuple(header):
        raise DataError(f"expected header {','.join(header)!r}, got {head.strip()!r}", n0)
    if len(numbered) == 1:
        raise DataError("empty file (header only)")
    return head_fields, [(n, [f.strip() for f in ln.split(",")]) for n, ln in numbered[1:]]


def _check_id(item_id: str, seen: dict, line: int):
    if not item_id:
        raise DataError("empty image_id", line)
    if item_id in seen:
        raise DataError(f"duplicate image_id {item_id!r} (first seen on line {seen[item_id]})", line)
    seen[item_id] = line


def _parse_real(tok: str, what: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise DataError(f"unparseable {what} {tok!r}", line) from None
    if not math.isfinite(v):
        raise DataError(f"non-finite {what} {tok!r}", line)
    return v


def parse_predictions(text: str, system_id: str = "") -> list[tuple[str, float]]:
    """Parse an ``image_id,score`` table into ``(item_id, score)`` pairs, in file order.

    Scores outside [0, 1] are accepted with a :class:`ScoreRangeWarning`;
    every measure here depends only on the ordering of scores.
    """
    _, rows = _rows(text, PREDICTION_HEADER)
    out = []
    seen: dict[str, int] = {}
    for line, fields in rows:
        if len(fields) != 2:
            raise DataError(f"expected 2 columns, got {len(fields)}", line)
        item_id, tok = fields
        _check_id(item_id, seen, line)
        out.append((item_id, _parse_real(tok, "score", line)))
    lo = min(s for _, s in out)
    hi = max(s for _, s in out)
    if lo < 0.0 or hi > 1.0:
        name = f" for {system_id!r}" if system_id else ""
        warnings.warn(
            f"scores{name} outside [0, 1] (range {lo:g}..{hi:g}); only their order is used",
            ScoreRangeWarning,
            stacklevel=2,
        )
    return out


def parse_truth(text: str) -> list[tuple[str, Label]]:
    """Parse an ``image_id,label`` table."""
    _, rows = _rows(text, TRUTH_HEADER)
    out = []
    seen: dict[str, int] = {}
    for line, fields in rows:
        if len(fields) != 2:
            raise DataError(f"expected 2 columns, got {len(fields)}", line)
        item_id, tok = fields
        _check_id(item_id, seen, line)
        try:
            out.append((item_id, Label.parse(tok)))
        except ValueError as exc:
            raise DataError(str(exc), line) from None
    return out


def parse_features(text: str) -> FeatureDataset:
    """Parse an ``image_id,label,f1,...,fd`` table."""
    head, rows = _rows(text, None)
    if len(head) < 3 or head[0] != "image_id" or head[1] != "label":
        raise DataError("expected header 'image_id,label,f1,...,fd'", 1)
    width = len(head)
    ids, labels, X = [], [], []
    seen: dict[str, int] = {}
    for line, fields in rows:
        if len(fields) != width:
            raise DataError(f"expected {width} columns, got {len(fields)}", line)
        _check_id(fields[0], seen, line)
        try:
            labels.append(Label.parse(fields[1]) is Label.MALIGNANT)
        except ValueError as exc:
            raise DataError(str(exc), line) from None
        X.append([_parse_real(t, "feature value", line) for t in fields[2:]])
        ids.append(fields[0])
    return FeatureDataset(tuple(ids), np.array(X), np.array(labels))


def join(
    preds: Sequence[tuple[str, float]],
    truth: Sequence[tuple[str, Label]],
    system_id: str = "",
    allow_partial: bool = False,
) -> PredictionSet:
    """Inner-join predictions with truth on item id.

    A prediction without a truth entry is always fatal. A truth entry without a
    prediction is fatal unless ``allow_partial``, in which case it is dropped
    with a warning. Item order follows ``preds``.
    """
    truth_map = dict(truth)
    extra = [i for i, _ in preds if i not in truth_map]
    if extra:
        raise JoinError(f"{len(extra)} prediction id(s) missing from truth: {', '.join(extra[:10])}", extra)
    pred_ids = {i for i, _ in preds}
    missing = [i for i, _ in truth if i not in pred_ids]
    if missing:
        msg = f"{len(missing)} truth id(s) without a prediction: {', '.join(missing[:10])}"
        if not allow_partial:
            raise JoinError(msg, missing)
        warnings.warn(msg, stacklevel=2)
    items = [LabeledScore(i, s, truth_map[i]) for i, s in preds]
    return PredictionSet.from_items(system_id, items)


# ---------------------------------------------------------------------------
# writing; floats use repr() so that parsing the output restores them exactly

def format_predictions(ps: PredictionSet) -> str:
    lines = [",".join(PREDICTION_HEADER)]
    lines += [f"{i},{float(s)!r}" for i, s in zip(ps.ids, ps.scores)]
    return "\n".join(lines) + "\n"


def format_truth(ps: PredictionSet | FeatureDataset) -> str:
    lines = [",".join(TRUTH_HEADER)]
    lines += [f"{i},{'malignant' if y else 'benign'}" for i, y in zip(ps.ids, ps.labels)]
    return "\n".join(lines) + "\n"


def format_features(ds: FeatureDataset) -> str:
    head = ["image_id", "label"] + [f"f{j + 1}" for j in range(ds.d)]
    lines = [",".join(head)]
    for i, y, row in zip(ds.ids, ds.labels, ds.X):
        vals = ",".join(repr(float(v)) for v in row)
        lines.append(f"{i},{'malignant' if y else 'benign'},{vals}")
    return "\n".join(lines) + "\n"
