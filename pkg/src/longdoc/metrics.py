"""Confusion matrix and macro precision/recall/F1/accuracy reporting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import LabelVocab


class MetricsError(ValueError):
    """Raised for unknown labels or mismatched gold/pred lengths."""


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (K, K), rows = gold, columns = predicted
    vocab: LabelVocab

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassScores:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    macro_f1: float
    macro_precision: float
    macro_recall: float
    accuracy: float
    per_class: tuple[ClassScores, ...]
    n: int

    def to_dict(self) -> dict:
        return {
            "macro_f1": self.macro_f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "accuracy": self.accuracy,
            "n": self.n,
            "per_class": [
                {
                    "label": c.label,
                    "precision": c.precision,
                    "recall": c.recall,
                    "f1": c.f1,
                    "support": c.support,
                }
                for c in self.per_class
            ],
        }

    def format_table(self) -> str:
        width = max(len(c.label) for c in self.per_class)
        lines = [f"{'class':<{width}}  precision  recall    f1        support"]
        for c in self.per_class:
            lines.append(
                f"{c.label:<{width}}  {c.precision:<9.4f}  {c.recall:<8.4f}  {c.f1:<8.4f}  {c.support}"
            )
        lines.append(
            f"macro P/R/F1 = {self.macro_precision:.4f}/{self.macro_recall:.4f}/{self.macro_f1:.4f}"
            f"  accuracy = {self.accuracy:.4f}  (n={self.n})"
        )
        return "\n".join(lines)


def confusion(gold: Sequence[str], pred: Sequence[str], vocab: LabelVocab) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise MetricsError(f"gold has {len(gold)} items but pred has {len(pred)}")
    counts = np.zeros((vocab.size, vocab.size), dtype=np.int64)
    for g, p in zip(gold, pred):
        if g not in vocab:
            raise MetricsError(f"unknown gold label {g!r}")
        if p not in vocab:
            raise MetricsError(f"unknown predicted label {p!r}")
        counts[vocab.index(g), vocab.index(p)] += 1
    return ConfusionMatrix(counts=counts, vocab=vocab)


def report(matrix: ConfusionMatrix) -> EvalReport:
    """Per-class P/R/F1 (0/0 -> 0) and unweighted macro means over all K classes."""
    counts = matrix.counts
    n = matrix.n
    if n < 1:
        raise MetricsError("cannot report on an empty confusion matrix")
    per_class: list[ClassScores] = []
    for i, label in enumerate(matrix.vocab.names):
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum()) - tp
        fn = int(counts[i, :].sum()) - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(ClassScores(label, precision, recall, f1, tp + fn))
    k = len(per_class)
    return EvalReport(
        macro_f1=sum(c.f1 for c in per_class) / k,
        macro_precision=sum(c.precision for c in per_class) / k,
        macro_recall=sum(c.recall for c in per_class) / k,
        accuracy=float(np.trace(counts)) / n,
        per_class=tuple(per_class),
        n=n,
    )
