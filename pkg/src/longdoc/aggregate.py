"""Document-level decisions from per-sentence class distributions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import LabelVocab

STRATEGIES = ("mean", "vote", "max")


class AggregateError(ValueError):
    """Raised for empty inputs or unknown strategies."""


@dataclass(frozen=True)
class DocPrediction:
    doc_id: str
    final_class: str
    doc_distribution: np.ndarray
    n_sentences: int
    strategy: str


def _check(distributions: Sequence[np.ndarray]) -> np.ndarray:
    if len(distributions) == 0:
        raise AggregateError("cannot aggregate zero sentence distributions")
    mat = np.asarray(distributions, dtype=np.float64)
    if mat.ndim != 2:
        raise AggregateError("sentence distributions must share one class count")
    return mat


def aggregate_mean(doc_id: str, distributions: Sequence[np.ndarray], vocab: LabelVocab) -> DocPrediction:
    """Arithmetic mean of the sentence distributions; ties break to the lowest class index."""
    mat = _check(distributions)
    dist = mat.mean(axis=0)
    return DocPrediction(doc_id, vocab.names[int(dist.argmax())], dist, mat.shape[0], "mean")


def aggregate_vote(doc_id: str, distributions: Sequence[np.ndarray], vocab: LabelVocab) -> DocPrediction:
    """Each sentence votes its argmax; the document distribution is the vote shares."""
    mat = _check(distributions)
    shares = np.zeros(mat.shape[1], dtype=np.float64)
    for row in mat:
        shares[int(row.argmax())] += 1.0
    shares /= mat.shape[0]
    return DocPrediction(doc_id, vocab.names[int(shares.argmax())], shares, mat.shape[0], "vote")


def aggregate_max(doc_id: str, distributions: Sequence[np.ndarray], vocab: LabelVocab) -> DocPrediction:
    """The class attaining the single highest sentence probability wins; earlier sentence on ties."""
    mat = _check(distributions)
    flat = int(mat.argmax())  # row-major: earliest sentence, then lowest class index
    row, col = divmod(flat, mat.shape[1])
    return DocPrediction(doc_id, vocab.names[col], mat[row].copy(), mat.shape[0], "max")


_AGGREGATORS = {"mean": aggregate_mean, "vote": aggregate_vote, "max": aggregate_max}


def aggregate(strategy: str, doc_id: str, distributions: Sequence[np.ndarray], vocab: LabelVocab) -> DocPrediction:
    try:
        fn = _AGGREGATORS[strategy]
    except KeyError:
        raise AggregateError(f"unknown aggregation strategy {strategy!r}; expected one of {STRATEGIES}") from None
    return fn(doc_id, distributions, vocab)
