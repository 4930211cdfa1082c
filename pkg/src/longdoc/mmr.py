"""Key-sentence selection by maximal marginal relevance over sentence embeddings.

The greedy loop picks, at each step, the candidate maximizing
lambda * Sim1(candidate, query) - (1 - lambda) * max over selected Sim2;
the penalty term is zero on the first pick, ties break to the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

KERNEL_NAMES = ("angular", "cosine", "euclidean", "jaccard")


class MmrError(ValueError):
    """Raised for invalid kernels, dimensions, or degenerate vectors."""


@dataclass(frozen=True)
class MmrConfig:
    lam: float = 0.5
    k: int = 1
    sim1: str = "angular"
    sim2: str = "angular"

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise MmrError(f"lambda must be in [0, 1], got {self.lam}")
        if self.k < 1:
            raise MmrError(f"k must be >= 1, got {self.k}")
        for name in (self.sim1, self.sim2):
            if name not in KERNEL_NAMES:
                raise MmrError(f"unknown kernel {name!r}; expected one of {KERNEL_NAMES}")


@dataclass(frozen=True)
class MmrSelection:
    chosen: tuple[int, ...]
    scores: tuple[float, ...]


# Kernels use sequential scalar arithmetic rather than BLAS reductions so
# results are reproducible bit-for-bit across platforms; candidate sets per
# document are small, so this is never a bottleneck.


def _dot(u, v) -> float:
    return sum(float(a) * float(b) for a, b in zip(u, v))


def _norm(u) -> float:
    return math.sqrt(sum(float(a) * float(a) for a in u))


def _check_pair(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise MmrError(f"dim mismatch: {u.shape} vs {v.shape}")


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    _check_pair(u, v)
    nu = _norm(u)
    nv = _norm(v)
    if nu == 0.0 or nv == 0.0:
        raise MmrError("cosine similarity is undefined for a zero vector")
    return _dot(u, v) / (nu * nv)


def angular_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """1 - arccos(cosine)/pi: a similarity in [0, 1] (1 identical, 0 antipodal).

    Evaluated via 2*atan2(|u'-v'|, |u'+v'|) on the normalized vectors, which
    stays exact where arccos of a rounded cosine would not.
    """
    _check_pair(u, v)
    nu = _norm(u)
    nv = _norm(v)
    if nu == 0.0 or nv == 0.0:
        raise MmrError("angular similarity is undefined for a zero vector")
    diff = _norm([float(a) / nu - float(b) / nv for a, b in zip(u, v)])
    summ = _norm([float(a) / nu + float(b) / nv for a, b in zip(u, v)])
    return 1.0 - 2.0 * math.atan2(diff, summ) / math.pi


def euclidean_similarity(u: np.ndarray, v: np.ndarray) -> float:
    _check_pair(u, v)
    return 1.0 / (1.0 + _norm([float(a) - float(b) for a, b in zip(u, v)]))


def jaccard_similarity(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


_VECTOR_KERNELS = {
    "angular": angular_similarity,
    "cosine": cosine_similarity,
    "euclidean": euclidean_similarity,
}


def kernel(name: str):
    """Look up a similarity kernel; jaccard compares token sets, the rest vectors."""
    if name == "jaccard":
        return jaccard_similarity
    try:
        return _VECTOR_KERNELS[name]
    except KeyError:
        raise MmrError(f"unknown kernel {name!r}; expected one of {KERNEL_NAMES}") from None


def mmr_select(
    candidates: Sequence[tuple[int, np.ndarray]],
    query: np.ndarray,
    config: MmrConfig,
    token_sets: dict[int, set] | None = None,
    query_tokens: set | None = None,
) -> MmrSelection:
    """Greedy MMR over (index, vector) candidates against a query vector.

    token_sets/query_tokens back the jaccard kernel; vector kernels ignore them.
    """
    if not candidates:
        raise MmrError("candidates must be non-empty")
    order = sorted(range(len(candidates)), key=lambda i: candidates[i][0])
    indices = [candidates[i][0] for i in order]
    vectors = [np.asarray(candidates[i][1], dtype=np.float64) for i in order]
    for vec in vectors:
        if vec.shape != query.shape:
            raise MmrError(f"candidate dim {vec.shape} != query dim {query.shape}")

    def pair_sim(name: str, i: int, j: int) -> float:
        if name == "jaccard":
            if token_sets is None:
                raise MmrError("jaccard kernel requires token_sets")
            return jaccard_similarity(token_sets[indices[i]], token_sets[indices[j]])
        return _VECTOR_KERNELS[name](vectors[i], vectors[j])

    def query_sim(name: str, i: int) -> float:
        if name == "jaccard":
            if token_sets is None or query_tokens is None:
                raise MmrError("jaccard kernel requires token_sets and query_tokens")
            return jaccard_similarity(token_sets[indices[i]], query_tokens)
        return _VECTOR_KERNELS[name](vectors[i], query)

    n = len(vectors)
    relevance = [query_sim(config.sim1, i) for i in range(n)]
    # running max of Sim2 against the selected set; -inf until the first
    # selection updates it (similarities can be negative)
    max_penalty = [-math.inf] * n
    remaining = list(range(n))
    chosen: list[int] = []
    scores: list[float] = []
    for _ in range(min(config.k, n)):
        best_pos = None
        best_score = -math.inf
        for pos in remaining:
            penalty = max_penalty[pos] if chosen else 0.0
            score = config.lam * relevance[pos] - (1.0 - config.lam) * penalty
            if score > best_score:
                best_score = score
                best_pos = pos
        assert best_pos is not None
        remaining.remove(best_pos)
        chosen.append(best_pos)
        scores.append(best_score)
        for pos in remaining:
            sim = pair_sim(config.sim2, pos, best_pos)
            if sim > max_penalty[pos]:
                max_penalty[pos] = sim
    return MmrSelection(
        chosen=tuple(indices[pos] for pos in chosen),
        scores=tuple(scores),
    )
