"""Dataset model, JSONL ingestion, stratified splitting and a synthetic corpus generator."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence


class CorpusError(ValueError):
    """Raised for malformed corpus files or invariant violations."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise CorpusError("document id must be non-empty")
        if not self.text.strip():
            raise CorpusError(f"document {self.doc_id!r} has empty text")


@dataclass(frozen=True)
class LabelVocab:
    """Bijective name<->index mapping over at least two classes."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.names) < 2:
            raise CorpusError("label vocabulary needs at least 2 classes")
        if len(set(self.names)) != len(self.names):
            raise CorpusError("label vocabulary contains duplicate names")

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "LabelVocab":
        return cls(tuple(sorted(set(labels))))

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise CorpusError(f"unknown label {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.names


@dataclass(frozen=True)
class SplitManifest:
    seed: int
    fractions: tuple[float, float, float]
    train: tuple[str, ...]
    valid: tuple[str, ...]
    test: tuple[str, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "fractions": list(self.fractions),
                "train": list(self.train),
                "valid": list(self.valid),
                "test": list(self.test),
            },
            ensure_ascii=False,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SplitManifest":
        raw = json.loads(text)
        return cls(
            seed=int(raw["seed"]),
            fractions=tuple(float(f) for f in raw["fractions"]),
            train=tuple(raw["train"]),
            valid=tuple(raw["valid"]),
            test=tuple(raw["test"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SplitManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def load_corpus(path: str | Path) -> tuple[list[Document], Optional[LabelVocab]]:
    """Read a JSONL corpus ({"id", "text", "label"?} per line).

    Returns the documents in file order plus a vocabulary over the observed
    labels (None when the corpus is fully unlabeled).
    """
    docs: list[Document] = []
    seen: set[str] = set()
    labels: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: malformed JSON on line {lineno}: {exc}") from None
            if not isinstance(raw, dict) or "id" not in raw or "text" not in raw:
                raise CorpusError(f"{path}: line {lineno} is missing required fields 'id'/'text'")
            doc_id = str(raw["id"])
            if doc_id in seen:
                raise CorpusError(f"{path}: duplicate document id {doc_id!r} (line {lineno})")
            seen.add(doc_id)
            text = str(raw["text"])
            if not text.strip():
                raise CorpusError(f"{path}: document {doc_id!r} has empty text (line {lineno})")
            label = raw.get("label")
            if label is not None:
                label = str(label)
                labels.add(label)
            docs.append(Document(doc_id=doc_id, text=text, label=label))
    vocab = LabelVocab.from_labels(labels) if labels else None
    return docs, vocab


def save_corpus(docs: Sequence[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            rec: dict = {"id": doc.doc_id, "text": doc.text}
            if doc.label is not None:
                rec["label"] = doc.label
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def split_stratified(
    docs: Sequence[Document],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitManifest:
    """Deterministic stratified train/valid/test partition.

    Per-class counts land within one document of fraction * class size
    (largest-remainder allocation after a seeded shuffle).
    """
    if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise CorpusError(f"fractions must be non-negative and sum to 1, got {fractions}")
    by_class: dict[str, list[str]] = {}
    for doc in docs:
        if doc.label is None:
            raise CorpusError(f"document {doc.doc_id!r} is unlabeled; stratified split needs labels")
        by_class.setdefault(doc.label, []).append(doc.doc_id)
    for name, ids in sorted(by_class.items()):
        if len(ids) < 3:
            raise CorpusError(f"class {name!r} has only {len(ids)} documents; need at least 3")

    rng = random.Random(seed)
    buckets: tuple[list[str], list[str], list[str]] = ([], [], [])
    for name in sorted(by_class):
        ids = list(by_class[name])
        rng.shuffle(ids)
        n = len(ids)
        base = [math.floor(f * n) for f in fractions]
        remainders = [f * n - b for f, b in zip(fractions, base)]
        for _ in range(n - sum(base)):
            i = max(range(3), key=lambda j: (remainders[j], -j))
            base[i] += 1
            remainders[i] = -1.0
        start = 0
        for i, count in enumerate(base):
            buckets[i].extend(ids[start : start + count])
            start += count
    return SplitManifest(
        seed=seed,
        fractions=tuple(fractions),
        train=tuple(buckets[0]),
        valid=tuple(buckets[1]),
        test=tuple(buckets[2]),
    )


def drop_leading_boilerplate(doc: Document, n_sentences: int = 1) -> Document:
    """Drop the first n sentence spans; a document shorter than that keeps its last span."""
    if n_sentences < 0:
        raise CorpusError("n_sentences must be >= 0")
    if n_sentences == 0:
        return doc
    from .segmenter import SegmentConfig, split_boundaries

    spans = split_boundaries(doc.text, SegmentConfig())
    kept = spans[n_sentences:] if len(spans) > n_sentences else spans[-1:]
    return Document(doc_id=doc.doc_id, text=" ".join(kept), label=doc.label)


_BACKGROUND_POOL = [f"bg{i:03d}" for i in range(120)]


def generate_synthetic(
    n_classes: int,
    docs_per_class: int,
    sentences_per_doc: int,
    signal_ratio: float,
    seed: int = 0,
    tokens_per_sentence: int = 12,
) -> tuple[list[Document], LabelVocab]:
    """Synthetic labeled corpus where class signal is confined to a sentence subset.

    Each document gets ceil(signal_ratio * sentences_per_doc) sentences drawn
    from its class token pool, at seeded random positions; all other sentences
    come from a shared background pool.
    """
    if n_classes < 2 or docs_per_class < 1 or sentences_per_doc < 1:
        raise CorpusError("counts must be >= 1 (and n_classes >= 2)")
    if not 0 < signal_ratio <= 1:
        raise CorpusError("signal_ratio must be in (0, 1]")
    rng = random.Random(seed)
    names = [f"class{c:02d}" for c in range(n_classes)]
    pools = {name: [f"{name}tok{i:02d}" for i in range(40)] for name in names}
    n_signal = math.ceil(signal_ratio * sentences_per_doc)

    docs: list[Document] = []
    for name in names:
        for d in range(docs_per_class):
            signal_at = set(rng.sample(range(sentences_per_doc), n_signal))
            sentences = []
            for s in range(sentences_per_doc):
                pool = pools[name] if s in signal_at else _BACKGROUND_POOL
                words = [rng.choice(pool) for _ in range(tokens_per_sentence)]
                sentences.append(" ".join(words) + ".")
            docs.append(Document(doc_id=f"{name}-{d:04d}", text=" ".join(sentences), label=name))
    return docs, LabelVocab(tuple(names))
