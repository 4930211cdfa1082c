"""Sentence encoders behind the service: a transformer mean-pooling encoder
for real models and a deterministic feature-hashing encoder for offline use.

The model identifier selects the encoder: ``hash:<dim>`` (optionally
``hash:<dim>:<seed>``) builds the hashing encoder; anything else is treated
as a Hugging Face model name and loaded with mean pooling over the final
hidden layer. Every encoder returns unit-L2-norm vectors.
"""

from __future__ import annotations

import hashlib
import math
import re
import unicodedata
from typing import Protocol, Sequence

import numpy as np


class EncoderError(RuntimeError):
    """Raised when an encoder cannot be built or inference fails."""


class Encoder(Protocol):
    name: str
    dim: int

    def encode(self, texts: Sequence[str]) -> list[list[float]]: ...


def _is_separator(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def _tokens(text: str) -> list[str]:
    out: list[str] = []
    current: list[str] = []
    for ch in text:
        if _is_separator(ch):
            if current:
                out.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        out.append("".join(current))
    return out


class HashingEncoder:
    """Deterministic signed feature hashing over whitespace/punct tokens.

    Training-free and dependency-free, so the service contract can be
    exercised without downloading model weights.
    """

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim < 8:
            raise EncoderError(f"hashing encoder dim must be >= 8, got {dim}")
        self.dim = dim
        self.seed = seed
        self.name = f"hash:{dim}" if seed == 0 else f"hash:{dim}:{seed}"
        self._salt = seed.to_bytes(8, "little", signed=True)

    def _embed_one(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for tok in _tokens(text):
            digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=9, salt=self._salt).digest()
            bucket = int.from_bytes(digest[:8], "little") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[bucket] += sign
        norm = math.sqrt(sum(x * x for x in vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return [x / norm for x in vec]

    def encode(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]


class TransformerEncoder:
    """Mean-pooled final-layer embeddings from a pretrained transformer."""

    def __init__(self, model_name: str, device: str = "cpu", max_length: int = 512):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise EncoderError(f"transformer encoder needs torch+transformers: {exc}") from None
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_name)
            self._model = AutoModel.from_pretrained(model_name).to(device)
        except Exception as exc:
            raise EncoderError(f"cannot load model {model_name!r}: {exc}") from None
        self._torch = torch
        self._model.eval()
        self._device = device
        self._max_length = max_length
        self.name = model_name
        self.dim = int(self._model.config.hidden_size)

    def encode(self, texts: Sequence[str]) -> list[list[float]]:
        torch = self._torch
        batch = self._tokenizer(
            list(texts),
            padding=True,
            truncation=True,
            max_length=self._max_length,
            return_tensors="pt",
        ).to(self._device)
        with torch.no_grad():
            hidden = self._model(**batch).last_hidden_state
        mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        normed = torch.nn.functional.normalize(pooled, p=2, dim=1)
        return [row.tolist() for row in normed.cpu()]


_HASH_SPEC = re.compile(r"^hash:(\d+)(?::(-?\d+))?$")


def build_encoder(model: str, device: str = "cpu") -> Encoder:
    """Build the encoder named by a model identifier (see module docstring)."""
    match = _HASH_SPEC.match(model)
    if match:
        return HashingEncoder(dim=int(match.group(1)), seed=int(match.group(2) or 0))
    return TransformerEncoder(model, device=device)


def check_unit_norm(vectors: Sequence[Sequence[float]], tol: float = 1e-4) -> None:
    for i, vec in enumerate(vectors):
        norm = float(np.linalg.norm(np.asarray(vec, dtype=np.float64)))
        if abs(norm - 1.0) > tol:
            raise EncoderError(f"vector {i} has norm {norm}, expected 1 +/- {tol}")
