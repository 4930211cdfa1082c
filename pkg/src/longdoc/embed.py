"""Embedding providers: a deterministic feature-hashing reference embedder
and a client for the remote /embed service."""

from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests


class EmbedError(Exception):
    """Base class for embedding-provider failures."""


class TransportError(EmbedError):
    """The remote provider could not be reached or returned a failure status."""


class ProtocolError(EmbedError):
    """The remote provider returned a response of the wrong shape."""


class DimMismatchError(EmbedError):
    """The remote provider's dimension disagrees with the configured one."""


@dataclass(frozen=True)
class ProviderInfo:
    name: str
    dim: int
    deterministic: bool

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("embedding dim must be >= 1")


def _tokens(text: str) -> list[str]:
    out: list[str] = []
    cur: list[str] = []
    for ch in text:
        if ch.isspace() or unicodedata.category(ch).startswith("P"):
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def _basis_e0(dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.float64)
    v[0] = 1.0
    return v


def hash_embed(text: str, dim: int, seed: int = 0, _cache: dict | None = None) -> np.ndarray:
    """Signed feature hashing of the token bag, L2-normalized.

    Deterministic across platforms (blake2b); a zero-token text maps to e_0.
    """
    if dim < 8:
        raise ValueError("hash embedding dim must be >= 8")
    acc = np.zeros(dim, dtype=np.float64)
    salt = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    for tok in _tokens(text):
        key = tok if _cache is None else (tok, dim)
        slot = None if _cache is None else _cache.get(key)
        if slot is None:
            digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=9, salt=salt).digest()
            bucket = int.from_bytes(digest[:8], "little") % dim
            sign = 1.0 if digest[8] & 1 else -1.0
            slot = (bucket, sign)
            if _cache is not None:
                _cache[key] = slot
        acc[slot[0]] += slot[1]
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        return _basis_e0(dim)
    return acc / norm


def doc_centroid(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Normalized arithmetic mean; a zero mean degenerates to e_0."""
    if len(vectors) == 0:
        raise ValueError("doc_centroid needs at least one vector")
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("vectors must share one dimension")
    mean = mat.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        return _basis_e0(mat.shape[1])
    return mean / norm


class HashingEmbedder:
    """Reference provider: deterministic, dependency-free, unit-norm output."""

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim < 8:
            raise ValueError("hash embedding dim must be >= 8")
        self.dim = dim
        self.seed = seed
        self._cache: dict = {}

    @property
    def info(self) -> ProviderInfo:
        return ProviderInfo(name=f"hashing-{self.dim}-seed{self.seed}", dim=self.dim, deterministic=True)

    def embed(self, text: str) -> np.ndarray:
        return hash_embed(text, self.dim, self.seed, _cache=self._cache)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class RemoteEmbedder:
    """Client for the HTTP embedding service (POST /embed, GET /info)."""

    def __init__(self, url: str, timeout: float = 30.0, expected_dim: int | None = None):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.expected_dim = expected_dim
        self._info: ProviderInfo | None = None

    @property
    def info(self) -> ProviderInfo:
        if self._info is None:
            raw = self._request("GET", "/info")
            if not isinstance(raw, dict) or "name" not in raw or "dim" not in raw:
                raise ProtocolError(f"/info response missing name/dim: {raw!r}")
            dim = int(raw["dim"])
            if self.expected_dim is not None and dim != self.expected_dim:
                raise DimMismatchError(f"service dim {dim} != configured dim {self.expected_dim}")
            self._info = ProviderInfo(name=str(raw["name"]), dim=dim, deterministic=True)
        return self._info

    def _request(self, method: str, path: str, payload: dict | None = None):
        try:
            resp = requests.request(method, self.url + path, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"{method} {path} failed: {exc}") from exc
        if resp.status_code // 100 != 2:
            raise TransportError(f"{method} {path} returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{method} {path} returned non-JSON body") from exc

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        if len(texts) == 0:
            return []
        raw = self._request("POST", "/embed", {"texts": list(texts)})
        if not isinstance(raw, dict) or "vectors" not in raw or "dim" not in raw:
            raise ProtocolError(f"/embed response missing vectors/dim: {type(raw)}")
        dim = int(raw["dim"])
        if self.expected_dim is not None and dim != self.expected_dim:
            raise DimMismatchError(f"service dim {dim} != configured dim {self.expected_dim}")
        vectors = raw["vectors"]
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProtocolError(
                f"/embed returned {len(vectors) if isinstance(vectors, list) else '?'} vectors "
                f"for {len(texts)} texts"
            )
        out: list[np.ndarray] = []
        for i, vec in enumerate(vectors):
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != dim or not np.all(np.isfinite(arr)):
                raise ProtocolError(f"vector {i} has wrong shape or non-finite entries")
            out.append(arr)
        return out
