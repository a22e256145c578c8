"""Label embeddings: the in-memory store and the providers that fill it."""

from __future__ import annotations

import hashlib
import json
import urllib.error
import urllib.request
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import ContractError, NodeNotFoundError, ProviderError


class EmbeddingStore:
    """Label -> float32 vector of one fixed dimension."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ContractError("embedding dimension must be positive")
        self.dimension = dimension
        self._vectors: dict[str, np.ndarray] = {}
        self._unit = None

    def __contains__(self, label) -> bool:
        return label in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self._vectors.keys() == other._vectors.keys()
            and all(np.array_equal(v, other._vectors[k]) for k, v in self._vectors.items())
        )

    def labels(self) -> list[str]:
        return sorted(self._vectors)

    def get(self, label: str) -> np.ndarray:
        try:
            return self._vectors[label]
        except KeyError:
            raise NodeNotFoundError(label) from None

    def set(self, label: str, vector) -> None:
        vec = np.asarray(vector, dtype=np.float32).reshape(-1)
        if vec.shape != (self.dimension,):
            raise ContractError(f"vector for {label!r} has dimension {vec.size}, expected {self.dimension}")
        if not np.all(np.isfinite(vec)):
            raise ContractError(f"vector for {label!r} contains non-finite values")
        self._vectors[label] = vec
        self._unit = None

    def update(self, labels: Sequence[str], matrix) -> None:
        for label, row in zip(labels, np.asarray(matrix)):
            self.set(label, row)

    def discard(self, label: str) -> None:
        if self._vectors.pop(label, None) is not None:
            self._unit = None

    def unit_matrix(self) -> tuple[list[str], np.ndarray]:
        """Sorted labels and their L2-normalised vectors (float64), cached."""
        if self._unit is None:
            labels = self.labels()
            mat = self.matrix(labels)
            norms = vector_norms(mat)
            norms[norms == 0.0] = np.inf
            self._unit = (labels, mat / norms[:, None])
        return self._unit

    def matrix(self, labels: Sequence[str]) -> np.ndarray:
        if not labels:
            return np.zeros((0, self.dimension))
        return np.stack([self.get(v) for v in labels]).astype(np.float64)

    def copy(self) -> "EmbeddingStore":
        out = EmbeddingStore(self.dimension)
        out._vectors = dict(self._vectors)
        return out

    @classmethod
    def from_tsv(cls, path) -> "EmbeddingStore":
        store = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                label, sep, values = line.rpartition("\t")
                if not sep:
                    raise ContractError(f"{path}:{lineno}: expected label<TAB>v1,v2,...")
                vec = [float(x) for x in values.split(",")]
                if store is None:
                    store = cls(len(vec))
                store.set(label, vec)
        if store is None:
            raise ContractError(f"{path}: no embeddings")
        return store

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for label in self.labels():
                fh.write(label + "\t" + ",".join(repr(float(x)) for x in self._vectors[label]) + "\n")


class EmbeddingProvider(Protocol):
    def embed(self, labels: Sequence[str]) -> np.ndarray: ...


class HttpEmbeddingProvider:
    """``POST {url}/embed`` with ``{inputs: [...]}`` -> ``{vectors, dimension}``."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def embed(self, labels):
        labels = list(labels)
        body = json.dumps({"inputs": labels}).encode("utf-8")
        req = urllib.request.Request(
            self.base_url + "/embed", data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise ProviderError(f"embedding request failed: {exc}") from None
        try:
            dim = int(payload["dimension"])
            vectors = np.asarray(payload["vectors"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"embedding response off-schema: {exc}") from None
        if vectors.shape != (len(labels), dim):
            raise ProviderError(f"expected {len(labels)} vectors of dimension {dim}, got shape {vectors.shape}")
        return vectors


class FileEmbeddingProvider:
    """Looks labels up in a precomputed ``label<TAB>v1,v2,...`` file."""

    def __init__(self, path):
        self.store = EmbeddingStore.from_tsv(path)

    def embed(self, labels):
        missing = [v for v in labels if v not in self.store]
        if missing:
            raise ProviderError(f"no precomputed embedding for {missing[0]!r} ({len(missing)} missing)")
        return self.store.matrix(list(labels))


class HashingEmbeddingProvider:
    """Deterministic offline embedding from hashed character trigrams.

    Case-insensitive, so "pcl" and "PCL" embed identically. Meant for tests
    and for running the pipeline without a model server.
    """

    def __init__(self, dimension: int = 256, n: int = 3):
        self.dimension = dimension
        self.n = n

    def _vector(self, label: str) -> np.ndarray:
        text = f" {' '.join(label.lower().split())} "
        vec = np.zeros(self.dimension)
        grams = [text[i:i + self.n] for i in range(max(1, len(text) - self.n + 1))]
        for g in grams:
            h = hashlib.blake2b(g.encode("utf-8"), digest_size=8).digest()
            idx = int.from_bytes(h[:4], "little") % self.dimension
            vec[idx] += 1.0 if h[4] & 1 else -1.0
        if not vec.any():
            vec[0] = 1.0
        return vec

    def embed(self, labels):
        return np.stack([self._vector(v) for v in labels]) if labels else np.zeros((0, self.dimension))


def provider_from_spec(spec: str | None):
    """``http(s)://...`` -> HTTP, ``hash[:dim]`` -> hashing, anything else -> TSV file."""
    if not spec:
        return None
    if spec.startswith(("http://", "https://")):
        return HttpEmbeddingProvider(spec)
    if spec == "hash" or spec.startswith("hash:"):
        _, _, dim = spec.partition(":")
        return HashingEmbeddingProvider(int(dim) if dim else 256)
    if not Path(spec).exists():
        raise ProviderError(f"embedding provider {spec!r} is neither a URL nor an existing file")
    return FileEmbeddingProvider(spec)


def call_provider(provider, labels: Sequence[str]) -> np.ndarray:
    """``provider.embed`` with every failure mode surfaced as ``ProviderError``."""
    try:
        vectors = np.asarray(provider.embed(list(labels)), dtype=np.float64)
    except ProviderError:
        raise
    except Exception as exc:  # third-party providers may raise anything
        raise ProviderError(f"embedding provider failed: {exc}") from exc
    if vectors.ndim != 2 or vectors.shape[0] != len(labels):
        raise ProviderError("provider returned the wrong number of vectors")
    if not np.all(np.isfinite(vectors)):
        raise ProviderError("provider returned non-finite values")
    return vectors


def embed_into(store: EmbeddingStore | None, provider, labels: Iterable[str]) -> EmbeddingStore:
    """Embed the labels missing from ``store`` (a new store if None)."""
    missing = [v for v in labels if store is None or v not in store]
    if not missing:
        return store
    if provider is None:
        raise ProviderError(f"{len(missing)} labels need embeddings but no provider is configured")
    vectors = call_provider(provider, missing)
    if store is None:
        store = EmbeddingStore(vectors.shape[1])
    store.update(missing, vectors)
    return store


def vector_norms(matrix: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
    return norms if norms.size else norms.reshape(0)


__all__ = [
    "call_provider",
    "EmbeddingStore",
    "EmbeddingProvider",
    "HttpEmbeddingProvider",
    "FileEmbeddingProvider",
    "HashingEmbeddingProvider",
    "provider_from_spec",
    "embed_into",
    "vector_norms",
]
