"""Engine configuration with ``HKG_*`` environment overrides."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

from .errors import ContractError

ENV_PREFIX = "HKG_"


@dataclass(frozen=True)
class EngineConfig:
    similarity_threshold: float = 0.95
    merge_frequency: int = 10
    keyword_distance_threshold: float = 1.5
    embedding_provider: str | None = None  # URL, TSV path, or "hash[:dim]"
    snapshot_path: str = "graph.json"
    embedding_store: str | None = None  # TSV cache of node embeddings
    pair_budget: int = 5_000_000
    max_class_size: int | None = None

    def __post_init__(self):
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ContractError("similarity_threshold must lie in (0, 1]")
        if self.merge_frequency < 1:
            raise ContractError("merge_frequency must be >= 1")
        if not math.isfinite(self.keyword_distance_threshold):
            raise ContractError("keyword_distance_threshold must be finite")
        if self.pair_budget < 1:
            raise ContractError("pair_budget must be >= 1")
        if self.max_class_size is not None and self.max_class_size < 2:
            raise ContractError("max_class_size must be >= 2")

    @property
    def store_path(self) -> str:
        return self.embedding_store or f"{self.snapshot_path}.emb.tsv"

    @classmethod
    def from_env(cls, env=None, **overrides) -> "EngineConfig":
        env = os.environ if env is None else env
        values = {}
        for f in fields(cls):
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is None or raw == "":
                continue
            values[f.name] = _coerce(f.name, raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_(self, **changes) -> "EngineConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_INTS = {"merge_frequency", "pair_budget", "max_class_size"}
_FLOATS = {"similarity_threshold", "keyword_distance_threshold"}


def _coerce(name, raw):
    try:
        if name in _INTS:
            return int(raw)
        if name in _FLOATS:
            return float(raw)
    except ValueError:
        raise ContractError(f"{ENV_PREFIX}{name.upper()}={raw!r} is not a number") from None
    return raw
