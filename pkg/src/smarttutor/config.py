"""Service configuration.

Loaded from a YAML file with CLI overrides; numeric knobs are validated at
startup so a bad deployment fails fast instead of misbehaving quietly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigError


@dataclass
class ProviderSettings:
    kind: str = "scripted"  # "scripted" | "http"
    endpoint: str = ""
    model: str = ""
    script_path: Optional[str] = None
    max_retries: int = 3


@dataclass
class ServiceConfig:
    corpus_path: str = ""
    log_store_path: str = ""
    listen: str = "127.0.0.1:8080"
    provider: ProviderSettings = field(default_factory=ProviderSettings)
    embed_dim: int = 256
    retrieval_k: int = 4
    retrieval_floor: float = 0.15
    leak_ngram_len: int = 12
    faq_threshold: float = 0.85
    rate_limit_per_hour: int = 30
    instructor_aliases: list[str] = field(default_factory=list)
    registry_path: Optional[str] = None

    def validate(self) -> None:
        if not self.corpus_path:
            raise ConfigError("corpus_path is required")
        if not self.log_store_path:
            raise ConfigError("log_store_path is required")
        if self.embed_dim < 1:
            raise ConfigError("embed_dim must be >= 1")
        if self.retrieval_k < 1:
            raise ConfigError("retrieval_k must be >= 1")
        if not (0.0 <= self.retrieval_floor <= 1.0):
            raise ConfigError("retrieval_floor must be in [0, 1]")
        if self.leak_ngram_len < 2:
            raise ConfigError("leak_ngram_len must be >= 2")
        if not (0.0 < self.faq_threshold <= 1.0):
            raise ConfigError("faq_threshold must be in (0, 1]")
        if self.rate_limit_per_hour < 1:
            raise ConfigError("rate_limit_per_hour must be >= 1")
        if self.provider.kind not in ("scripted", "http"):
            raise ConfigError(f"unknown provider kind {self.provider.kind!r}")
        if self.provider.kind == "http" and not self.provider.endpoint:
            raise ConfigError("http provider requires an endpoint")


def load_config(path: str) -> ServiceConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    provider_raw = raw.pop("provider", {}) or {}
    known = {f for f in ServiceConfig.__dataclass_fields__ if f != "provider"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    config = ServiceConfig(**raw)
    config.provider = ProviderSettings(**provider_raw)
    return config
