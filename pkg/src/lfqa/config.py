"""Pipeline configuration: JSON file, defaults, environment overrides.

An empty config file (or no file) yields a fully working deterministic
pipeline backed by the built-in providers.  Provider endpoints may be
set in the file or overridden by LFQA_LM_URL, LFQA_EMB_URL,
LFQA_MRC_URL and LFQA_MRC2_URL.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .rerank import RerankConfig

__all__ = [
    "RetrievalConfig",
    "GenerationConfig",
    "CgapConfig",
    "ProviderConfig",
    "PipelineConfig",
    "load_config",
    "ENV_VARS",
]

ENV_VARS = {
    "lm_url": "LFQA_LM_URL",
    "emb_url": "LFQA_EMB_URL",
    "mrc_url": "LFQA_MRC_URL",
    "mrc2_url": "LFQA_MRC2_URL",
}

MODES = ("extractive", "abstractive", "cgap")


@dataclass(frozen=True)
class RetrievalConfig:
    mode: str = "sparse"  # sparse | dense
    sparse_scheme: str = "bm25"  # bm25 | tfidf
    n: int = 20

    def validate(self) -> None:
        if self.mode not in ("sparse", "dense"):
            raise ConfigError(f"retrieval.mode must be sparse or dense, got {self.mode!r}")
        if self.sparse_scheme not in ("bm25", "tfidf"):
            raise ConfigError(
                f"retrieval.sparse_scheme must be bm25 or tfidf, got {self.sparse_scheme!r}"
            )
        if self.n < 1:
            raise ConfigError("retrieval.n must be >= 1")


@dataclass(frozen=True)
class GenerationConfig:
    mode: str = "extractive"
    budget: int = 250
    k_passages: int = 3
    template: str = "evidence_query"  # evidence_query | fid

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"generation.mode must be one of {MODES}, got {self.mode!r}")
        if self.budget < 1:
            raise ConfigError("generation.budget must be >= 1")
        if self.k_passages < 1:
            raise ConfigError("generation.k_passages must be >= 1")
        if self.template not in ("evidence_query", "fid"):
            raise ConfigError(
                f"generation.template must be evidence_query or fid, got {self.template!r}"
            )


@dataclass(frozen=True)
class CgapConfig:
    k: int = 8
    m: int = 10
    top_p: float = 0.9
    repo_path: str | None = None

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError("cgap.k must be >= 1")
        if self.m < 0:
            raise ConfigError("cgap.m must be >= 0")
        if not 0.0 < self.top_p <= 1.0:
            raise ConfigError("cgap.top_p must lie in (0, 1]")


@dataclass(frozen=True)
class ProviderConfig:
    lm_url: str | None = None
    emb_url: str | None = None
    mrc_url: str | None = None
    mrc2_url: str | None = None
    timeout_s: float = 30.0

    def validate(self) -> None:
        if self.timeout_s <= 0:
            raise ConfigError("providers.timeout_s must be positive")


@dataclass(frozen=True)
class PipelineConfig:
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    rerank: RerankConfig = field(default_factory=RerankConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    cgap: CgapConfig = field(default_factory=CgapConfig)
    providers: ProviderConfig = field(default_factory=ProviderConfig)
    max_words: int = 400

    def validate(self) -> None:
        self.retrieval.validate()
        self.generation.validate()
        self.cgap.validate()
        self.providers.validate()
        if self.max_words < 1:
            raise ConfigError("max_words must be >= 1")


def _build_section(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    valid = set(cls.__dataclass_fields__)
    unknown = set(data) - valid
    if unknown:
        raise ConfigError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config section {name!r}: {exc}") from exc


def load_config(path=None, env=None) -> PipelineConfig:
    """Build a validated PipelineConfig from a JSON file plus env overrides.

    path=None or an empty JSON object produces the defaults.
    """
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")

    known = {"retrieval", "rerank", "generation", "cgap", "providers", "max_words"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    cfg = PipelineConfig(
        retrieval=_build_section(RetrievalConfig, data.get("retrieval", {}), "retrieval"),
        rerank=_build_section(RerankConfig, data.get("rerank", {}), "rerank"),
        generation=_build_section(GenerationConfig, data.get("generation", {}), "generation"),
        cgap=_build_section(CgapConfig, data.get("cgap", {}), "cgap"),
        providers=_build_section(ProviderConfig, data.get("providers", {}), "providers"),
        max_words=data.get("max_words", 400),
    )

    overrides = {
        key: env[var] for key, var in ENV_VARS.items() if env.get(var)
    }
    if overrides:
        cfg = replace(cfg, providers=replace(cfg.providers, **overrides))

    cfg.validate()
    return cfg
