"""Long-form question answering engine.

Retrieval (sparse BM25/tf-idf or dense), span reading with provider
ensembling, keyword re-ranking, extractive and budgeted abstractive
long-answer generation, two-stage prompt marginalization, evaluation
metrics, and an HTTP service plus CLI on top.  All neural inference
sits behind pluggable providers with deterministic built-in fallbacks.
"""

__version__ = "0.1.0"

from .config import PipelineConfig, load_config
from .corpus import Document, Passage, ingest_jsonl, split_passages, split_sentences, tokenize
from .errors import ConfigError, LfqaError, ProtocolError, ProviderError, TransportError
from .pipeline import Engine, QueryResponse

__all__ = [
    "__version__",
    "PipelineConfig",
    "load_config",
    "Document",
    "Passage",
    "ingest_jsonl",
    "split_passages",
    "split_sentences",
    "tokenize",
    "LfqaError",
    "ConfigError",
    "ProviderError",
    "TransportError",
    "ProtocolError",
    "Engine",
    "QueryResponse",
]
