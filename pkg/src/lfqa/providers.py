"""Inference providers: wire protocols, HTTP clients, and built-in fallbacks.

Three provider kinds sit behind the engine: text completion, text
embedding, and span reading.  Each has an HTTP JSON client (30 s
timeout, one retry on transport failure, none on protocol errors) and
a deterministic built-in fallback so every feature works with zero
external services.
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol, Sequence

import httpx
import numpy as np

from .corpus import Passage, split_sentences, tokenize
from .errors import ProtocolError, TransportError
from .reader import find_best_span
from .rerank import STOP_WORDS

__all__ = [
    "LMProvider",
    "EmbeddingProvider",
    "MRCProvider",
    "HashEmbedding",
    "HeuristicMRC",
    "EchoLM",
    "HTTPLMProvider",
    "HTTPEmbeddingProvider",
    "HTTPMRCProvider",
    "DEFAULT_TIMEOUT_S",
]

DEFAULT_TIMEOUT_S = 30.0


class LMProvider(Protocol):
    def complete(self, prompt: str, *, max_tokens: int, temperature: float,
                 top_p: float, stop: Sequence[str], seed: int) -> str: ...


class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class MRCProvider(Protocol):
    def predict_span(self, question: str, passage: Passage): ...


# ---------------------------------------------------------------------------
# Built-in deterministic fallbacks


class HashEmbedding:
    """Hash-based embeddings: no model, fully deterministic.

    Each lowercased word token hashes to a sparse signed vector (nnz
    fixed positions valued +-1); a text embeds as the mean over its
    word-token vectors.  Texts without word tokens embed to zeros.
    """

    def __init__(self, dim: int = 64, nnz: int = 4):
        if dim < 1 or nnz < 1 or nnz > dim:
            raise ValueError("need 1 <= nnz <= dim")
        self.dim = dim
        self.nnz = nnz
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is not None:
            return vec
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=4 * self.nnz).digest()
        vec = np.zeros(self.dim, dtype=np.float64)
        for i in range(self.nnz):
            chunk = digest[4 * i : 4 * i + 4]
            value = int.from_bytes(chunk, "big")
            pos = value % self.dim
            sign = 1.0 if (value >> 16) % 2 == 0 else -1.0
            vec[pos] += sign
        self._cache[token] = vec
        return vec

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            words = [t.lower for t in tokenize(text) if t.is_word]
            if not words:
                out.append(np.zeros(self.dim, dtype=np.float64))
                continue
            out.append(np.mean([self._token_vector(w) for w in words], axis=0))
        return out


class HeuristicMRC:
    """Lexical-overlap span reader used when no reading service is configured.

    Token weight = 1 + (occurrences of that token among the question's
    content words).  Start probabilities are the normalized weights; end
    probabilities move each sentence's weight onto its final token, so
    the best span lands inside the sentence that matches the question.
    """

    def predict_span(self, question: str, passage: Passage):
        q_words = [t.lower for t in tokenize(question)
                   if t.is_word and t.lower not in STOP_WORDS]
        q_counts: dict[str, int] = {}
        for w in q_words:
            q_counts[w] = q_counts.get(w, 0) + 1

        n = len(passage.tokens)
        weights = np.ones(n, dtype=np.float64)
        for i, tok in enumerate(passage.tokens):
            weights[i] += q_counts.get(tok.lower, 0)

        start = weights / weights.sum()
        end_w = np.zeros(n, dtype=np.float64)
        for span in passage.sentences:
            lo, hi = span.token_start, span.token_end
            end_w[hi - 1] = weights[lo:hi].sum()
        end = end_w / end_w.sum()

        i, j = find_best_span(start, end)
        span_score = float(start[i] + end[j])
        return start, end, span_score


_SENT_FALLBACK_MAX = 60  # completion word cap when the caller sets none


class EchoLM:
    """Query-focused extractive fallback for text completion.

    Treats the prompt's last sentence as the query, scores the earlier
    sentences by content-word overlap with it, and returns the best one
    (earliest on ties).  Prompts with fewer than two sentences echo
    their leading words.  Fully deterministic; honors stop strings and
    the max_tokens word cap.  Few-shot field markers (Q:/A:/C:) are
    stripped from the output so echoed lines read as plain text.
    """

    _MARKERS = re.compile(r"^(?:[QAC]:\s*)+")

    def _truncate(self, text: str, max_tokens: int, stop: Sequence[str]) -> str:
        for marker in stop or ():
            pos = text.find(marker)
            if pos >= 0:
                text = text[:pos]
        text = self._MARKERS.sub("", text.strip())
        words = text.split()
        cap = max_tokens if max_tokens and max_tokens > 0 else _SENT_FALLBACK_MAX
        return " ".join(words[:cap])

    def complete(self, prompt: str, *, max_tokens: int = 0, temperature: float = 0.0,
                 top_p: float = 1.0, stop: Sequence[str] = (), seed: int = 0) -> str:
        tokens = tokenize(prompt)
        sents = split_sentences(prompt, tokens)
        if len(sents) < 2:
            return self._truncate(prompt.strip(), max_tokens, stop)

        def sent_text(span):
            return prompt[tokens[span.token_start].char_start:
                          tokens[span.token_end - 1].char_end]

        def content(span):
            return {
                t.lower for t in tokens[span.token_start : span.token_end]
                if t.is_word and t.lower not in STOP_WORDS
            }

        query_words = content(sents[-1])
        best_idx = 0
        best_overlap = -1
        for idx, span in enumerate(sents[:-1]):
            overlap = len(content(span) & query_words)
            if overlap > best_overlap:
                best_overlap = overlap
                best_idx = idx
        return self._truncate(sent_text(sents[best_idx]).strip(), max_tokens, stop)

    def complete_many(self, prompt: str, n: int, **kwargs) -> list[str]:
        return [self.complete(prompt, **kwargs) for _ in range(n)]


# ---------------------------------------------------------------------------
# HTTP clients


class _HTTPBase:
    def __init__(self, url: str, timeout_s: float = DEFAULT_TIMEOUT_S, transport=None):
        if not url:
            raise ValueError("provider url must be non-empty")
        self.url = url
        self._client = httpx.Client(timeout=timeout_s, transport=transport)

    def _post(self, body: dict) -> dict:
        last_exc = None
        for attempt in range(2):  # one retry, transport failures only
            try:
                response = self._client.post(self.url, json=body)
                break
            except httpx.TransportError as exc:
                last_exc = exc
        else:
            raise TransportError(f"provider at {self.url} unreachable: {last_exc}") from last_exc
        if response.status_code != 200:
            raise ProtocolError(f"provider at {self.url} returned HTTP {response.status_code}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolError(f"provider at {self.url} returned non-JSON body") from exc
        if not isinstance(payload, dict):
            raise ProtocolError(f"provider at {self.url} returned a non-object payload")
        return payload

    def close(self) -> None:
        self._client.close()


class HTTPLMProvider(_HTTPBase):
    """POST {prompt, max_tokens, temperature, top_p, stop, seed} -> {text}."""

    def complete(self, prompt: str, *, max_tokens: int, temperature: float,
                 top_p: float, stop: Sequence[str], seed: int) -> str:
        payload = self._post({
            "prompt": prompt,
            "max_tokens": max_tokens,
            "temperature": temperature,
            "top_p": top_p,
            "stop": list(stop),
            "seed": seed,
        })
        text = payload.get("text")
        if not isinstance(text, str):
            raise ProtocolError("completion response must carry a string 'text'")
        return text


class HTTPEmbeddingProvider(_HTTPBase):
    """POST {texts} -> {dim, vectors}."""

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        payload = self._post({"texts": list(texts)})
        dim = payload.get("dim")
        vectors = payload.get("vectors")
        if not isinstance(dim, int) or not isinstance(vectors, list):
            raise ProtocolError("embedding response must carry int 'dim' and list 'vectors'")
        if len(vectors) != len(texts):
            raise ProtocolError(
                f"embedding response has {len(vectors)} vectors for {len(texts)} texts"
            )
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,) or not np.all(np.isfinite(arr)):
                raise ProtocolError("embedding vectors must be finite and dim-length")
            out.append(arr)
        return out


class HTTPMRCProvider(_HTTPBase):
    """POST {question, passage, tokens} -> {start_probs, end_probs, span_score}.

    The request carries the engine's token offsets so the service can
    align its distributions with the engine's token sequence.
    """

    def predict_span(self, question: str, passage: Passage):
        payload = self._post({
            "question": question,
            "passage": passage.text,
            "tokens": [[t.char_start, t.char_end] for t in passage.tokens],
        })
        for key in ("start_probs", "end_probs"):
            if not isinstance(payload.get(key), list):
                raise ProtocolError(f"span response must carry list {key!r}")
        if not isinstance(payload.get("span_score"), (int, float)):
            raise ProtocolError("span response must carry numeric 'span_score'")
        return (
            np.asarray(payload["start_probs"], dtype=np.float64),
            np.asarray(payload["end_probs"], dtype=np.float64),
            float(payload["span_score"]),
        )
