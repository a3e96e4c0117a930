"""Sparse and dense passage retrieval.

Sparse retrieval is backed by an in-memory inverted index over the
lowercased word tokens of each passage (punctuation tokens are not
terms, and stop-words are kept).  Dense retrieval is a brute-force
dot-product scan over an embedding store.  All rankings are total
orders: score descending, then passage ref ascending.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Passage, tokenize

__all__ = [
    "InvertedIndex",
    "EmbeddingStore",
    "RetrievalHit",
    "build_index",
    "tf_idf_score",
    "bm25_search",
    "tfidf_search",
    "dense_search",
    "mean_pool",
    "cosine",
    "save_embedding_store",
    "load_embedding_store",
]

BM25_K1 = 1.2
BM25_B = 0.75


@dataclass(frozen=True)
class RetrievalHit:
    ref: str
    score: float
    method: str  # "sparse" or "dense"


@dataclass
class InvertedIndex:
    """Postings keyed by term; one (ref, term frequency) pair per passage."""

    postings: dict[str, list[tuple[str, int]]]
    lengths: dict[str, int]  # passage ref -> word count
    n_passages: int
    avg_length: float

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def tf(self, term: str, ref: str) -> int:
        for r, f in self.postings.get(term, ()):
            if r == ref:
                return f
        return 0


def _passage_terms(passage: Passage) -> dict[str, int]:
    counts: dict[str, int] = {}
    for t in passage.tokens:
        if t.is_word:
            counts[t.lower] = counts.get(t.lower, 0) + 1
    return counts


def build_index(passages: list[Passage]) -> InvertedIndex:
    """Index a non-empty passage list; insertion order fixes posting order."""
    if not passages:
        raise ValueError("cannot index an empty passage list")
    postings: dict[str, list[tuple[str, int]]] = {}
    lengths: dict[str, int] = {}
    for p in passages:
        if p.ref in lengths:
            raise ValueError(f"duplicate passage ref {p.ref!r}")
        lengths[p.ref] = p.word_count
        for term, freq in _passage_terms(p).items():
            postings.setdefault(term, []).append((p.ref, freq))
    n = len(passages)
    avg = sum(lengths.values()) / n
    return InvertedIndex(postings=postings, lengths=lengths, n_passages=n, avg_length=avg)


def tf_idf_score(term: str, ref: str, index: InvertedIndex) -> float:
    """log(1 + tf) * log(N / df), natural logs; 0 when term or tf is absent."""
    df = index.df(term)
    if df == 0:
        return 0.0
    tf = index.tf(term, ref)
    if tf == 0:
        return 0.0
    return math.log(1.0 + tf) * math.log(index.n_passages / df)


def _query_terms(query: str) -> list[str]:
    # Deduplicated in first-occurrence order: the scoring formulas carry
    # no query-side term frequency.
    seen: list[str] = []
    for t in tokenize(query):
        if t.is_word and t.lower not in seen:
            seen.append(t.lower)
    return seen


def _top_n(scores: dict[str, float], n: int, method: str) -> list[RetrievalHit]:
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [RetrievalHit(ref=r, score=s, method=method) for r, s in ranked[:n]]


def bm25_search(index: InvertedIndex, query: str, n: int = 20) -> list[RetrievalHit]:
    """Okapi BM25 (k1=1.2, b=0.75) with idf = ln((N - df + 0.5)/(df + 0.5) + 1).

    Only passages containing at least one query term are scored; ties
    break on ascending ref.  A query with no indexed terms returns [].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scores: dict[str, float] = {}
    big_n = index.n_passages
    for term in _query_terms(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        idf = math.log((big_n - df + 0.5) / (df + 0.5) + 1.0)
        for ref, freq in plist:
            denom = freq + BM25_K1 * (
                1.0 - BM25_B + BM25_B * index.lengths[ref] / index.avg_length
            )
            scores[ref] = scores.get(ref, 0.0) + idf * freq * (BM25_K1 + 1.0) / denom
    return _top_n(scores, n, "sparse")


def tfidf_search(index: InvertedIndex, query: str, n: int = 20) -> list[RetrievalHit]:
    """Sum of tf_idf_score over the deduplicated query terms."""
    if n < 1:
        raise ValueError("n must be >= 1")
    scores: dict[str, float] = {}
    for term in _query_terms(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = math.log(index.n_passages / len(plist))
        for ref, freq in plist:
            scores[ref] = scores.get(ref, 0.0) + math.log(1.0 + freq) * idf
    return _top_n(scores, n, "sparse")


@dataclass
class EmbeddingStore:
    """Fixed-dimension vectors keyed by passage ref."""

    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, ref: str, vec) -> None:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (self.dim,):
            raise ValueError(f"vector for {ref!r} has shape {arr.shape}, want ({self.dim},)")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"vector for {ref!r} has non-finite entries")
        self.vectors[ref] = arr


def dense_search(store: EmbeddingStore, query_vec, k: int = 20) -> list[RetrievalHit]:
    """Exact top-k by dot product over every stored vector."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.asarray(query_vec, dtype=np.float64)
    if q.shape != (store.dim,):
        raise ValueError(f"query has shape {q.shape}, want ({store.dim},)")
    scores = {ref: float(np.dot(vec, q)) for ref, vec in store.vectors.items()}
    return _top_n(scores, k, "dense")


def mean_pool(vectors) -> np.ndarray:
    """Arithmetic mean of equal-length vectors; errors on an empty list."""
    if len(vectors) == 0:
        raise ValueError("mean_pool of an empty vector list")
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("vectors must share one length")
    return mat.mean(axis=0)


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero-norm input is an error."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("cosine requires two equal-length vectors")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero-norm vectors")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def save_embedding_store(store: EmbeddingStore, path) -> None:
    """JSONL: a {"dim": n} header line, then one {"ref", "vec"} line per passage."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": store.dim}) + "\n")
        for ref in sorted(store.vectors):
            vec = [float(x) for x in store.vectors[ref]]
            fh.write(json.dumps({"ref": ref, "vec": vec}) + "\n")


def load_embedding_store(path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if not isinstance(header, dict) or not isinstance(header.get("dim"), int):
            raise ValueError("embedding store header must carry an integer dim")
        store = EmbeddingStore(dim=header["dim"])
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            row = json.loads(line)
            if "ref" not in row or "vec" not in row:
                raise ValueError(f"line {line_no}: embedding row needs ref and vec")
            store.add(row["ref"], row["vec"])
    return store
