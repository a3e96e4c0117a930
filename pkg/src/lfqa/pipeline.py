"""End-to-end question answering: retrieve, read, fuse, rerank, generate.

The Engine owns an indexed corpus plus resolved providers and exposes
retrieve/answer_question.  Responses are deterministic given a seed and
deterministic providers; wall-clock timings are collected on the
QueryResponse object but never serialized into the machine JSON.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

from . import answer_gen, cgap, reader, rerank, retrieval, store
from .answer_gen import LongAnswer, PromptTemplate
from .config import PipelineConfig
from .corpus import Document, Passage, count_words, ingest_jsonl, split_passages, tokenize
from .errors import ConfigError
from .providers import (
    EchoLM,
    HashEmbedding,
    HeuristicMRC,
    HTTPEmbeddingProvider,
    HTTPLMProvider,
    HTTPMRCProvider,
)

__all__ = ["Engine", "QueryResponse", "build_corpus_tables"]


@dataclass
class QueryResponse:
    """Everything a query run produced, including per-stage timings.

    ``to_dict`` is the canonical machine form; it excludes timings_ms so
    that identical inputs serialize to identical bytes.
    """

    question: str
    mode: str
    seed: int
    passages: list[dict]
    answer: dict
    cgap: dict | None = None
    no_results: bool = False
    timings_ms: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        body = {
            "question": self.question,
            "mode": self.mode,
            "seed": self.seed,
            "no_results": self.no_results,
            "passages": self.passages,
            "answer": self.answer,
        }
        if self.cgap is not None:
            body["cgap"] = self.cgap
        return body


def build_corpus_tables(docs: list[Document], max_words: int):
    """Split documents into passages; returns (titles, passages by ref)."""
    documents = {d.id: d.title for d in docs}
    passages: dict[str, Passage] = {}
    for doc in docs:
        for p in split_passages(doc, max_words):
            passages[p.ref] = p
    return documents, passages


class Engine:
    """A loaded corpus plus providers, ready to answer questions."""

    def __init__(self, documents: dict[str, str], passages: dict[str, Passage],
                 index: retrieval.InvertedIndex, cfg: PipelineConfig, *,
                 warn=None):
        self.documents = documents
        self.passages = passages
        self.index = index
        self.cfg = cfg
        self._warn = warn or (lambda msg: warnings.warn(msg, stacklevel=2))
        self._emb_store: retrieval.EmbeddingStore | None = None
        self._repo: cgap.SupportRepository | None = None
        self._repo_loaded = False

        p = cfg.providers
        self.lm_is_builtin = p.lm_url is None
        self.lm = EchoLM() if p.lm_url is None else HTTPLMProvider(p.lm_url, p.timeout_s)
        self.embedder = (
            HashEmbedding() if p.emb_url is None
            else HTTPEmbeddingProvider(p.emb_url, p.timeout_s)
        )
        self.mrc = (
            HeuristicMRC() if p.mrc_url is None
            else HTTPMRCProvider(p.mrc_url, p.timeout_s)
        )
        self.mrc2 = None if p.mrc2_url is None else HTTPMRCProvider(p.mrc2_url, p.timeout_s)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_corpus(cls, corpus_path, cfg: PipelineConfig, **kwargs) -> "Engine":
        docs = ingest_jsonl(corpus_path)
        documents, passages = build_corpus_tables(docs, cfg.max_words)
        if not passages:
            raise ConfigError(f"corpus {corpus_path} produced no passages")
        index = retrieval.build_index(list(passages.values()))
        return cls(documents, passages, index, cfg, **kwargs)

    @classmethod
    def from_artifact(cls, index_path, cfg: PipelineConfig, **kwargs) -> "Engine":
        documents, passages, index, _ = store.load_index(index_path)
        return cls(documents, passages, index, cfg, **kwargs)

    # -- stages -------------------------------------------------------

    def _embedding_store(self) -> retrieval.EmbeddingStore:
        if self._emb_store is None:
            refs = sorted(self.passages)
            vectors = self.embedder.embed([self.passages[r].text for r in refs])
            dim = len(vectors[0])
            es = retrieval.EmbeddingStore(dim=dim)
            for ref, vec in zip(refs, vectors):
                es.add(ref, vec)
            self._emb_store = es
        return self._emb_store

    def retrieve(self, question: str, n: int | None = None) -> list[retrieval.RetrievalHit]:
        n = self.cfg.retrieval.n if n is None else n
        if self.cfg.retrieval.mode == "dense":
            q_vec = self.embedder.embed([question])[0]
            return retrieval.dense_search(self._embedding_store(), q_vec, n)
        if self.cfg.retrieval.sparse_scheme == "tfidf":
            return retrieval.tfidf_search(self.index, question, n)
        return retrieval.bm25_search(self.index, question, n)

    def support_repository(self) -> cgap.SupportRepository | None:
        if not self._repo_loaded:
            self._repo_loaded = True
            if self.cfg.cgap.repo_path is not None:
                self._repo = cgap.SupportRepository.from_jsonl(
                    self.cfg.cgap.repo_path, self.embedder
                )
        return self._repo

    def cgap_answer(self, question: str, seed: int, k: int | None = None) -> cgap.MarginalizationResult:
        cfg = self.cfg.cgap
        k = cfg.k if k is None else k
        if self.lm_is_builtin:
            self._warn("no LM endpoint configured; using the built-in deterministic mock")
        repo = self.support_repository()
        if repo is not None:
            m = min(cfg.m, len(repo))
            return cgap.run_cgap(
                question, repo, self.lm, self.embedder,
                k=k, m=m, top_p=cfg.top_p, seed=seed,
            )
        # No support repository: same two stages, zero-shot prompts.
        ctx_prompt = cgap.build_context_prompt([], question)
        contexts = cgap.generate_contexts(self.lm, ctx_prompt, k, top_p=cfg.top_p, seed=seed)
        answers = [
            cgap.predict_answer(
                self.lm, cgap.build_answer_prompt([], ctx, question), seed=seed + 1000 + i,
            )
            for i, ctx in enumerate(contexts)
        ]
        return cgap.majority_vote(answers, contexts)

    # -- full pipeline ------------------------------------------------

    def answer_question(self, question: str, *, mode: str | None = None,
                        seed: int = 0, n: int | None = None) -> QueryResponse:
        if not question or not question.strip():
            raise ValueError("question must be non-empty")
        mode = mode or self.cfg.generation.mode
        if mode not in ("extractive", "abstractive", "cgap"):
            raise ValueError(f"unknown mode {mode!r}")
        timings: dict[str, float] = {}

        t0 = time.perf_counter()
        hits = self.retrieve(question, n)
        timings["retrieve"] = (time.perf_counter() - t0) * 1000.0

        if not hits and mode != "cgap":
            return QueryResponse(
                question=question, mode=mode, seed=seed, passages=[],
                answer={"text": "", "segments": [], "word_count": 0, "error": None},
                no_results=True, timings_ms=timings,
            )

        t0 = time.perf_counter()
        fused_by_ref: dict[str, reader.FusedAnswer] = {}
        conf_by_ref: dict[str, float] = {}
        for hit in hits:
            passage = self.passages[hit.ref]
            pred_a = reader.read(self.mrc, question, passage)
            if self.mrc2 is not None:
                pred_b = reader.read(self.mrc2, question, passage)
                conf = reader.ensemble_confidence(pred_a.span_score, pred_b.span_score)
                fused = reader.fuse_answers(
                    passage, [pred_a.best_span], [pred_b.best_span]
                )
            else:
                # Single reader: its own span score stands in for the
                # two-model combination.
                conf = pred_a.span_score
                fused = reader.fuse_answers(passage, [pred_a.best_span], [])
            fused_by_ref[hit.ref] = fused
            conf_by_ref[hit.ref] = conf
        timings["read"] = (time.perf_counter() - t0) * 1000.0

        t0 = time.perf_counter()
        scored = rerank.rerank(
            [(self.passages[h.ref], conf_by_ref[h.ref]) for h in hits],
            question, self.cfg.rerank,
        )
        timings["rerank"] = (time.perf_counter() - t0) * 1000.0

        passage_rows = []
        for row in scored:
            # Emitted scores must recompose exactly.
            expected = rerank.rerank_score(row.s_match, row.s_conf, self.cfg.rerank.alpha)
            if row.rerank_score != expected:
                raise AssertionError(
                    f"score recomposition failed for {row.passage_ref}: "
                    f"{row.rerank_score!r} != {expected!r}"
                )
            p = self.passages[row.passage_ref]
            passage_rows.append({
                "ref": row.passage_ref,
                "doc_id": p.doc_id,
                "passage_index": p.passage_index,
                "title": self.documents.get(p.doc_id, ""),
                "text": p.text,
                "scores": {
                    "s_freq": row.s_freq,
                    "s_num": row.s_num,
                    "s_match": row.s_match,
                    "s_conf": row.s_conf,
                    "rerank_score": row.rerank_score,
                },
                "highlights": [
                    {"start": s.char_start, "end": s.char_end, "source": s.source}
                    for s in fused_by_ref[row.passage_ref].spans
                ],
            })

        t0 = time.perf_counter()
        cgap_block = None
        if mode == "cgap":
            result = self.cgap_answer(question, seed)
            cgap_block = {
                "contexts": list(result.contexts),
                "raw_answers": list(result.raw_answers),
                "tally": [[k, v] for k, v in result.sorted_tally()],
                "final": result.final,
            }
            answer = {
                "text": result.final,
                "segments": [["cgap", result.final]],
                "word_count": count_words(tokenize(result.final)),
                "error": None,
            }
        else:
            top_refs = [row.passage_ref for row in scored[: self.cfg.generation.k_passages]]
            if mode == "extractive":
                candidates = answer_gen.extractive_candidates(
                    [fused_by_ref[r] for r in top_refs], self.passages
                )
                long = answer_gen.rank_extractive(
                    question, candidates, self.embedder,
                    top_k=self.cfg.generation.k_passages,
                )
            else:
                template = PromptTemplate(self.cfg.generation.template)
                span_texts = []
                for ref in top_refs:
                    p = self.passages[ref]
                    span_texts.append(
                        [p.text[s.char_start : s.char_end] for s in fused_by_ref[ref].spans]
                    )
                inputs = answer_gen.assemble_abstractive_input(
                    [self.passages[r] for r in top_refs], span_texts, question,
                    template=template,
                    titles=[self.documents.get(self.passages[r].doc_id, "") for r in top_refs],
                )
                long = answer_gen.generate_long_answer(
                    self.lm, inputs, self.cfg.generation.budget, seed=seed,
                )
            answer = {
                "text": long.text,
                "segments": [[ref, text] for ref, text in long.segments],
                "word_count": long.word_count,
                "error": long.error,
            }
        timings["generate"] = (time.perf_counter() - t0) * 1000.0

        return QueryResponse(
            question=question, mode=mode, seed=seed, passages=passage_rows,
            answer=answer, cgap=cgap_block, no_results=not hits, timings_ms=timings,
        )
