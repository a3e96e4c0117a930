"""Long-answer generation: input assembly, budgeted decoding, extractive rank.

Two input templates are supported: "evidence_query" (paragraph text,
then its evidence sentences, then the query appended at the end) and
"fid" (marked question:/title:/context: fields).  Long answers are
built segment by segment under a word budget; the extractive path
ranks evidence sentences against the query by embedding similarity.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from enum import Enum

from .corpus import Passage, count_words, tokenize
from .errors import ProviderError
from .metrics import normalize_answer
from .retrieval import cosine

__all__ = [
    "PromptTemplate",
    "GenerationInput",
    "LongAnswer",
    "Candidate",
    "assemble_abstractive_input",
    "generate_long_answer",
    "extractive_candidates",
    "rank_extractive",
    "qfs_input_format",
    "parse_qfs_input",
    "mask_random_words",
    "DEFAULT_BUDGET_WORDS",
]

DEFAULT_BUDGET_WORDS = 250


class PromptTemplate(str, Enum):
    EVIDENCE_QUERY = "evidence_query"
    FID = "fid"


@dataclass(frozen=True)
class GenerationInput:
    """Role-tagged parts; rendered is the single-space join of their texts."""

    parts: tuple[tuple[str, str], ...]
    rendered: str
    source_ref: str = ""


@dataclass(frozen=True)
class LongAnswer:
    text: str
    segments: tuple[tuple[str, str], ...]  # (source ref, segment text)
    word_count: int
    error: str | None = None


@dataclass(frozen=True)
class Candidate:
    ref: str
    text: str


def _render(parts) -> str:
    return " ".join(text for _, text in parts)


def assemble_abstractive_input(passages, span_texts, query: str,
                               template: PromptTemplate = PromptTemplate.EVIDENCE_QUERY,
                               titles=None) -> list[GenerationInput]:
    """One GenerationInput per passage, order preserved.

    ``span_texts[i]`` holds passage i's evidence sentences (may be
    empty, in which case the evidence part is omitted).  The fid
    template requires ``titles``.
    """
    passages = list(passages)
    span_texts = list(span_texts)
    if len(span_texts) != len(passages):
        raise ValueError("span_texts must align with passages")
    if template is PromptTemplate.FID:
        if titles is None or len(list(titles)) != len(passages):
            raise ValueError("fid template requires one title per passage")
        titles = list(titles)

    out: list[GenerationInput] = []
    for i, passage in enumerate(passages):
        text = passage.text if isinstance(passage, Passage) else str(passage)
        ref = passage.ref if isinstance(passage, Passage) else f"input#{i:04d}"
        if template is PromptTemplate.EVIDENCE_QUERY:
            parts: list[tuple[str, str]] = [("context", text)]
            evidence = " ".join(span_texts[i])
            if evidence:
                parts.append(("answer_spans", evidence))
            parts.append(("query", query))
        else:
            parts = [
                ("query", f"question: {query}"),
                ("title", f"title: {titles[i]}"),
                ("context", f"context: {text}"),
            ]
        out.append(GenerationInput(parts=tuple(parts), rendered=_render(parts), source_ref=ref))
    return out


def generate_long_answer(provider, inputs, budget_words: int = DEFAULT_BUDGET_WORDS,
                         *, max_tokens: int = 256, seed: int = 0) -> LongAnswer:
    """Summarize inputs one by one until the word budget is reached.

    Segments are committed in input order; the loop stops after the
    first segment that reaches or passes the budget, and the final
    segment is kept whole.  A provider failure mid-way yields the
    partial answer with the error recorded.
    """
    if budget_words < 1:
        raise ValueError("budget_words must be >= 1")
    segments: list[tuple[str, str]] = []
    total_words = 0
    error: str | None = None
    for i, gi in enumerate(inputs):
        try:
            completion = provider.complete(
                gi.rendered,
                max_tokens=max_tokens,
                temperature=0.0,
                top_p=1.0,
                stop=(),
                seed=seed + i,
            )
        except ProviderError as exc:
            error = str(exc)
            break
        segment = completion.strip()
        if not segment:
            continue
        segments.append((gi.source_ref, segment))
        total_words += count_words(tokenize(segment))
        if total_words >= budget_words:
            break
    return LongAnswer(
        text=" ".join(seg for _, seg in segments),
        segments=tuple(segments),
        word_count=total_words,
        error=error,
    )


def extractive_candidates(fused, passages) -> list[Candidate]:
    """Sentences containing answer spans, deduplicated by normalized text.

    ``fused`` iterates FusedAnswer objects; ``passages`` maps ref ->
    Passage.  Candidates keep first-appearance order.  A span covering
    two sentences contributes both.
    """
    out: list[Candidate] = []
    seen: set[str] = set()
    for fa in fused:
        passage = passages[fa.passage_ref]
        for span in fa.spans:
            for idx, sent in enumerate(passage.sentences):
                s0 = passage.tokens[sent.token_start].char_start
                s1 = passage.tokens[sent.token_end - 1].char_end
                if s0 < span.char_end and span.char_start < s1:
                    text = passage.text[s0:s1]
                    key = normalize_answer(text)
                    if key and key not in seen:
                        seen.add(key)
                        out.append(Candidate(ref=fa.passage_ref, text=text))
    return out


def rank_extractive(query: str, candidates, embedder, top_k: int = 3) -> LongAnswer:
    """Keep the top_k candidate sentences by embedding similarity to the query.

    The answer concatenates them in descending-similarity order (ties
    keep candidate order).  Zero-norm embeddings score 0.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    candidates = list(candidates)
    if not candidates:
        return LongAnswer(text="", segments=(), word_count=0)
    vectors = embedder.embed([query] + [c.text for c in candidates])
    q_vec = vectors[0]
    sims: list[float] = []
    for vec in vectors[1:]:
        try:
            sims.append(cosine(q_vec, vec))
        except ValueError:
            sims.append(0.0)
    order = sorted(range(len(candidates)), key=lambda i: (-sims[i], i))[:top_k]
    chosen = [candidates[i] for i in order]
    text = " ".join(c.text for c in chosen)
    return LongAnswer(
        text=text,
        segments=tuple((c.ref, c.text) for c in chosen),
        word_count=count_words(tokenize(text)),
    )


def qfs_input_format(document: str, query: str) -> str:
    """Mark a document/query pair as one sequence: [CLS] doc [SEP] query."""
    return f"[CLS] {document} [SEP] {query}"


def parse_qfs_input(s: str) -> tuple[str, str]:
    """Invert qfs_input_format; raises ValueError on unmarked input."""
    m = re.fullmatch(r"\[CLS\] (.*) \[SEP\] (.*)", s, flags=re.DOTALL)
    if m is None:
        raise ValueError("input does not match '[CLS] <document> [SEP] <query>'")
    return m.group(1), m.group(2)


def mask_random_words(text: str, ratio: float = 0.3, seed: int = 0) -> str:
    """Replace round(ratio * n) whitespace-delimited words with [MASK].

    Positions are drawn without replacement from a seeded RNG; all
    original whitespace is preserved.  ratio 0 returns the text
    unchanged; ratio 1 masks every word.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must lie in [0, 1]")
    spans = [m.span() for m in re.finditer(r"\S+", text)]
    n = len(spans)
    count = round(ratio * n)
    if count == 0:
        return text
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(n), count))
    out = []
    prev = 0
    for idx in chosen:
        s, e = spans[idx]
        out.append(text[prev:s])
        out.append("[MASK]")
        prev = e
    out.append(text[prev:])
    return "".join(out)
