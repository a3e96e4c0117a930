"""Machine reading: span prediction, ensembling, fusion and evidence scores.

A reading provider returns start/end probability distributions over a
passage's tokens plus its own span score.  The engine extracts the best
answer span itself, combines the confidence of two providers, fuses
their spans, and turns the distributions into sentence-level evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Passage
from .errors import ProtocolError

__all__ = [
    "SPAN_WINDOW",
    "SpanPrediction",
    "EvidenceSentence",
    "FusedSpan",
    "FusedAnswer",
    "find_best_span",
    "read",
    "ensemble_confidence",
    "fuse_answers",
    "fuse_char_spans",
    "sentence_evidence",
    "normalize_evidence",
    "answer_relevance",
]

SPAN_WINDOW = 30  # maximum answer span length in tokens


@dataclass(frozen=True)
class SpanPrediction:
    """Per-token start/end distributions plus the provider's own score."""

    passage_ref: str
    start_probs: np.ndarray
    end_probs: np.ndarray
    best_span: tuple[int, int]  # inclusive token indices
    span_score: float


@dataclass(frozen=True)
class EvidenceSentence:
    passage_ref: str
    sentence_index: int
    raw_score: float
    normalized_prob: float


@dataclass(frozen=True)
class FusedSpan:
    passage_ref: str
    char_start: int
    char_end: int
    source: str  # "a", "b" or "merged"


@dataclass(frozen=True)
class FusedAnswer:
    passage_ref: str
    spans: tuple[FusedSpan, ...]


def find_best_span(start_probs, end_probs, window: int = SPAN_WINDOW) -> tuple[int, int]:
    """Arg-max of start_probs[i] + end_probs[j] over j >= i, j - i < window.

    Ties break to the earliest start, then the largest end inside the
    window, so uniform distributions yield (0, min(window - 1, n - 1)).
    """
    s = np.asarray(start_probs, dtype=np.float64)
    e = np.asarray(end_probs, dtype=np.float64)
    n = s.shape[0]
    if n == 0 or e.shape[0] != n:
        raise ValueError("start and end distributions must be non-empty and equal length")
    if window < 1:
        raise ValueError("window must be >= 1")
    best_i = best_j = 0
    best_score = -np.inf
    for i in range(n):
        hi = min(i + window, n)
        for j in range(i, hi):
            score = s[i] + e[j]
            if score > best_score or (score == best_score and i == best_i and j > best_j):
                best_score = score
                best_i, best_j = i, j
    return best_i, best_j


def read(provider, question: str, passage: Passage, window: int = SPAN_WINDOW) -> SpanPrediction:
    """Run one reading provider over a passage.

    Validates the provider's distributions (length match, non-negative,
    sums within 1e-3 of 1), renormalizes them to machine precision, and
    extracts the best span.
    """
    start, end, span_score = provider.predict_span(question, passage)
    n = len(passage.tokens)
    s = np.asarray(start, dtype=np.float64)
    e = np.asarray(end, dtype=np.float64)
    for name, arr in (("start_probs", s), ("end_probs", e)):
        if arr.ndim != 1 or arr.shape[0] != n:
            raise ProtocolError(
                f"{name} has length {arr.shape[0] if arr.ndim == 1 else 'n/a'}, "
                f"want {n}"
            )
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ProtocolError(f"{name} must be finite and non-negative")
        if abs(float(arr.sum()) - 1.0) > 1e-3:
            raise ProtocolError(f"{name} sums to {float(arr.sum())!r}, want 1 within 1e-3")
    s = s / s.sum()
    e = e / e.sum()
    best = find_best_span(s, e, window)
    return SpanPrediction(
        passage_ref=passage.ref,
        start_probs=s,
        end_probs=e,
        best_span=best,
        span_score=float(span_score),
    )


def ensemble_confidence(s_m: float, s_b: float) -> float:
    """Combine two reader scores.

    Both negative: 0.5 * min(|s_m|, |s_b|) - max(|s_m|, |s_b|);
    otherwise their sum.  Symmetric in its arguments.
    """
    if s_m < 0 and s_b < 0:
        am, ab = abs(s_m), abs(s_b)
        return 0.5 * min(am, ab) - max(am, ab)
    return s_m + s_b


def _sentence_char_range(passage: Passage, sent_idx: int) -> tuple[int, int]:
    span = passage.sentences[sent_idx]
    return (
        passage.tokens[span.token_start].char_start,
        passage.tokens[span.token_end - 1].char_end,
    )


def _sentences_covering(passage: Passage, char_start: int, char_end: int) -> list[int]:
    hits = []
    for idx in range(len(passage.sentences)):
        s0, s1 = _sentence_char_range(passage, idx)
        if s0 < char_end and char_start < s1:
            hits.append(idx)
    return hits


def _expand_to_sentences(passage: Passage, char_start: int, char_end: int) -> tuple[int, int]:
    covering = _sentences_covering(passage, char_start, char_end)
    if not covering:
        return char_start, char_end
    first = _sentence_char_range(passage, covering[0])
    last = _sentence_char_range(passage, covering[-1])
    return first[0], last[1]


def _merge_spans(spans: list[list]) -> list[list]:
    """Merge [start, end, source] triples to a fixpoint.

    Identical spans collapse into one (source "merged" when the sources
    differ); a span contained in another is absorbed by the container,
    which becomes "merged".  Spans that merely overlap are both kept.
    """
    pending = [list(sp) for sp in spans]
    changed = True
    while changed:
        changed = False
        out: list[list] = []
        for sp in pending:
            absorbed = False
            for it in out:
                if it[0] == sp[0] and it[1] == sp[1]:
                    if it[2] != sp[2]:
                        it[2] = "merged"
                    absorbed = True
                    break
                if it[0] <= sp[0] and sp[1] <= it[1]:
                    it[2] = "merged"
                    absorbed = True
                    break
                if sp[0] <= it[0] and it[1] <= sp[1]:
                    it[0], it[1], it[2] = sp[0], sp[1], "merged"
                    absorbed = True
                    break
            if absorbed:
                changed = True
            else:
                out.append(sp)
        pending = out
    return pending


def fuse_char_spans(passage: Passage, spans_a, spans_b) -> FusedAnswer:
    """Fuse two char-span lists from the same passage.

    Identical spans merge into one; when one span contains the other,
    the container survives marked "merged"; otherwise both are kept.
    Surviving spans are expanded to full sentence boundaries and
    consolidated again, so fusing a fused answer with itself is a no-op.
    """
    raw: list[list] = []
    for s, e, *rest in spans_a:
        raw.append([s, e, rest[0] if rest else "a"])
    for s, e, *rest in spans_b:
        raw.append([s, e, rest[0] if rest else "b"])
    for s, e, _ in raw:
        if s < 0 or e > len(passage.text) or s >= e:
            raise ValueError(f"char span ({s}, {e}) out of passage bounds")

    merged = _merge_spans(raw)
    expanded = [
        [*_expand_to_sentences(passage, s, e), src] for s, e, src in merged
    ]
    final = _merge_spans(expanded)
    final.sort(key=lambda it: (it[0], it[1]))
    return FusedAnswer(
        passage_ref=passage.ref,
        spans=tuple(FusedSpan(passage.ref, s, e, src) for s, e, src in final),
    )


def fuse_answers(passage: Passage, spans_a, spans_b) -> FusedAnswer:
    """Fuse two readers' token spans (inclusive (i, j) pairs)."""

    def _to_char(spans, source):
        out = []
        for i, j in spans:
            if not (0 <= i <= j < len(passage.tokens)):
                raise ValueError(f"token span ({i}, {j}) out of passage bounds")
            out.append((passage.tokens[i].char_start, passage.tokens[j].char_end, source))
        return out

    return fuse_char_spans(passage, _to_char(spans_a, "a"), _to_char(spans_b, "b"))


def sentence_evidence(pred: SpanPrediction, passage: Passage) -> list[tuple[int, float]]:
    """Per-sentence raw evidence: sum of start+end mass over its tokens.

    The raw scores of one passage sum to 2 (each distribution sums to 1).
    """
    if len(pred.start_probs) != len(passage.tokens):
        raise ValueError("prediction does not align with passage tokens")
    out = []
    for idx, span in enumerate(passage.sentences):
        lo, hi = span.token_start, span.token_end
        raw = float(pred.start_probs[lo:hi].sum() + pred.end_probs[lo:hi].sum())
        out.append((idx, raw))
    return out


def normalize_evidence(per_passage) -> list[EvidenceSentence]:
    """Normalize raw sentence scores across passages by their global sum.

    ``per_passage`` iterates (passage_ref, [raw scores]) pairs.  Raw
    scores must be non-negative and not all zero.  Output order follows
    the input; normalized values sum to 1.
    """
    flat: list[tuple[str, int, float]] = []
    for ref, raws in per_passage:
        for idx, raw in enumerate(raws):
            if raw < 0:
                raise ValueError(f"negative raw evidence score for {ref!r}")
            flat.append((ref, idx, float(raw)))
    total = sum(r for _, _, r in flat)
    if total <= 0.0:
        raise ValueError("evidence scores are all zero; nothing to normalize")
    return [
        EvidenceSentence(ref, idx, raw, raw / total) for ref, idx, raw in flat
    ]


def answer_relevance(pred: SpanPrediction) -> np.ndarray:
    """Per-token relevance r = start_probs + end_probs, entries in (0, 2)."""
    return pred.start_probs + pred.end_probs
