"""Keyword-match scoring and answer re-ranking.

Each retrieved passage gets a match score built from query keyword
statistics and a passage-length gate, then a composite score that adds
the reading ensemble's confidence.  Keywords default to the stop-word
complement of the question's word tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections import Counter

from .corpus import Passage, Token, tokenize

__all__ = [
    "STOP_WORDS",
    "RerankConfig",
    "MatchScore",
    "ScoredPassage",
    "default_tagger",
    "extract_keywords",
    "match_score",
    "rerank_score",
    "rerank",
]

STOP_WORDS = frozenset("""
a about above after again against all am an and any are aren as at be because
been before being below between both but by can cannot could couldn did didn
do does doesn doing don down during each few for from further had hadn has
hasn have haven having he her here hers herself him himself his how i if in
into is isn it its itself just me more most mustn my myself no nor not of off
on once only or other ought our ours ourselves out over own same shan she
should shouldn so some such than that the their theirs them themselves then
there these they this those through to too under until up very was wasn we
were weren what when where which while who whom why will with won would
wouldn you your yours yourself yourselves
""".split())

_NUMERIC = frozenset("0123456789.,")


@dataclass(frozen=True)
class RerankConfig:
    lambda1: float = 0.2
    lambda2: float = 10.0
    l_c: int = 50
    alpha: float = 0.5

    def __post_init__(self):
        if self.l_c < 1:
            raise ValueError("l_c must be >= 1")


@dataclass(frozen=True)
class MatchScore:
    s_freq: int
    s_num: int
    s_match: float


@dataclass(frozen=True)
class ScoredPassage:
    passage_ref: str
    s_freq: int
    s_num: int
    s_match: float
    s_conf: float
    rerank_score: float


def default_tagger(token: Token) -> bool:
    """Content-word test: a word token that is neither a stop-word nor a number."""
    if not token.is_word:
        return False
    if token.lower in STOP_WORDS:
        return False
    if all(c in _NUMERIC for c in token.lower):
        return False
    return True


def extract_keywords(question: str, tagger=default_tagger) -> list[str]:
    """Lowercased keywords in first-occurrence order, deduplicated."""
    out: list[str] = []
    for tok in tokenize(question):
        if tagger(tok) and tok.lower not in out:
            out.append(tok.lower)
    return out


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def match_score(keywords, passage: Passage, cfg: RerankConfig = RerankConfig()) -> MatchScore:
    """s_match = lambda1 * s_freq * sigmoid(l - l_c) + lambda2 * s_num.

    s_freq counts every keyword occurrence in the passage, s_num counts
    distinct keywords present, and l is the passage word count, gated by
    a logistic centered at l_c.  No keywords present yields the zero score.
    """
    counts = Counter(t.lower for t in passage.tokens if t.is_word)
    s_freq = sum(counts.get(k, 0) for k in keywords)
    s_num = sum(1 for k in set(keywords) if counts.get(k, 0) > 0)
    gate = _sigmoid(float(passage.word_count - cfg.l_c))
    s_match = cfg.lambda1 * s_freq * gate + cfg.lambda2 * s_num
    return MatchScore(s_freq=s_freq, s_num=s_num, s_match=s_match)


def rerank_score(s_match: float, s_conf: float, alpha: float = 0.5) -> float:
    return s_match + alpha * s_conf


def rerank(scored_passages, question: str,
           cfg: RerankConfig = RerankConfig(), tagger=default_tagger) -> list[ScoredPassage]:
    """Order (passage, confidence) pairs by composite score.

    Returns ScoredPassage rows sorted by rerank_score descending, ties
    broken by ascending passage ref.
    """
    keywords = extract_keywords(question, tagger)
    rows: list[ScoredPassage] = []
    for passage, s_conf in scored_passages:
        ms = match_score(keywords, passage, cfg)
        rows.append(
            ScoredPassage(
                passage_ref=passage.ref,
                s_freq=ms.s_freq,
                s_num=ms.s_num,
                s_match=ms.s_match,
                s_conf=float(s_conf),
                rerank_score=rerank_score(ms.s_match, float(s_conf), cfg.alpha),
            )
        )
    rows.sort(key=lambda r: (-r.rerank_score, r.passage_ref))
    return rows
