"""Closed-book answering by two-stage prompting with vote marginalization.

Stage one samples k context paragraphs from a language model prompted
with the question and its nearest support examples; stage two predicts
one short answer per sampled context with greedy decoding; the final
answer is the majority vote over normalized answer strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ProviderError
from .metrics import normalize_answer

__all__ = [
    "SupportExample",
    "SupportRepository",
    "PromptSpec",
    "MarginalizationResult",
    "ContextGenerationError",
    "select_samples",
    "build_context_prompt",
    "build_answer_prompt",
    "generate_contexts",
    "predict_answer",
    "majority_vote",
    "run_cgap",
    "DEFAULT_K",
    "DEFAULT_M",
    "DEFAULT_TOP_P",
]

DEFAULT_K = 8
DEFAULT_M = 10
DEFAULT_TOP_P = 0.9

_CONTEXT_STOP = "\nQ:"


@dataclass(frozen=True)
class SupportExample:
    context: str
    question: str
    answer: str


@dataclass
class SupportRepository:
    """(context, question, answer) tuples with embeddings of 'question context'."""

    examples: tuple[SupportExample, ...]
    embeddings: np.ndarray  # shape (len(examples), dim)

    def __len__(self) -> int:
        return len(self.examples)

    @classmethod
    def build(cls, examples, embedder) -> "SupportRepository":
        examples = tuple(examples)
        if not examples:
            raise ValueError("support repository must be non-empty")
        texts = [f"{ex.question} {ex.context}" for ex in examples]
        vectors = embedder.embed(texts)
        return cls(examples=examples, embeddings=np.asarray(vectors, dtype=np.float64))

    @classmethod
    def from_jsonl(cls, path, embedder) -> "SupportRepository":
        examples = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                for key in ("context", "question", "answer"):
                    if key not in obj or not isinstance(obj[key], str):
                        raise ValueError(
                            f"line {line_no}: support example needs string {key!r}"
                        )
                examples.append(SupportExample(
                    context=obj["context"], question=obj["question"], answer=obj["answer"],
                ))
        return cls.build(examples, embedder)


@dataclass(frozen=True)
class PromptSpec:
    m: int = DEFAULT_M
    ordering: str = "reversed_similarity"
    separator: str = "\n"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.ordering != "reversed_similarity":
            raise ValueError("only reversed_similarity ordering is supported")


class ContextGenerationError(ProviderError):
    """Context sampling failed; carries the contexts produced so far."""

    def __init__(self, message: str, partial: list[str]):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class MarginalizationResult:
    contexts: tuple[str, ...]
    raw_answers: tuple[str, ...]
    tallies: dict[str, int]  # normalized answer -> count
    final: str

    def sorted_tally(self) -> list[tuple[str, int]]:
        """Tally pairs, count descending, first-appearance order on ties."""
        first_seen = {}
        for i, ans in enumerate(self.raw_answers):
            key = normalize_answer(ans)
            if key not in first_seen:
                first_seen[key] = i
        return sorted(
            self.tallies.items(), key=lambda kv: (-kv[1], first_seen.get(kv[0], 0))
        )


def select_samples(repo: SupportRepository, question_embedding, m: int) -> list[int]:
    """Indices of the m most similar examples by embedding dot product.

    Ordered most similar first; ties break on ascending index.  m may
    not exceed the repository size.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m > len(repo):
        raise ValueError(f"m={m} exceeds repository size {len(repo)}")
    q = np.asarray(question_embedding, dtype=np.float64)
    scores = repo.embeddings @ q
    order = sorted(range(len(repo)), key=lambda i: (-float(scores[i]), i))
    return order[:m]


def build_context_prompt(samples, question: str) -> str:
    """Few-shot context-generation prompt.

    ``samples`` lists (question, context) pairs ordered most similar
    first; they are emitted in reversed order so the most similar pair
    sits closest to the final line 'Q: {question}\\n'.
    """
    parts = [f"Q: {q}\nA: {c}\n" for q, c in reversed(list(samples))]
    parts.append(f"Q: {question}\n")
    return "".join(parts)


def build_answer_prompt(samples, generated_context: str, question: str) -> str:
    """Few-shot answer-prediction prompt.

    ``samples`` lists (question, context, answer) triples ordered most
    similar first, emitted reversed; the sampled context and the
    question form the final unanswered block.
    """
    parts = [f"C: {c}\nQ: {q}\nA: {a}\n" for q, c, a in reversed(list(samples))]
    parts.append(f"C: {generated_context}\nQ: {question}\n")
    return "".join(parts)


def generate_contexts(provider, prompt: str, k: int, *, top_p: float = DEFAULT_TOP_P,
                      seed: int = 0, max_tokens: int = 256) -> list[str]:
    """Sample k contexts with nucleus sampling (distinct seeds per draw).

    Uses the provider's batch completion when it offers one, otherwise k
    single calls.  Output is truncated at the '\\nQ:' stop marker and
    stripped.  On provider failure the raised error carries the partial
    list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    kwargs = dict(max_tokens=max_tokens, temperature=1.0, top_p=top_p, stop=[_CONTEXT_STOP])

    def _clean(text: str) -> str:
        pos = text.find(_CONTEXT_STOP)
        if pos >= 0:
            text = text[:pos]
        return text.strip()

    batch = getattr(provider, "complete_many", None)
    if batch is not None:
        try:
            outputs = batch(prompt, k, seed=seed, **kwargs)
        except ProviderError as exc:
            raise ContextGenerationError(str(exc), partial=[]) from exc
        if len(outputs) != k:
            raise ContextGenerationError(
                f"batch completion returned {len(outputs)} texts, want {k}", partial=[]
            )
        return [_clean(t) for t in outputs]

    contexts: list[str] = []
    for i in range(k):
        try:
            text = provider.complete(prompt, seed=seed + i, **kwargs)
        except ProviderError as exc:
            raise ContextGenerationError(str(exc), partial=contexts) from exc
        contexts.append(_clean(text))
    return contexts


def predict_answer(provider, prompt: str, *, seed: int = 0, max_tokens: int = 64) -> str:
    """Greedy answer prediction, cut at the first newline and trimmed."""
    text = provider.complete(
        prompt, max_tokens=max_tokens, temperature=0.0, top_p=1.0, stop=["\n"], seed=seed,
    )
    return text.split("\n", 1)[0].strip()


def majority_vote(answers, contexts=()) -> MarginalizationResult:
    """Tally normalized answers; the final answer is the earliest-generated
    surface form whose tally is maximal."""
    answers = list(answers)
    if not answers:
        raise ValueError("majority_vote needs at least one answer")
    tallies: dict[str, int] = {}
    for ans in answers:
        key = normalize_answer(ans)
        tallies[key] = tallies.get(key, 0) + 1
    best = max(tallies.values())
    final = next(a for a in answers if tallies[normalize_answer(a)] == best)
    return MarginalizationResult(
        contexts=tuple(contexts),
        raw_answers=tuple(answers),
        tallies=tallies,
        final=final,
    )


def run_cgap(question: str, repo: SupportRepository, lm, embedder, *,
             k: int = DEFAULT_K, m: int = DEFAULT_M, top_p: float = DEFAULT_TOP_P,
             seed: int = 0) -> MarginalizationResult:
    """Full two-stage run: sample selection, k contexts, k answers, vote.

    The same selected samples serve both prompt builders.  LM cost is k
    single-shot calls (or one batch) for contexts plus k answer calls.
    """
    if len(repo) == 0:
        raise ValueError("support repository must be non-empty")
    q_emb = embedder.embed([question])[0]
    idxs = select_samples(repo, q_emb, m)
    qc = [(repo.examples[i].question, repo.examples[i].context) for i in idxs]
    qca = [
        (repo.examples[i].question, repo.examples[i].context, repo.examples[i].answer)
        for i in idxs
    ]
    ctx_prompt = build_context_prompt(qc, question)
    contexts = generate_contexts(lm, ctx_prompt, k, top_p=top_p, seed=seed)
    answers = [
        predict_answer(lm, build_answer_prompt(qca, ctx, question), seed=seed + 1000 + i)
        for i, ctx in enumerate(contexts)
    ]
    return majority_vote(answers, contexts)
