"""Shared test doubles and fixture builders."""

from __future__ import annotations

import random

import numpy as np

from lfqa.corpus import Document, split_passages


def make_passage(text, doc_id="d", max_words=10_000):
    """Build a single passage from text (must fit in one passage)."""
    passages = split_passages(Document(id=doc_id, title=doc_id, text=text), max_words)
    assert len(passages) == 1, f"text produced {len(passages)} passages, want 1"
    return passages[0]


def make_passages(texts, max_words=10_000):
    """One single-passage document per text, ids p0, p1, ..."""
    out = []
    for i, text in enumerate(texts):
        out.append(make_passage(text, doc_id=f"p{i}", max_words=max_words))
    return out


class ScriptedLM:
    """Pops queued completions FIFO; queue items that are exceptions raise.

    Exposes no batch method, so callers take the one-call-per-completion
    path.  Every call is recorded with its full keyword set.
    """

    def __init__(self, outputs):
        self.queue = list(outputs)
        self.calls: list[dict] = []

    def complete(self, prompt, *, max_tokens=0, temperature=0.0, top_p=1.0,
                 stop=(), seed=0):
        self.calls.append({
            "prompt": prompt,
            "max_tokens": max_tokens,
            "temperature": temperature,
            "top_p": top_p,
            "stop": list(stop),
            "seed": seed,
        })
        if not self.queue:
            raise AssertionError("ScriptedLM queue exhausted")
        item = self.queue.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


class BatchScriptedLM(ScriptedLM):
    """ScriptedLM plus a batch-completion entry point.

    ``calls`` then counts wire invocations: one complete_many call is a
    single entry no matter how many texts it returns.
    """

    def complete_many(self, prompt, n, *, max_tokens=0, temperature=0.0,
                      top_p=1.0, stop=(), seed=0):
        self.calls.append({
            "prompt": prompt,
            "n": n,
            "max_tokens": max_tokens,
            "temperature": temperature,
            "top_p": top_p,
            "stop": list(stop),
            "seed": seed,
        })
        out = []
        for _ in range(n):
            if not self.queue:
                raise AssertionError("BatchScriptedLM queue exhausted")
            item = self.queue.pop(0)
            if isinstance(item, Exception):
                raise item
            out.append(item)
        return out


class FixedLM:
    """Always returns the same text; counts calls."""

    def __init__(self, text):
        self.text = text
        self.calls = 0

    def complete(self, prompt, *, max_tokens=0, temperature=0.0, top_p=1.0,
                 stop=(), seed=0):
        self.calls += 1
        return self.text


class StochasticLM:
    """Two-stage mock: deterministic contexts, seed-keyed noisy answers.

    Context-stage prompts start with "Q:" and echo a context tagged by
    the call seed.  Answer-stage prompts start with "C:" and return
    ``correct`` with probability p (keyed on the call seed alone), else
    ``wrong``.  Fully deterministic given the seeds it is called with.
    """

    def __init__(self, correct="paris", wrong="london", p=0.6):
        self.correct = correct
        self.wrong = wrong
        self.p = p

    def complete(self, prompt, *, max_tokens=0, temperature=0.0, top_p=1.0,
                 stop=(), seed=0):
        if prompt.startswith("C:"):
            rng = random.Random(seed)
            return self.correct if rng.random() < self.p else self.wrong
        return f"generated context {seed}"


class StaticEmbedder:
    """Maps exact texts to fixed vectors (zero vector for unknown text)."""

    def __init__(self, table, dim):
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}
        self.dim = dim

    def embed(self, texts):
        return [self.table.get(t, np.zeros(self.dim)) for t in texts]
