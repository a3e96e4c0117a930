"""Shared fixtures: hypothesis profile, tiny corpora, engines."""

from __future__ import annotations

import json

import pytest
from hypothesis import HealthCheck, settings

from lfqa.config import load_config
from lfqa.pipeline import Engine

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


# Small themed corpus: doc "lopez" holds the birthplace answer, the
# other docs supply distractor vocabulary.
CORPUS_DOCS = [
    {
        "id": "lopez",
        "title": "George Lopez",
        "text": (
            "George Lopez was born in Mission Hills, Los Angeles. "
            "He was raised by his grandmother in the San Fernando Valley. "
            "Lopez began performing stand-up comedy in clubs."
        ),
    },
    {
        "id": "climate",
        "title": "Climate",
        "text": (
            "Rising temperatures change rainfall patterns across continents. "
            "Droughts strain rivers and reservoirs in warm regions."
        ),
    },
    {
        "id": "bees",
        "title": "Bees",
        "text": (
            "Honey bees pollinate orchards in early spring. "
            "A colony forages within several kilometers of the hive."
        ),
    },
]


def write_corpus(path, docs=CORPUS_DOCS):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")
    return path


@pytest.fixture()
def corpus_path(tmp_path):
    return write_corpus(tmp_path / "corpus.jsonl")


@pytest.fixture()
def engine(corpus_path):
    cfg = load_config(None, env={})
    return Engine.from_corpus(corpus_path, cfg, warn=lambda m: None)
