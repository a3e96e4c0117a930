"""Engine integration: full query runs over a small in-memory corpus."""

import dataclasses
import json

import pytest

from conftest import write_corpus
from helpers import FixedLM, ScriptedLM
from lfqa.config import load_config
from lfqa.corpus import count_words, tokenize
from lfqa.errors import ConfigError
from lfqa.pipeline import Engine, QueryResponse
from lfqa.providers import HeuristicMRC
from lfqa.store import save_index


QUESTION = "where was george lopez born"


def test_extractive_run_shape(engine):
    resp = engine.answer_question(QUESTION, mode="extractive", seed=0)
    assert resp.mode == "extractive"
    assert resp.no_results is False
    assert resp.passages, "expected retrieval hits"
    assert resp.answer["error"] is None
    assert "Mission Hills" in resp.answer["text"]
    assert resp.answer["word_count"] == count_words(tokenize(resp.answer["text"]))


def test_passages_sorted_and_scores_recompose(engine):
    resp = engine.answer_question(QUESTION, seed=0)
    scores = [row["scores"]["rerank_score"] for row in resp.passages]
    assert scores == sorted(scores, reverse=True)
    alpha = engine.cfg.rerank.alpha
    for row in resp.passages:
        s = row["scores"]
        assert s["rerank_score"] == s["s_match"] + alpha * s["s_conf"]
        assert row["title"] == engine.documents[row["doc_id"]]


def test_highlights_are_valid_slices(engine):
    resp = engine.answer_question(QUESTION, seed=0)
    for row in resp.passages:
        text = row["text"]
        assert row["highlights"], "every scored passage carries a span"
        for h in row["highlights"]:
            assert 0 <= h["start"] < h["end"] <= len(text)
            assert text[h["start"]:h["end"]].strip()


def test_best_passage_is_the_lopez_one(engine):
    resp = engine.answer_question(QUESTION, seed=0)
    assert resp.passages[0]["doc_id"] == "lopez"


def test_empty_question_rejected(engine):
    with pytest.raises(ValueError):
        engine.answer_question("")
    with pytest.raises(ValueError):
        engine.answer_question("   ")


def test_unknown_mode_rejected(engine):
    with pytest.raises(ValueError):
        engine.answer_question(QUESTION, mode="chatty")


def test_out_of_vocabulary_question_yields_no_results(engine):
    resp = engine.answer_question("zzyqx vvwwk", mode="extractive")
    assert resp.no_results is True
    assert resp.passages == []
    assert resp.answer == {"text": "", "segments": [], "word_count": 0, "error": None}


def test_to_dict_shape_and_timings_excluded(engine):
    resp = engine.answer_question(QUESTION, seed=3)
    assert resp.timings_ms and set(resp.timings_ms) >= {
        "retrieve", "read", "rerank", "generate",
    }
    body = resp.to_dict()
    assert set(body) == {
        "question", "mode", "seed", "no_results", "passages", "answer",
    }
    assert body["seed"] == 3
    json.dumps(body)


def test_to_dict_includes_cgap_block_only_in_cgap_mode(engine):
    extractive = engine.answer_question(QUESTION, mode="extractive").to_dict()
    assert "cgap" not in extractive
    cgap_resp = engine.answer_question(QUESTION, mode="cgap").to_dict()
    assert set(cgap_resp["cgap"]) == {"contexts", "raw_answers", "tally", "final"}


def test_same_seed_same_json(engine):
    a = json.dumps(engine.answer_question(QUESTION, seed=5).to_dict(), sort_keys=True)
    b = json.dumps(engine.answer_question(QUESTION, seed=5).to_dict(), sort_keys=True)
    assert a == b


def test_cgap_mode_delegates_to_vote(engine):
    contexts = ["ctx a", "ctx b", "ctx c"]
    answers = ["Mission Hills", "Castle Hill", "Mission Hills"]
    engine.cfg = dataclasses.replace(
        engine.cfg, cgap=dataclasses.replace(engine.cfg.cgap, k=3)
    )
    engine.lm = ScriptedLM(contexts + answers)
    resp = engine.answer_question(QUESTION, mode="cgap", seed=0)
    assert resp.cgap["final"] == "Mission Hills"
    assert resp.cgap["contexts"] == contexts
    assert resp.cgap["raw_answers"] == answers
    assert resp.cgap["tally"][0] == ["mission hills", 2]
    assert resp.answer["text"] == "Mission Hills"
    assert resp.answer["segments"] == [["cgap", "Mission Hills"]]


def test_cgap_answer_k_parameter_overrides_config(engine):
    engine.lm = ScriptedLM(["c1", "c2", "a1", "a2"])
    result = engine.cgap_answer(QUESTION, seed=0, k=2)
    assert len(result.contexts) == 2
    assert len(result.raw_answers) == 2


def test_cgap_builtin_lm_warns(corpus_path):
    messages = []
    cfg = load_config(None, env={})
    eng = Engine.from_corpus(corpus_path, cfg, warn=messages.append)
    eng.answer_question(QUESTION, mode="cgap", seed=0)
    assert any("built-in deterministic mock" in m for m in messages)


def test_cgap_mode_works_without_hits(engine):
    resp = engine.answer_question("zzyqx vvwwk", mode="cgap", seed=0)
    assert resp.no_results is True
    assert resp.passages == []
    assert resp.cgap is not None
    assert resp.answer["text"] == resp.cgap["final"]


def test_cgap_uses_support_repository_when_configured(tmp_path, corpus_path):
    repo_path = tmp_path / "support.jsonl"
    rows = [
        {"context": "Lopez was born in Mission Hills.",
         "question": "where was lopez born", "answer": "Mission Hills"},
    ]
    repo_path.write_text(
        "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
    )
    cfg = load_config(None, env={})
    cfg = dataclasses.replace(
        cfg, cgap=dataclasses.replace(cfg.cgap, repo_path=str(repo_path))
    )
    eng = Engine.from_corpus(corpus_path, cfg, warn=lambda m: None)
    eng.lm = ScriptedLM(["ctx", "ans"])
    eng.cgap_answer(QUESTION, seed=0, k=1)
    ctx_prompt = eng.lm.calls[0]["prompt"]
    assert "where was lopez born" in ctx_prompt
    ans_prompt = eng.lm.calls[1]["prompt"]
    assert "Mission Hills" in ans_prompt


def test_abstractive_mode_produces_segments(engine):
    resp = engine.answer_question(QUESTION, mode="abstractive", seed=0)
    assert resp.answer["error"] is None
    segs = resp.answer["segments"]
    assert 1 <= len(segs) <= engine.cfg.generation.k_passages
    refs = {row["ref"] for row in resp.passages}
    for ref, text in segs:
        assert ref in refs
        assert text


def test_abstractive_segment_budget(corpus_path):
    # Dense retrieval scores every passage, so three prompts reach the LM.
    cfg = load_config(None, env={})
    cfg = dataclasses.replace(
        cfg, retrieval=dataclasses.replace(cfg.retrieval, mode="dense")
    )
    eng = Engine.from_corpus(corpus_path, cfg, warn=lambda m: None)
    eng.lm = FixedLM(" ".join(f"w{i}" for i in range(100)))
    resp = eng.answer_question(QUESTION, mode="abstractive", seed=0)
    assert eng.lm.calls == 3
    assert len(resp.answer["segments"]) == 3
    assert resp.answer["word_count"] == 300


def test_ensemble_second_reader(engine):
    engine.mrc2 = HeuristicMRC()
    resp = engine.answer_question(QUESTION, mode="extractive", seed=0)
    assert resp.passages
    single = Engine(
        engine.documents, engine.passages, engine.index, engine.cfg,
        warn=lambda m: None,
    )
    base = single.answer_question(QUESTION, mode="extractive", seed=0)
    for two, one in zip(resp.passages, base.passages):
        # Two agreeing readers double the raw confidence.
        assert two["scores"]["s_conf"] == pytest.approx(2 * one["scores"]["s_conf"])


def test_mode_defaults_to_config(corpus_path):
    cfg = load_config(None, env={})
    cfg = dataclasses.replace(
        cfg, generation=dataclasses.replace(cfg.generation, mode="cgap")
    )
    eng = Engine.from_corpus(corpus_path, cfg, warn=lambda m: None)
    resp = eng.answer_question(QUESTION, seed=0)
    assert resp.mode == "cgap"
    assert resp.cgap is not None


def test_dense_mode_runs(corpus_path):
    cfg = load_config(None, env={})
    cfg = dataclasses.replace(
        cfg, retrieval=dataclasses.replace(cfg.retrieval, mode="dense")
    )
    eng = Engine.from_corpus(corpus_path, cfg, warn=lambda m: None)
    hits = eng.retrieve(QUESTION)
    assert [h.method for h in hits] == ["dense"] * len(hits)
    resp = eng.answer_question(QUESTION, seed=0)
    assert resp.passages
    assert resp.answer["text"]


def test_tfidf_scheme_runs(corpus_path):
    cfg = load_config(None, env={})
    cfg = dataclasses.replace(
        cfg, retrieval=dataclasses.replace(cfg.retrieval, sparse_scheme="tfidf")
    )
    eng = Engine.from_corpus(corpus_path, cfg, warn=lambda m: None)
    hits = eng.retrieve(QUESTION)
    assert hits
    assert all(h.method == "sparse" for h in hits)
    default = Engine.from_corpus(corpus_path, load_config(None, env={}),
                                 warn=lambda m: None)
    bm25_hits = default.retrieve(QUESTION)
    assert [h.ref for h in hits] and [h.score for h in hits] != [
        h.score for h in bm25_hits
    ]


def test_retrieve_n_caps_hits(engine):
    assert len(engine.retrieve(QUESTION, n=1)) == 1


def test_answer_question_passes_n_through(engine):
    resp = engine.answer_question(QUESTION, seed=0, n=1)
    assert len(resp.passages) == 1


def test_from_artifact_matches_from_corpus(tmp_path, engine):
    path = tmp_path / "corpus.idx"
    save_index(path, engine.documents, engine.passages, engine.index,
               engine.cfg.max_words)
    loaded = Engine.from_artifact(path, engine.cfg, warn=lambda m: None)
    a = json.dumps(engine.answer_question(QUESTION, seed=1).to_dict(), sort_keys=True)
    b = json.dumps(loaded.answer_question(QUESTION, seed=1).to_dict(), sort_keys=True)
    assert a == b


def test_from_corpus_empty_rejected(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ConfigError):
        Engine.from_corpus(empty, load_config(None, env={}))


def test_query_response_defaults():
    resp = QueryResponse(
        question="q", mode="extractive", seed=0, passages=[],
        answer={"text": "", "segments": [], "word_count": 0, "error": None},
    )
    assert resp.cgap is None
    assert resp.no_results is False
    assert resp.timings_ms == {}
