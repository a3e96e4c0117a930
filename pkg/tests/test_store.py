"""Index artifact round-trips, deterministic bytes, and corruption handling."""

import json
import struct
import zlib

import pytest

from helpers import make_passages
from lfqa.retrieval import bm25_search, build_index
from lfqa.store import FORMAT_VERSION, MAGIC, StoreError, load_index, save_index


TEXTS = [
    "Bees pollinate flowering plants. They live in colonies.",
    "Climate change shifts rainfall patterns across regions.",
    "Queen bees lay thousands of eggs in spring.",
]


def build_fixture():
    passages = make_passages(TEXTS)
    documents = {p.doc_id: f"title {p.doc_id}" for p in passages}
    index = build_index(passages)
    return documents, {p.ref: p for p in passages}, index


def test_round_trip_preserves_everything(tmp_path):
    documents, passages, index = build_fixture()
    path = tmp_path / "corpus.idx"
    save_index(path, documents, passages, index, max_words=120)

    docs2, passages2, index2, max_words = load_index(path)
    assert docs2 == documents
    assert max_words == 120
    assert set(passages2) == set(passages)
    for ref, p in passages.items():
        q = passages2[ref]
        assert q.text == p.text
        assert q.doc_id == p.doc_id
        assert q.passage_index == p.passage_index
        assert q.tokens == p.tokens
        assert q.sentences == p.sentences
        assert q.word_count == p.word_count
        assert q.oversized == p.oversized
    assert index2.postings == index.postings
    assert index2.lengths == index.lengths
    assert index2.n_passages == index.n_passages
    assert index2.avg_length == pytest.approx(index.avg_length)


def test_search_results_survive_round_trip(tmp_path):
    documents, passages, index = build_fixture()
    path = tmp_path / "corpus.idx"
    save_index(path, documents, passages, index, max_words=120)
    _, _, index2, _ = load_index(path)
    assert bm25_search(index2, "where do bees live", n=5) == bm25_search(
        index, "where do bees live", n=5
    )


def test_saves_are_byte_identical(tmp_path):
    documents, passages, index = build_fixture()
    p1 = tmp_path / "a.idx"
    p2 = tmp_path / "b.idx"
    save_index(p1, documents, passages, index, max_words=120)
    save_index(p2, documents, passages, index, max_words=120)
    assert p1.read_bytes() == p2.read_bytes()
    assert (tmp_path / "a.idx.meta.json").read_text() == (
        tmp_path / "b.idx.meta.json"
    ).read_text()


def test_insertion_order_does_not_change_bytes(tmp_path):
    documents, passages, index = build_fixture()
    reversed_docs = dict(reversed(list(documents.items())))
    reversed_passages = dict(reversed(list(passages.items())))
    p1 = tmp_path / "a.idx"
    p2 = tmp_path / "b.idx"
    save_index(p1, documents, passages, index, max_words=120)
    save_index(p2, reversed_docs, reversed_passages, index, max_words=120)
    assert p1.read_bytes() == p2.read_bytes()


def test_sidecar_reports_stats(tmp_path):
    documents, passages, index = build_fixture()
    path = tmp_path / "corpus.idx"
    save_index(path, documents, passages, index, max_words=120)
    meta = json.loads((tmp_path / "corpus.idx.meta.json").read_text())
    assert meta["documents"] == 3
    assert meta["passages"] == 3
    assert meta["terms"] == len(index.postings)
    assert meta["max_words"] == 120
    assert meta["oversized_passages"] == 0
    assert meta["format_version"] == FORMAT_VERSION


def test_oversized_flag_counted_and_restored(tmp_path):
    long_text = " ".join(f"Word{i}" for i in range(40)) + "."
    passages = make_passages([long_text], max_words=10)
    assert passages[0].oversized
    documents = {passages[0].doc_id: "t"}
    path = tmp_path / "corpus.idx"
    save_index(path, documents, {p.ref: p for p in passages},
               build_index(passages), max_words=10)
    _, passages2, _, _ = load_index(path)
    assert passages2[passages[0].ref].oversized
    meta = json.loads((tmp_path / "corpus.idx.meta.json").read_text())
    assert meta["oversized_passages"] == 1


def test_missing_file_rejected(tmp_path):
    with pytest.raises(StoreError):
        load_index(tmp_path / "absent.idx")


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.idx"
    path.write_bytes(b"NOTMYIDX" + b"\x00" * 16)
    with pytest.raises(StoreError) as err:
        load_index(path)
    assert "not an index artifact" in str(err.value)


def test_short_file_rejected(tmp_path):
    path = tmp_path / "tiny.idx"
    path.write_bytes(MAGIC[:4])
    with pytest.raises(StoreError):
        load_index(path)


def test_unknown_version_rejected(tmp_path):
    documents, passages, index = build_fixture()
    path = tmp_path / "corpus.idx"
    save_index(path, documents, passages, index, max_words=120)
    raw = bytearray(path.read_bytes())
    struct.pack_into("<I", raw, len(MAGIC), FORMAT_VERSION + 7)
    path.write_bytes(bytes(raw))
    with pytest.raises(StoreError) as err:
        load_index(path)
    assert str(FORMAT_VERSION + 7) in str(err.value)


def test_truncated_payload_rejected(tmp_path):
    documents, passages, index = build_fixture()
    path = tmp_path / "corpus.idx"
    save_index(path, documents, passages, index, max_words=120)
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(StoreError) as err:
        load_index(path)
    assert "truncated" in str(err.value)


def test_corrupt_compressed_payload_rejected(tmp_path):
    documents, passages, index = build_fixture()
    path = tmp_path / "corpus.idx"
    save_index(path, documents, passages, index, max_words=120)
    raw = bytearray(path.read_bytes())
    raw[-3] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(StoreError) as err:
        load_index(path)
    assert "corrupt" in str(err.value)


def test_valid_zlib_invalid_json_rejected(tmp_path):
    path = tmp_path / "badjson.idx"
    blob = zlib.compress(b"this is not json", 9)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
    with pytest.raises(StoreError):
        load_index(path)


def test_zero_passage_artifact_rejected(tmp_path):
    path = tmp_path / "empty.idx"
    payload = {
        "version": FORMAT_VERSION,
        "max_words": 100,
        "documents": [],
        "passages": [],
        "postings": {},
    }
    blob = zlib.compress(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode(), 9
    )
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
    with pytest.raises(StoreError) as err:
        load_index(path)
    assert "no passages" in str(err.value)
