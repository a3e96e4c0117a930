"""Index artifact serialization.

The artifact is a single binary file: an 8-byte magic, a little-endian
u32 format version, a u32 payload length, and a zlib-compressed
canonical JSON payload holding document metadata, the passage table and
the inverted index postings.  A JSON metadata sidecar (<path>.meta.json)
carries human-readable stats.  Writing is deterministic: identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
import zlib

from .corpus import Passage, count_words, split_sentences, tokenize
from .retrieval import InvertedIndex

__all__ = ["MAGIC", "FORMAT_VERSION", "save_index", "load_index", "StoreError"]

MAGIC = b"LFQAIDX\x00"
FORMAT_VERSION = 1


class StoreError(Exception):
    """The index artifact is missing, corrupt, or from an unknown version."""


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


def save_index(path, documents, passages, index: InvertedIndex, max_words: int) -> None:
    """Write the artifact and its .meta.json sidecar.

    ``documents`` maps doc id -> title; ``passages`` maps ref -> Passage.
    """
    payload = {
        "version": FORMAT_VERSION,
        "max_words": max_words,
        "documents": [
            {"id": doc_id, "title": title} for doc_id, title in sorted(documents.items())
        ],
        "passages": [
            {
                "doc_id": p.doc_id,
                "passage_index": p.passage_index,
                "text": p.text,
                "oversized": p.oversized,
            }
            for _, p in sorted(passages.items())
        ],
        "postings": {
            term: [[ref, tf] for ref, tf in plist]
            for term, plist in sorted(index.postings.items())
        },
    }
    blob = zlib.compress(_canonical_json(payload), 9)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)

    meta = {
        "format_version": FORMAT_VERSION,
        "documents": len(documents),
        "passages": len(passages),
        "terms": len(index.postings),
        "max_words": max_words,
        "oversized_passages": sum(1 for p in passages.values() if p.oversized),
    }
    with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _rebuild_passage(row: dict) -> Passage:
    # Tokenization and sentence splitting are pure functions of the
    # text, so only the text is stored and the rest is reconstructed.
    text = row["text"]
    tokens = tokenize(text)
    sentences = split_sentences(text, tokens)
    return Passage(
        doc_id=row["doc_id"],
        passage_index=row["passage_index"],
        text=text,
        tokens=tuple(tokens),
        sentences=tuple(sentences),
        word_count=count_words(tokens),
        oversized=bool(row.get("oversized", False)),
    )


def load_index(path):
    """Read an artifact; returns (documents, passages, index, max_words)."""
    try:
        with open(path, "rb") as fh:
            header = fh.read(len(MAGIC) + 8)
            if len(header) < len(MAGIC) + 8 or header[: len(MAGIC)] != MAGIC:
                raise StoreError(f"{path} is not an index artifact")
            version, length = struct.unpack("<II", header[len(MAGIC):])
            if version != FORMAT_VERSION:
                raise StoreError(
                    f"{path} uses format version {version}; this build reads {FORMAT_VERSION}"
                )
            blob = fh.read(length)
    except OSError as exc:
        raise StoreError(f"cannot read index artifact {path}: {exc}") from exc
    if len(blob) != length:
        raise StoreError(f"{path} is truncated")
    try:
        payload = json.loads(zlib.decompress(blob))
    except (zlib.error, json.JSONDecodeError) as exc:
        raise StoreError(f"{path} payload is corrupt: {exc}") from exc

    documents = {row["id"]: row["title"] for row in payload["documents"]}
    passages: dict[str, Passage] = {}
    for row in payload["passages"]:
        p = _rebuild_passage(row)
        passages[p.ref] = p

    postings = {
        term: [(ref, int(tf)) for ref, tf in plist]
        for term, plist in payload["postings"].items()
    }
    lengths = {ref: p.word_count for ref, p in passages.items()}
    n = len(passages)
    if n == 0:
        raise StoreError(f"{path} holds no passages")
    index = InvertedIndex(
        postings=postings,
        lengths=lengths,
        n_passages=n,
        avg_length=sum(lengths.values()) / n,
    )
    return documents, passages, index, int(payload["max_words"])
