"""Corpus ingestion, tokenization, sentence splitting and passage packing.

Documents arrive as JSONL and are segmented into passages of at most
``max_words`` words, packed greedily sentence by sentence so that no
sentence is ever cut in half.  Only non-punctuation tokens count as
words; punctuation tokens are kept in the token stream but contribute
nothing to word budgets.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

__all__ = [
    "CorpusError",
    "ParseError",
    "DuplicateIdError",
    "Token",
    "SentenceSpan",
    "Document",
    "Passage",
    "tokenize",
    "split_sentences",
    "split_passages",
    "ingest_jsonl",
    "count_words",
]


class CorpusError(Exception):
    """Base class for corpus-layer failures."""


class ParseError(CorpusError):
    """A JSONL line could not be parsed or failed schema validation."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateIdError(CorpusError):
    """Two documents in one corpus share an id."""

    def __init__(self, doc_id: str, line_no: int):
        self.doc_id = doc_id
        self.line_no = line_no
        super().__init__(f"line {line_no}: duplicate document id {doc_id!r}")


# A token is either a maximal run of word characters or a single
# non-space, non-word character (so "COVID-19" -> "COVID", "-", "19").
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_WORD_CHAR_RE = re.compile(r"\w")

_TERMINALS = frozenset({".", "!", "?"})

# Lowercased abbreviations whose trailing period never ends a sentence.
ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "rev", "hon", "st", "sr", "jr",
    "vs", "etc", "fig", "eq", "no", "vol", "dept", "univ", "inc", "ltd",
    "co", "corp", "mt", "capt", "col", "gen", "lt", "sgt", "approx",
    "al", "ed", "pp",
})


@dataclass(frozen=True)
class Token:
    """One surface token with its lowercase shadow and exact offsets."""

    text: str
    lower: str
    char_start: int
    char_end: int

    @property
    def is_word(self) -> bool:
        return _WORD_CHAR_RE.search(self.text) is not None


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open [token_start, token_end) range over a token sequence."""

    token_start: int
    token_end: int


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.text:
            raise ValueError(f"document {self.id!r} has empty text")


@dataclass(frozen=True)
class Passage:
    """A contiguous run of whole sentences from one document.

    ``tokens`` and ``sentences`` are re-based so offsets index into
    ``text`` directly.  ``oversized`` marks a single sentence that alone
    exceeded the word budget and therefore stands as its own passage.
    """

    doc_id: str
    passage_index: int
    text: str
    tokens: tuple[Token, ...]
    sentences: tuple[SentenceSpan, ...]
    word_count: int
    oversized: bool = False

    @property
    def ref(self) -> str:
        # Zero-padded so lexicographic ref order matches numeric order
        # within a document; used as the deterministic tie-break key.
        return f"{self.doc_id}#{self.passage_index:04d}"


def tokenize(text: str) -> list[Token]:
    """Split text on whitespace and punctuation boundaries.

    Punctuation characters become single-character tokens.  Offsets
    satisfy text[char_start:char_end] == token.text exactly.
    """
    return [
        Token(m.group(), m.group().lower(), m.start(), m.end())
        for m in _TOKEN_RE.finditer(text)
    ]


def count_words(tokens) -> int:
    """Number of non-punctuation tokens."""
    return sum(1 for t in tokens if t.is_word)


def split_sentences(text: str, tokens: list[Token] | None = None) -> list[SentenceSpan]:
    """Sentence boundaries over the token sequence.

    A sentence ends at a run of terminal punctuation (. ! ?) followed by
    whitespace and an uppercase-initial token, or at end of text.  A
    period directly after a known abbreviation or a single-letter
    initial does not split.
    """
    if tokens is None:
        tokens = tokenize(text)
    if not tokens:
        return []

    spans: list[SentenceSpan] = []
    start = 0
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.text in _TERMINALS:
            j = i
            while j + 1 < n and tokens[j + 1].text in _TERMINALS:
                j += 1
            prev = tokens[i - 1] if i > start else None
            abbrev = (
                tok.text == "."
                and prev is not None
                and prev.is_word
                and (prev.lower in ABBREVIATIONS or len(prev.text) == 1)
            )
            nxt = tokens[j + 1] if j + 1 < n else None
            if nxt is not None and not abbrev:
                gap = text[tokens[j].char_end : nxt.char_start]
                if gap and gap.isspace() and nxt.text[0].isupper():
                    spans.append(SentenceSpan(start, j + 1))
                    start = j + 1
            i = j + 1
        else:
            i += 1
    if start < n:
        spans.append(SentenceSpan(start, n))
    return spans


def _build_passage(doc: Document, index: int, tokens: list[Token],
                   group: list[SentenceSpan], max_words: int) -> Passage:
    t_start = group[0].token_start
    t_end = group[-1].token_end
    base = tokens[t_start].char_start
    char_end = tokens[t_end - 1].char_end
    text = doc.text[base:char_end]
    shifted_tokens = tuple(
        Token(t.text, t.lower, t.char_start - base, t.char_end - base)
        for t in tokens[t_start:t_end]
    )
    shifted_sents = tuple(
        SentenceSpan(s.token_start - t_start, s.token_end - t_start) for s in group
    )
    words = count_words(shifted_tokens)
    return Passage(
        doc_id=doc.id,
        passage_index=index,
        text=text,
        tokens=shifted_tokens,
        sentences=shifted_sents,
        word_count=words,
        oversized=words > max_words,
    )


def split_passages(doc: Document, max_words: int = 400) -> list[Passage]:
    """Greedy sentence packing under a word budget.

    Sentences are appended in order until adding the next one would
    exceed ``max_words``; that sentence starts the next passage.  A
    single sentence longer than the budget becomes its own passage,
    flagged oversized.  Concatenating the passages reproduces the
    document's token sequence.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    tokens = tokenize(doc.text)
    if not tokens:
        return []
    sents = split_sentences(doc.text, tokens)

    groups: list[list[SentenceSpan]] = []
    cur: list[SentenceSpan] = []
    cur_words = 0
    for s in sents:
        w = count_words(tokens[s.token_start : s.token_end])
        if cur and cur_words + w > max_words:
            groups.append(cur)
            cur = []
            cur_words = 0
        cur.append(s)
        cur_words += w
    if cur:
        groups.append(cur)

    return [
        _build_passage(doc, i, tokens, group, max_words)
        for i, group in enumerate(groups)
    ]


def ingest_jsonl(path) -> list[Document]:
    """Load a corpus file: one JSON object per line with id/title/text.

    Raises ParseError naming the 1-based line number on malformed input
    and DuplicateIdError when two lines share an id.  Blank lines are
    skipped; an empty file yields an empty corpus.
    """
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(line_no, "expected a JSON object")
            for key in ("id", "title", "text"):
                if key not in obj:
                    raise ParseError(line_no, f"missing field {key!r}")
                if not isinstance(obj[key], str):
                    raise ParseError(line_no, f"field {key!r} must be a string")
            if not obj["id"]:
                raise ParseError(line_no, "empty document id")
            if not obj["text"]:
                raise ParseError(line_no, "empty document text")
            if obj["id"] in seen:
                raise DuplicateIdError(obj["id"], line_no)
            seen.add(obj["id"])
            docs.append(Document(id=obj["id"], title=obj["title"], text=obj["text"]))
    return docs
