"""Answer-quality and retrieval metrics.

String metrics share one normalizer: lowercase, strip punctuation,
drop the articles a/an/the, collapse whitespace.  Multi-reference
inputs take the best score over references (exact match is satisfied
by any reference).
"""

from __future__ import annotations

import json
import re
import string
from collections import Counter
from dataclasses import dataclass

__all__ = [
    "normalize_answer",
    "exact_match",
    "token_f1",
    "rouge_l",
    "mrr",
    "precision_at_1",
    "recall_at_3",
    "rank_of_first",
    "faithfulness_recall",
    "MetricReport",
    "KNOWN_METRICS",
    "evaluate_records",
    "load_eval_jsonl",
    "EvalFormatError",
]

_ARTICLES_RE = re.compile(r"\b(a|an|the)\b")
_PUNC_TABLE = str.maketrans("", "", string.punctuation)


class EvalFormatError(Exception):
    """An eval JSONL record failed schema validation."""

    def __init__(self, record_no: int, reason: str):
        self.record_no = record_no
        self.reason = reason
        super().__init__(f"record {record_no}: {reason}")


def normalize_answer(s: str) -> str:
    """Lowercase, remove punctuation and articles, collapse whitespace."""
    s = s.lower()
    s = s.translate(_PUNC_TABLE)
    s = _ARTICLES_RE.sub(" ", s)
    return " ".join(s.split())


def exact_match(prediction: str, golds) -> float:
    """1.0 iff the normalized prediction equals any normalized gold."""
    if not golds:
        raise ValueError("exact_match requires at least one gold answer")
    norm = normalize_answer(prediction)
    return float(any(norm == normalize_answer(g) for g in golds))


def _f1_single(prediction: str, gold: str) -> float:
    pred_toks = normalize_answer(prediction).split()
    gold_toks = normalize_answer(gold).split()
    if not pred_toks and not gold_toks:
        return 1.0
    if not pred_toks or not gold_toks:
        return 0.0
    common = Counter(pred_toks) & Counter(gold_toks)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_toks)
    recall = overlap / len(gold_toks)
    return 2 * precision * recall / (precision + recall)


def token_f1(prediction: str, golds) -> float:
    """Bag-of-tokens F1 with multiplicity; best score over references."""
    if not golds:
        raise ValueError("token_f1 requires at least one gold answer")
    return max(_f1_single(prediction, g) for g in golds)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _rouge_l_single(prediction: str, reference: str) -> dict[str, float]:
    pred = normalize_answer(prediction).split()
    ref = normalize_answer(reference).split()
    if not pred and not ref:
        return {"precision": 1.0, "recall": 1.0, "f1": 1.0}
    if not pred or not ref:
        return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    lcs = _lcs_length(pred, ref)
    precision = lcs / len(pred)
    recall = lcs / len(ref)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def rouge_l(prediction: str, references) -> dict[str, float]:
    """LCS-based recall/precision/F1 over normalized tokens.

    With several references, the triple with the highest F1 wins
    (recall as the tie-break).
    """
    if isinstance(references, str):
        references = [references]
    if not references:
        raise ValueError("rouge_l requires at least one reference")
    best = None
    for ref in references:
        cand = _rouge_l_single(prediction, ref)
        if best is None or (cand["f1"], cand["recall"]) > (best["f1"], best["recall"]):
            best = cand
    return best


def mrr(ranks) -> float:
    """Mean of 1/rank, counting questions with no golden passage as 0."""
    ranks = list(ranks)
    if not ranks:
        raise ValueError("mrr of an empty rank list")
    total = 0.0
    for r in ranks:
        if r is None:
            continue
        if r < 1:
            raise ValueError("ranks are 1-based")
        total += 1.0 / r
    return total / len(ranks)


def precision_at_1(ranks) -> float:
    """Fraction of questions whose first golden passage sits at rank 1."""
    ranks = list(ranks)
    if not ranks:
        raise ValueError("precision_at_1 of an empty rank list")
    return sum(1 for r in ranks if r == 1) / len(ranks)


def recall_at_3(ranks) -> float:
    """Fraction of questions whose first golden passage sits in the top 3."""
    ranks = list(ranks)
    if not ranks:
        raise ValueError("recall_at_3 of an empty rank list")
    return sum(1 for r in ranks if r is not None and r <= 3) / len(ranks)


def rank_of_first(flags) -> int | None:
    """1-based position of the first True flag in a ranked list, else None."""
    for i, f in enumerate(flags, start=1):
        if f:
            return i
    return None


def faithfulness_recall(pairs) -> float:
    """Fraction of (short golds, long answer) pairs where some normalized
    gold appears as a substring of the normalized long answer."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("faithfulness_recall of an empty pair list")
    hits = 0
    for golds, long_answer in pairs:
        if isinstance(golds, str):
            golds = [golds]
        if not golds:
            raise ValueError("faithfulness_recall pair without gold answers")
        long_norm = normalize_answer(long_answer)
        if any(normalize_answer(g) and normalize_answer(g) in long_norm for g in golds):
            hits += 1
    return hits / len(pairs)


KNOWN_METRICS = ("em", "f1", "rougeL", "faithfulness")


@dataclass
class MetricReport:
    """Per-metric means plus per-example scores, JSON-serializable."""

    n_examples: int
    means: dict[str, float]
    per_example: dict[str, list[float]]

    def to_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "means": self.means,
            "per_example": self.per_example,
        }


def evaluate_records(records, metric_names) -> MetricReport:
    """Score records of {"question", "prediction", "golds"}.

    em is any-reference match; f1 and rougeL take the max over
    references; faithfulness treats the prediction as the long answer
    and checks containment of any gold.
    """
    records = list(records)
    names = list(metric_names)
    for name in names:
        if name not in KNOWN_METRICS:
            raise ValueError(f"unknown metric {name!r}; known: {', '.join(KNOWN_METRICS)}")
    if not records:
        raise ValueError("evaluate_records needs at least one record")
    per: dict[str, list[float]] = {name: [] for name in names}
    for rec in records:
        pred = rec["prediction"]
        golds = rec["golds"]
        for name in names:
            if name == "em":
                per[name].append(exact_match(pred, golds))
            elif name == "f1":
                per[name].append(token_f1(pred, golds))
            elif name == "rougeL":
                per[name].append(rouge_l(pred, golds)["f1"])
            elif name == "faithfulness":
                per[name].append(faithfulness_recall([(golds, pred)]))
    means = {name: sum(vals) / len(vals) for name, vals in per.items()}
    return MetricReport(n_examples=len(records), means=means, per_example=per)


def load_eval_jsonl(path) -> list[dict]:
    """Read eval records, validating schema with 1-based record indices."""
    records: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        record_no = 0
        for line in fh:
            if not line.strip():
                continue
            record_no += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EvalFormatError(record_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise EvalFormatError(record_no, "expected a JSON object")
            for key in ("question", "prediction", "golds"):
                if key not in obj:
                    raise EvalFormatError(record_no, f"missing field {key!r}")
            if not isinstance(obj["question"], str) or not isinstance(obj["prediction"], str):
                raise EvalFormatError(record_no, "question and prediction must be strings")
            golds = obj["golds"]
            if (
                not isinstance(golds, list)
                or not golds
                or not all(isinstance(g, str) for g in golds)
            ):
                raise EvalFormatError(record_no, "golds must be a non-empty list of strings")
            records.append(obj)
    return records
