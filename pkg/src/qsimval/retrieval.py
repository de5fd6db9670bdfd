"""Classical IR effectiveness metrics over ranked lists and TREC qrels.

Binary relevance means grade >= 1. Unjudged documents count as
non-relevant and contribute zero gain. A topic missing from the qrels
makes every metric undefined (None) rather than zero, so unjudged topics
do not bias downstream statistics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import IO

from .errors import DataError

__all__ = [
    "Qrels",
    "RankedList",
    "parse_qrels",
    "precision_at_k",
    "recall_at_k",
    "reciprocal_rank",
    "average_precision",
    "ndcg_at_k",
]

# topic_id -> doc_id -> grade
Qrels = dict[str, dict[str, int]]


@dataclass(frozen=True)
class RankedList:
    topic_id: str
    doc_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise DataError(f"duplicate doc id in ranking for topic '{self.topic_id}'")


def parse_qrels(raw: bytes | str | IO) -> Qrels:
    """Parse whitespace-separated `topic iteration doc grade` lines; the
    iteration column is ignored, negative grades clamp to 0 with a warning."""
    if hasattr(raw, "read"):
        raw = raw.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    qrels: Qrels = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 4:
            raise DataError(
                f"qrels line {lineno}: expected 4 columns, got {len(fields)}"
            )
        topic, _iteration, doc, grade_text = fields
        try:
            grade = int(grade_text, 10)
        except ValueError as exc:
            raise DataError(f"qrels line {lineno}: grade '{grade_text}' is not an integer") from exc
        if grade < 0:
            warnings.warn(
                f"qrels line {lineno}: negative grade {grade} clamped to 0",
                stacklevel=2,
            )
            grade = 0
        existing = qrels.setdefault(topic, {}).get(doc)
        if existing is not None and existing != grade:
            raise DataError(
                f"qrels line {lineno}: conflicting grades for ({topic}, {doc}):"
                f" {existing} vs {grade}"
            )
        qrels[topic][doc] = grade
    return qrels


def _grades(ranking: RankedList, qrels: Qrels) -> dict[str, int] | None:
    return qrels.get(ranking.topic_id)


def precision_at_k(ranking: RankedList, qrels: Qrels, k: int) -> float | None:
    if k < 1:
        raise DataError(f"cutoff k must be >= 1, got {k}")
    grades = _grades(ranking, qrels)
    if grades is None:
        return None
    hits = sum(1 for d in ranking.doc_ids[:k] if grades.get(d, 0) >= 1)
    return hits / k


def recall_at_k(ranking: RankedList, qrels: Qrels, k: int) -> float | None:
    if k < 1:
        raise DataError(f"cutoff k must be >= 1, got {k}")
    grades = _grades(ranking, qrels)
    if grades is None:
        return None
    total_relevant = sum(1 for g in grades.values() if g >= 1)
    if total_relevant == 0:
        return None
    hits = sum(1 for d in ranking.doc_ids[:k] if grades.get(d, 0) >= 1)
    return hits / total_relevant


def reciprocal_rank(ranking: RankedList, qrels: Qrels) -> float | None:
    grades = _grades(ranking, qrels)
    if grades is None:
        return None
    for rank, doc in enumerate(ranking.doc_ids, start=1):
        if grades.get(doc, 0) >= 1:
            return 1.0 / rank
    return 0.0


def average_precision(ranking: RankedList, qrels: Qrels) -> float | None:
    grades = _grades(ranking, qrels)
    if grades is None:
        return None
    total_relevant = sum(1 for g in grades.values() if g >= 1)
    if total_relevant == 0:
        return None
    hits = 0
    precision_sum = 0.0
    for rank, doc in enumerate(ranking.doc_ids, start=1):
        if grades.get(doc, 0) >= 1:
            hits += 1
            precision_sum += hits / rank
    return precision_sum / total_relevant


def ndcg_at_k(ranking: RankedList, qrels: Qrels, k: int) -> float | None:
    if k < 1:
        raise DataError(f"cutoff k must be >= 1, got {k}")
    grades = _grades(ranking, qrels)
    if grades is None:
        return None
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)
    if not ideal:
        return None
    dcg = sum(
        grades.get(doc, 0) / math.log2(rank + 1)
        for rank, doc in enumerate(ranking.doc_ids[:k], start=1)
    )
    idcg = sum(g / math.log2(rank + 1) for rank, g in enumerate(ideal[:k], start=1))
    return dcg / idcg
