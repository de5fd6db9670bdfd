"""Descriptive query statistics: lengths, TTR, readability, named entities."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyQueryError

__all__ = [
    "TokenizedQuery",
    "tokenize",
    "count_syllables",
    "query_length_chars",
    "query_length_terms",
    "unique_term_count",
    "type_token_ratio",
    "flesch_kincaid_grade",
    "named_entity_count",
]

_TERMINATOR_RUNS = re.compile(r"[.!?]+")
_VOWEL_GROUPS = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class TokenizedQuery:
    raw: str
    tokens: tuple[str, ...]
    sentence_count: int
    syllable_counts: tuple[int, ...]


def _strip_punctuation(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def count_syllables(token: str) -> int:
    """Heuristic syllable count: vowel groups (aeiouy), minus a terminal
    silent 'e' when more than one group was found, floored at 1."""
    groups = len(_VOWEL_GROUPS.findall(token))
    if groups > 1 and token.endswith("e"):
        groups -= 1
    return max(1, groups)


def tokenize(raw: str) -> TokenizedQuery:
    """Split a query on whitespace, strip per-token edge punctuation,
    lowercase, and attach sentence/syllable counts.

    Consecutive sentence terminators count as one sentence boundary; a
    query without terminators counts as one sentence. Raises
    EmptyQueryError when nothing tokenizable remains.
    """
    raw = unicodedata.normalize("NFC", raw)
    if not raw.strip():
        raise EmptyQueryError("empty query")
    tokens = []
    for piece in raw.split():
        stripped = _strip_punctuation(piece)
        if stripped:
            tokens.append(stripped.lower())
    if not tokens:
        raise EmptyQueryError("query contains only punctuation")
    sentence_count = max(1, len(_TERMINATOR_RUNS.findall(raw)))
    syllables = tuple(count_syllables(t) for t in tokens)
    return TokenizedQuery(
        raw=raw,
        tokens=tuple(tokens),
        sentence_count=sentence_count,
        syllable_counts=syllables,
    )


def query_length_chars(q: TokenizedQuery) -> int:
    """Number of Unicode scalar values in the raw query."""
    return len(q.raw)


def query_length_terms(q: TokenizedQuery) -> int:
    return len(q.tokens)


def unique_term_count(q: TokenizedQuery) -> int:
    return len(set(q.tokens))


def type_token_ratio(q: TokenizedQuery) -> float:
    """Lexical diversity: unique terms / total terms, in (0, 1]."""
    return unique_term_count(q) / query_length_terms(q)


def flesch_kincaid_grade(q: TokenizedQuery) -> float:
    """Flesch-Kincaid grade level: 0.39*(W/S) + 11.8*(Syll/W) - 15.59."""
    words = query_length_terms(q)
    syllables = sum(q.syllable_counts)
    return 0.39 * (words / q.sentence_count) + 11.8 * (syllables / words) - 15.59


def named_entity_count(
    q: TokenizedQuery, annotations: Sequence[str] | None = None
) -> int:
    """Count named entities in the query.

    When external ``annotations`` are supplied their count is returned
    verbatim. Otherwise a capitalization heuristic applies: each maximal run
    of capitalized tokens in the raw text counts as one entity, except a
    lone capitalized sentence-initial token, which is ignored unless the
    run extends beyond it.
    """
    if annotations is not None:
        return len(annotations)
    pieces = q.raw.split()
    entities = 0
    run_length = 0
    run_starts_sentence = False
    sentence_start = True

    def close_run() -> int:
        if run_length > 0 and not (run_starts_sentence and run_length == 1):
            return 1
        return 0

    for piece in pieces:
        word = _strip_punctuation(piece)
        capitalized = bool(word) and word[0].isupper()
        if capitalized:
            if run_length == 0:
                run_starts_sentence = sentence_start
            run_length += 1
        else:
            entities += close_run()
            run_length = 0
        # A sentence terminator ends any entity run along with the sentence.
        if piece and piece[-1] in ".!?":
            entities += close_run()
            run_length = 0
            sentence_start = True
        else:
            sentence_start = False
    entities += close_run()
    return entities
