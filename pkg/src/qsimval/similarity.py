"""Query-to-query similarity: token Jaccard, embedding cosine, BERT-style
greedy matching, and WordNet Wu-Palmer aggregation.

Every function returns None when the score is undefined for its inputs
(empty token set, zero vector, nothing scoreable); callers propagate that
as a missing cell rather than a failure.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DataError
from .textstats import TokenizedQuery
from .wordnet import SynsetGraph

__all__ = [
    "jaccard_similarity",
    "cosine_similarity",
    "bert_score",
    "BertScore",
    "wordnet_similarity",
]


def jaccard_similarity(qa: TokenizedQuery, qb: TokenizedQuery) -> float | None:
    a, b = set(qa.tokens), set(qb.tokens)
    if not a or not b:
        return None
    return len(a & b) / len(a | b)


def cosine_similarity(va, vb) -> float | None:
    x = np.asarray(va, dtype=float)
    y = np.asarray(vb, dtype=float)
    if x.shape != y.shape:
        raise DataError(f"cosine dimension mismatch: {x.shape} vs {y.shape}")
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        return None
    return float(np.dot(x, y) / (nx * ny))


class BertScore(NamedTuple):
    precision: float
    recall: float
    f1: float


def bert_score(er, es) -> BertScore | None:
    """Greedy token matching over unit-normalized rows; candidate rows are
    the simulated query's, reference rows the real query's. No IDF, no
    baseline rescaling."""
    ref = np.asarray(er, dtype=float)
    cand = np.asarray(es, dtype=float)
    if ref.size == 0 or cand.size == 0:
        return None
    if ref.ndim != 2 or cand.ndim != 2 or ref.shape[1] != cand.shape[1]:
        raise DataError(
            f"bert_score dimension mismatch: {ref.shape} vs {cand.shape}"
        )
    ref_norms = np.linalg.norm(ref, axis=1)
    cand_norms = np.linalg.norm(cand, axis=1)
    if np.any(ref_norms == 0.0) or np.any(cand_norms == 0.0):
        return None
    sim = (cand / cand_norms[:, None]) @ (ref / ref_norms[:, None]).T
    precision = float(np.mean(np.max(sim, axis=1)))
    recall = float(np.mean(np.max(sim, axis=0)))
    if precision + recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return BertScore(precision=precision, recall=recall, f1=f1)


def _term_synsets(graph: SynsetGraph, term: str) -> dict[str, tuple]:
    return {
        pos: graph.synsets_for_lemma(pos, term)
        for pos in ("n", "v")
        if graph.synsets_for_lemma(pos, term)
    }


def _term_score(graph: SynsetGraph, a: str, b: str) -> float | None:
    """t(a,b): 1 for equal strings, else the best Wu-Palmer over same-POS
    synset pairs; None when no comparable pair exists."""
    if a == b:
        return 1.0
    sa = _term_synsets(graph, a)
    sb = _term_synsets(graph, b)
    best: float | None = None
    for pos in sa.keys() & sb.keys():
        for ka in sa[pos]:
            for kb in sb[pos]:
                value = graph.wu_palmer(ka, kb)
                if best is None or value > best:
                    best = value
    return best


def wordnet_similarity(
    qa: TokenizedQuery, qb: TokenizedQuery, graph: SynsetGraph
) -> float | None:
    """Symmetrized mean of each term's best match on the other side.

    A term contributes only when at least one pairing with the other query
    is scoreable (exact match or shared-POS synsets); if nothing on either
    side is scoreable the result is undefined.
    """
    terms_a = sorted(set(qa.tokens))
    terms_b = sorted(set(qb.tokens))
    if not terms_a or not terms_b:
        return None
    cache: dict[tuple[str, str], float | None] = {}

    def pair(a: str, b: str) -> float | None:
        key = (a, b) if a <= b else (b, a)
        if key not in cache:
            cache[key] = _term_score(graph, key[0], key[1])
        return cache[key]

    def direction(src: list[str], dst: list[str]) -> float | None:
        per_term = []
        for a in src:
            scores = [s for s in (pair(a, b) for b in dst) if s is not None]
            if scores:
                per_term.append(max(scores))
        if not per_term:
            return None
        return sum(per_term) / len(per_term)

    d_ab = direction(terms_a, terms_b)
    d_ba = direction(terms_b, terms_a)
    if d_ab is None or d_ba is None:
        return None
    return (d_ab + d_ba) / 2.0
