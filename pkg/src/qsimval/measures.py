"""Evaluates every enabled measure for every (real, simulated) pair and
assembles the measure matrix plus per-simulator report lines.

Conventions: query statistics and IR metrics describe the simulated side
of a pair; similarity and overlap measures compare both sides. Undefined
values stay None (NaN in the matrix) and are never collapsed to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import retrieval, serp, similarity, textstats
from .config import RunConfig
from .errors import DataError, EmptyQueryError
from .matrix import MeasureMatrix
from .retrieval import Qrels, RankedList
from .sessions import PairingResult, Session, SessionPair
from .textstats import TokenizedQuery
from .wordnet import SynsetGraph

__all__ = ["Resources", "compute_measures", "report_lines"]


@dataclass
class Resources:
    """Everything data-dependent the measures may need; fields stay None
    when the corresponding measure group is disabled."""

    qrels: Qrels | None = None
    graph: SynsetGraph | None = None
    provider: object | None = None
    annotations: dict | None = None


def _first_serp(session: Session) -> tuple[str, ...]:
    return session.interactions[0].serp


def _tokenize_cached(cache: dict, raw: str) -> TokenizedQuery | None:
    if raw not in cache:
        try:
            cache[raw] = textstats.tokenize(raw)
        except EmptyQueryError:
            cache[raw] = None
    return cache[raw]


def _annotation_for(resources: Resources, session: Session):
    if resources.annotations is None:
        return None
    if session.id in resources.annotations:
        return resources.annotations[session.id]
    return resources.annotations.get(session.session_id)


def _prefetch_embeddings(
    pairs: list[SessionPair], resources: Resources, granularity: str
) -> dict[str, object]:
    texts = sorted({p.real.query for p in pairs} | {p.simulated.query for p in pairs})
    if not texts:
        return {}
    matrices = resources.provider.fetch(texts, granularity)
    return dict(zip(texts, matrices))


def _evaluate_pair(
    pair: SessionPair,
    bases: list[str],
    config: RunConfig,
    resources: Resources,
    token_cache: dict,
    sentence_vectors: dict,
    token_matrices: dict,
) -> dict[str, float | None]:
    tq_sim = _tokenize_cached(token_cache, pair.simulated.query)
    tq_real = _tokenize_cached(token_cache, pair.real.query)
    sim_serp = _first_serp(pair.simulated)
    real_serp = _first_serp(pair.real)
    k = config.cutoff_k

    values: dict[str, float | None] = {}
    for base in bases:
        try:
            values[base] = _single_value(
                base,
                pair,
                tq_real,
                tq_sim,
                real_serp,
                sim_serp,
                k,
                config,
                resources,
                sentence_vectors,
                token_matrices,
            )
        except DataError as exc:
            raise DataError(
                f"measure '{base}' failed for simulator '{pair.simulator_id}', "
                f"session '{pair.session_id}': {exc}"
            ) from exc
    return values


def _single_value(
    base: str,
    pair: SessionPair,
    tq_real: TokenizedQuery | None,
    tq_sim: TokenizedQuery | None,
    real_serp: tuple[str, ...],
    sim_serp: tuple[str, ...],
    k: int,
    config: RunConfig,
    resources: Resources,
    sentence_vectors: dict,
    token_matrices: dict,
) -> float | None:
    if base == "query_length_chars":
        return None if tq_sim is None else float(textstats.query_length_chars(tq_sim))
    if base == "query_length_terms":
        return None if tq_sim is None else float(textstats.query_length_terms(tq_sim))
    if base == "unique_term_count":
        return None if tq_sim is None else float(textstats.unique_term_count(tq_sim))
    if base == "type_token_ratio":
        return None if tq_sim is None else textstats.type_token_ratio(tq_sim)
    if base == "flesch_kincaid_grade":
        return None if tq_sim is None else textstats.flesch_kincaid_grade(tq_sim)
    if base == "named_entity_count":
        if tq_sim is None:
            return None
        annotation = _annotation_for(resources, pair.simulated)
        return float(textstats.named_entity_count(tq_sim, annotation))
    if base == "jaccard_similarity":
        if tq_real is None or tq_sim is None:
            return None
        return similarity.jaccard_similarity(tq_real, tq_sim)
    if base == "cosine_similarity":
        va = sentence_vectors.get(pair.real.query)
        vb = sentence_vectors.get(pair.simulated.query)
        if va is None or vb is None:
            return None
        return similarity.cosine_similarity(va.rows[0], vb.rows[0])
    if base == "bert_score":
        ma = token_matrices.get(pair.real.query)
        mb = token_matrices.get(pair.simulated.query)
        if ma is None or mb is None:
            return None
        score = similarity.bert_score(ma.rows, mb.rows)
        return None if score is None else score.f1
    if base == "wordnet_similarity":
        if tq_real is None or tq_sim is None:
            return None
        return similarity.wordnet_similarity(tq_real, tq_sim, resources.graph)
    if base == "precision_at_k":
        return retrieval.precision_at_k(_ranked(pair, sim_serp), resources.qrels, k)
    if base == "recall_at_k":
        return retrieval.recall_at_k(_ranked(pair, sim_serp), resources.qrels, k)
    if base == "average_precision":
        return retrieval.average_precision(_ranked(pair, sim_serp), resources.qrels)
    if base == "reciprocal_rank":
        return retrieval.reciprocal_rank(_ranked(pair, sim_serp), resources.qrels)
    if base == "ndcg_at_k":
        return retrieval.ndcg_at_k(_ranked(pair, sim_serp), resources.qrels, k)
    if base == "serp_jaccard":
        return serp.serp_jaccard(real_serp, sim_serp, config.serp_jaccard_cutoff)
    if base == "rbo":
        return serp.rbo(real_serp, sim_serp, config.rbo)
    raise DataError(f"unknown measure base '{base}'")


def _ranked(pair: SessionPair, doc_ids: tuple[str, ...]) -> RankedList:
    return RankedList(topic_id=pair.session_id, doc_ids=doc_ids)


def compute_measures(
    pairing: PairingResult, config: RunConfig, resources: Resources
) -> MeasureMatrix:
    """One matrix row per pair, columns in canonical order for the
    enabled measures."""
    bases = config.enabled_bases()
    columns = tuple(config.column_names())
    flat_pairs = [
        pair
        for simulator_id in sorted(pairing.pairs)
        for pair in pairing.pairs[simulator_id]
    ]
    token_cache: dict = {}
    sentence_vectors: dict = {}
    token_matrices: dict = {}
    if flat_pairs and resources.provider is not None:
        if config.measures.get("cosine_similarity"):
            sentence_vectors = _prefetch_embeddings(flat_pairs, resources, "sentence")
        if config.measures.get("bert_score"):
            token_matrices = _prefetch_embeddings(flat_pairs, resources, "token")

    row_keys = []
    rows = []
    for pair in flat_pairs:
        values = _evaluate_pair(
            pair, bases, config, resources, token_cache, sentence_vectors, token_matrices
        )
        row_keys.append((pair.simulator_id, pair.session_id, pair.rank))
        rows.append(
            [np.nan if values[b] is None else float(values[b]) for b in bases]
        )
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return MeasureMatrix(row_keys=tuple(row_keys), column_names=columns, values=data)


def report_lines(matrix: MeasureMatrix, digest: str, version: str) -> list[dict]:
    """One dict per simulator: for each measure, the list of values in
    pair order (nulls preserved), plus the pair keys for alignment."""
    simulators: dict[str, list[int]] = {}
    for index, (simulator_id, _session, _rank) in enumerate(matrix.row_keys):
        simulators.setdefault(simulator_id, []).append(index)

    lines = []
    for simulator_id in sorted(simulators):
        indices = simulators[simulator_id]
        measures = {}
        for col, name in enumerate(matrix.column_names):
            column_values = []
            for i in indices:
                v = matrix.values[i, col]
                column_values.append(None if np.isnan(v) else float(v))
            measures[name] = column_values
        lines.append(
            {
                "simulator_id": simulator_id,
                "pairs": [
                    [matrix.row_keys[i][1], matrix.row_keys[i][2]] for i in indices
                ],
                "measures": measures,
                "config_digest": digest,
                "version": version,
            }
        )
    return lines
