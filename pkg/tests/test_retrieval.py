"""Retrieval metric unit tests plus randomized brute-force oracle parity."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    average_precision_oracle,
    ndcg_oracle,
    precision_oracle,
    recall_oracle,
    reciprocal_rank_oracle,
)
from qsimval.errors import DataError
from qsimval.retrieval import (
    RankedList,
    average_precision,
    ndcg_at_k,
    parse_qrels,
    precision_at_k,
    recall_at_k,
    reciprocal_rank,
)


class TestParseQrels:
    def test_empty_input(self):
        assert parse_qrels("") == {}

    def test_basic_line(self):
        assert parse_qrels("301 0 doc7 2\n") == {"301": {"doc7": 2}}

    def test_iteration_column_ignored(self):
        assert parse_qrels("301 Q0 doc7 2") == {"301": {"doc7": 2}}

    def test_non_integer_grade_names_line(self):
        with pytest.raises(DataError, match="line 2"):
            parse_qrels("301 0 doc7 2\n301 0 doc8 x\n")

    def test_wrong_column_count(self):
        with pytest.raises(DataError, match="expected 4 columns"):
            parse_qrels("301 0 doc7\n")

    def test_negative_grade_clamped_with_warning(self):
        with pytest.warns(UserWarning, match="clamped"):
            q = parse_qrels("301 0 doc7 -2\n")
        assert q == {"301": {"doc7": 0}}

    def test_conflicting_duplicate_rejected(self):
        with pytest.raises(DataError, match="conflicting grades"):
            parse_qrels("301 0 doc7 2\n301 0 doc7 1\n")

    def test_identical_duplicate_tolerated(self):
        assert parse_qrels("301 0 doc7 2\n301 0 doc7 2\n") == {"301": {"doc7": 2}}

    def test_bytes_accepted(self):
        assert parse_qrels(b"301 0 doc7 2") == {"301": {"doc7": 2}}


QRELS = {
    "t": {"d1": 1, "d3": 2, "d5": 1, "d9": 0},
    "empty": {"d1": 0, "d2": 0},
}


def _rl(*doc_ids, topic="t"):
    return RankedList(topic_id=topic, doc_ids=tuple(doc_ids))


class TestHandValues:
    def test_duplicate_docs_rejected(self):
        with pytest.raises(DataError, match="duplicate doc id"):
            _rl("d1", "d1")

    def test_precision(self):
        # 2 relevant in the top 5
        assert precision_at_k(_rl("d1", "d2", "d3", "d4", "d6"), QRELS, 5) == 0.4

    def test_precision_divides_by_k_not_list_length(self):
        assert precision_at_k(_rl("d1"), QRELS, 10) == 0.1

    def test_recall(self):
        assert recall_at_k(_rl("d1", "d2", "d3"), QRELS, 3) == 2 / 3

    def test_reciprocal_rank_first_relevant_at_4(self):
        assert reciprocal_rank(_rl("d2", "d4", "d9", "d1"), QRELS) == 0.25

    def test_reciprocal_rank_no_relevant_retrieved(self):
        assert reciprocal_rank(_rl("d2", "d9"), QRELS) == 0.0

    def test_average_precision_two_relevant(self):
        # relevant at ranks 1 and 3, two relevant in total
        qrels = {"t": {"a": 1, "c": 1}}
        value = average_precision(_rl("a", "b", "c"), qrels)
        assert value == pytest.approx((1.0 + 2 / 3) / 2, abs=1e-15)

    def test_average_precision_unretrieved_relevant_counts(self):
        # relevant at ranks 1 and 3; a third relevant doc is never retrieved
        value = average_precision(_rl("d1", "d2", "d3"), QRELS)
        assert value == pytest.approx((1.0 + 2 / 3) / 3, abs=1e-15)

    def test_ndcg_hand_case(self):
        # grades in rank order [2, 0, 1]
        qrels = {"t": {"a": 2, "b": 0, "c": 1}}
        value = ndcg_at_k(_rl("a", "b", "c"), qrels, 3)
        assert value == pytest.approx(2.5 / (2.0 + 1.0 / math.log2(3)), abs=1e-15)

    def test_ndcg_ideal_ordering_is_one(self):
        qrels = {"t": {"a": 3, "b": 2, "c": 1}}
        assert ndcg_at_k(_rl("a", "b", "c"), qrels, 3) == 1.0

    def test_ndcg_all_unjudged_is_zero(self):
        assert ndcg_at_k(_rl("x", "y"), QRELS, 2) == 0.0

    def test_missing_topic_undefined_everywhere(self):
        r = _rl("d1", topic="unknown")
        assert precision_at_k(r, QRELS, 1) is None
        assert recall_at_k(r, QRELS, 1) is None
        assert reciprocal_rank(r, QRELS) is None
        assert average_precision(r, QRELS) is None
        assert ndcg_at_k(r, QRELS, 1) is None

    def test_zero_relevant_topic(self):
        r = _rl("d1", "d2", topic="empty")
        assert precision_at_k(r, QRELS, 2) == 0.0
        assert recall_at_k(r, QRELS, 2) is None
        assert average_precision(r, QRELS) is None
        assert reciprocal_rank(r, QRELS) == 0.0
        assert ndcg_at_k(r, QRELS, 2) is None

    def test_invalid_cutoff_rejected(self):
        with pytest.raises(DataError, match="cutoff k"):
            precision_at_k(_rl("d1"), QRELS, 0)


def _random_instance(rng):
    pool = [f"d{i}" for i in range(60)]
    doc_ids = tuple(rng.sample(pool, rng.randint(1, 50)))
    judged = rng.sample(pool, rng.randint(1, 40))
    qrels = {"t": {d: rng.randint(0, 3) for d in judged}}
    k = rng.randint(1, 20)
    return doc_ids, qrels, k


class TestOracleParity:
    def test_500_random_instances(self):
        rng = random.Random(20240822)
        for _ in range(500):
            doc_ids, qrels, k = _random_instance(rng)
            r = RankedList(topic_id="t", doc_ids=doc_ids)
            checks = [
                (precision_at_k(r, qrels, k), precision_oracle(doc_ids, "t", qrels, k)),
                (recall_at_k(r, qrels, k), recall_oracle(doc_ids, "t", qrels, k)),
                (reciprocal_rank(r, qrels), reciprocal_rank_oracle(doc_ids, "t", qrels)),
                (
                    average_precision(r, qrels),
                    average_precision_oracle(doc_ids, "t", qrels),
                ),
                (ndcg_at_k(r, qrels, k), ndcg_oracle(doc_ids, "t", qrels, k)),
            ]
            for ours, reference in checks:
                if reference is None:
                    assert ours is None
                else:
                    assert ours == pytest.approx(reference, abs=1e-12)


@st.composite
def ranked_instances(draw):
    n_docs = draw(st.integers(1, 15))
    doc_ids = tuple(f"d{i}" for i in range(n_docs))
    order = draw(st.permutations(doc_ids))
    grades = {
        d: draw(st.integers(0, 3)) for d in doc_ids if draw(st.booleans())
    }
    return tuple(order), {"t": grades}


class TestProperties:
    @given(ranked_instances(), st.integers(1, 15))
    @settings(max_examples=150, deadline=None)
    def test_ranges_and_precision_granularity(self, instance, k):
        doc_ids, qrels = instance
        r = RankedList(topic_id="t", doc_ids=doc_ids)
        for metric in (
            precision_at_k(r, qrels, k),
            recall_at_k(r, qrels, k),
            reciprocal_rank(r, qrels),
            average_precision(r, qrels),
            ndcg_at_k(r, qrels, k),
        ):
            if metric is not None:
                assert 0.0 <= metric <= 1.0 + 1e-12
        p = precision_at_k(r, qrels, k)
        if p is not None:
            assert round(p * k, 9) == round(p * k)

    @given(ranked_instances(), st.integers(1, 14))
    @settings(max_examples=150, deadline=None)
    def test_recall_non_decreasing_in_k(self, instance, k):
        doc_ids, qrels = instance
        r = RankedList(topic_id="t", doc_ids=doc_ids)
        first = recall_at_k(r, qrels, k)
        second = recall_at_k(r, qrels, k + 1)
        if first is not None and second is not None:
            assert second >= first

    @given(ranked_instances())
    @settings(max_examples=150, deadline=None)
    def test_promoting_a_relevant_doc_never_hurts(self, instance):
        doc_ids, qrels = instance
        grades = qrels["t"]
        relevant_positions = [
            i for i, d in enumerate(doc_ids) if grades.get(d, 0) >= 1
        ]
        nonrel_positions = [
            i for i, d in enumerate(doc_ids) if grades.get(d, 0) == 0
        ]
        swaps = [
            (j, i)
            for i in relevant_positions
            for j in nonrel_positions
            if j < i
        ]
        if not swaps:
            return
        j, i = swaps[0]
        promoted = list(doc_ids)
        promoted[i], promoted[j] = promoted[j], promoted[i]
        before = RankedList(topic_id="t", doc_ids=doc_ids)
        after = RankedList(topic_id="t", doc_ids=tuple(promoted))
        for metric in (reciprocal_rank, average_precision):
            a, b = metric(before, qrels), metric(after, qrels)
            if a is not None and b is not None:
                assert b >= a - 1e-12
        a = ndcg_at_k(before, qrels, len(doc_ids))
        b = ndcg_at_k(after, qrels, len(doc_ids))
        if a is not None and b is not None:
            assert b >= a - 1e-12
