import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsimval.errors import EmptyQueryError
from qsimval.textstats import (
    count_syllables,
    flesch_kincaid_grade,
    named_entity_count,
    query_length_chars,
    query_length_terms,
    tokenize,
    type_token_ratio,
    unique_term_count,
)


class TestTokenize:
    def test_lowercases_and_strips_edge_punctuation(self):
        q = tokenize('What is "RBO"?')
        assert q.tokens == ("what", "is", "rbo")

    def test_interior_punctuation_survives(self):
        assert tokenize("state-of-the-art").tokens == ("state-of-the-art",)

    def test_empty_query_raises(self):
        with pytest.raises(EmptyQueryError):
            tokenize("   ")

    def test_punctuation_only_query_raises(self):
        with pytest.raises(EmptyQueryError):
            tokenize("?! ...")

    def test_sentence_counting(self):
        assert tokenize("one sentence").sentence_count == 1
        assert tokenize("first. second!").sentence_count == 2
        assert tokenize("what now?!...").sentence_count == 1

    def test_nfc_applied_to_raw(self):
        q = tokenize("café")
        assert q.raw == "café"
        assert query_length_chars(q) == 4


class TestSyllables:
    @pytest.mark.parametrize(
        "token, expected",
        [
            ("cat", 1),
            ("table", 1),  # vowel group 'a' + silent final e
            ("create", 1),  # 'ea' merges into one group and the final e is silent
            ("rhythm", 1),  # y is a vowel here
            ("strength", 1),
            ("efficiency", 4),
            ("improvements", 4),
            ("e", 1),  # floor at one
        ],
    )
    def test_hand_counts(self, token, expected):
        assert count_syllables(token) == expected

    @given(st.text(alphabet="bcdfgaeiouy", min_size=1, max_size=12))
    def test_at_least_one_syllable(self, token):
        assert count_syllables(token) >= 1


class TestStatistics:
    def test_lengths_and_ttr(self):
        q = tokenize("solar panel prices solar panel reviews")
        assert query_length_terms(q) == 6
        assert unique_term_count(q) == 4
        assert type_token_ratio(q) == 4 / 6
        assert query_length_chars(q) == len("solar panel prices solar panel reviews")

    def test_ttr_is_one_for_all_distinct(self):
        assert type_token_ratio(tokenize("all tokens differ here")) == 1.0

    def test_flesch_kincaid_matches_formula(self):
        # "the cat sat" -> 3 words, 1 sentence, 3 syllables
        q = tokenize("the cat sat")
        assert flesch_kincaid_grade(q) == 0.39 * (3 / 1) + 11.8 * (3 / 3) - 15.59

    def test_flesch_kincaid_two_sentences(self):
        q = tokenize("solar panels. best prices!")
        words = 4
        syllables = sum(q.syllable_counts)
        expected = 0.39 * (words / 2) + 11.8 * (syllables / words) - 15.59
        assert flesch_kincaid_grade(q) == expected

    @given(
        st.lists(
            st.text(alphabet="abcdefgst", min_size=1, max_size=8),
            min_size=1,
            max_size=10,
        )
    )
    def test_ttr_bounds(self, words):
        q = tokenize(" ".join(words))
        assert 0 < type_token_ratio(q) <= 1.0
        assert unique_term_count(q) <= query_length_terms(q)


class TestNamedEntities:
    def test_annotations_win_over_heuristic(self):
        q = tokenize("plain lowercase query")
        assert named_entity_count(q, ["Acme Corp", "Paris"]) == 2
        assert named_entity_count(q, []) == 0

    @pytest.mark.parametrize(
        "raw, expected",
        [
            ("barack obama visited paris", 0),
            ("Barack Obama visited Paris", 2),
            ("The president spoke", 0),  # lone sentence-initial capital
            ("The White House briefing", 1),
            ("visit New York City today", 1),
            ("Paris. London. Tokyo.", 0),  # each is a lone sentence-initial token
            ("see Paris London Tokyo", 1),  # one maximal run
        ],
    )
    def test_capitalization_heuristic(self, raw, expected):
        assert named_entity_count(tokenize(raw)) == expected
