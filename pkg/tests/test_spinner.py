from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from screener.spinner import (
    ThesaurusError,
    parse_thesaurus,
    spin,
    spin_detail,
    spin_variants,
)

SIMPLE = parse_thesaurus(
    """
good => sincere | honest | well meaning
intentions => goals
big data => enormous information | huge information
data => information
"""
)


class TestParsing:
    def test_entries_normalized(self):
        t = parse_thesaurus("Naïve Bayes => credulous bayes | innocent bayes")
        assert ("naive", "bayes") in t.entries
        assert t.entries[("naive", "bayes")] == ("credulous bayes", "innocent bayes")

    def test_duplicate_keys_merge_in_order(self):
        t = parse_thesaurus("a b => x\na b => y | x\n")
        assert t.entries[("a", "b")] == ("x", "y")

    def test_replacements_lowercased(self):
        t = parse_thesaurus("key word => Counterfeit Consciousness")
        assert t.entries[("key", "word")] == ("counterfeit consciousness",)

    @pytest.mark.parametrize(
        "line, fragment",
        [
            ("no separator", "'=>'"),
            ("a => b => c", "'=>'"),
            (" => x", "empty source"),
            ("a => x | | y", "empty replacement"),
            ("one two three four => x", "longer than 3"),
        ],
    )
    def test_errors_carry_line_number(self, line, fragment):
        with pytest.raises(ThesaurusError) as err:
            parse_thesaurus("# pad\n" + line)
        assert "line 2" in str(err.value)
        assert fragment in str(err.value)

    def test_pure_self_map_rejected(self):
        with pytest.raises(ThesaurusError, match="itself"):
            parse_thesaurus("same words => same words")

    def test_self_among_others_allowed(self):
        t = parse_thesaurus("signal noise => signal noise | flag clamor")
        assert len(t.entries[("signal", "noise")]) == 2


class TestSpin:
    def test_longest_key_wins(self):
        # "big data" must be consumed as one phrase, not via the "data" entry.
        assert spin(SIMPLE, "big data", 0) == "enormous information"
        assert spin(SIMPLE, "some data", 0) == "some information"

    def test_selector_indexes_and_clamps(self):
        assert spin(SIMPLE, "good intentions", 0) == "sincere goals"
        assert spin(SIMPLE, "good intentions", 2) == "well meaning goals"
        assert spin(SIMPLE, "good intentions", 99) == "well meaning goals"

    def test_random_selector_is_seedable(self):
        a = spin(SIMPLE, "good intentions", random.Random(7))
        b = spin(SIMPLE, "good intentions", random.Random(7))
        assert a == b

    def test_unmatched_tokens_pass_through_lowercased(self):
        assert spin(SIMPLE, "Totally Unrelated, TEXT!") == "totally unrelated text"

    def test_ledger_records_replacements(self):
        result = spin_detail(SIMPLE, "keep good intentions here", 0)
        assert result.text == "keep sincere goals here"
        assert [(r.token_index, r.source, r.replacement) for r in result.replacements] == [
            (1, "good", "sincere"),
            (2, "intentions", "goals"),
        ]

    def test_empty_thesaurus_is_identity_modulo_normalization(self):
        empty = parse_thesaurus("# nothing\n")
        assert spin(empty, "Hello, World") == "hello world"

    @given(st.lists(st.sampled_from(["good", "intentions", "big", "data", "plain"]), max_size=10))
    @settings(max_examples=200, deadline=None)
    def test_spin_never_longer_than_replacement_budget(self, words):
        # every replacement phrase here is at most 2 tokens, so output tokens
        # never exceed input tokens times 2
        text = " ".join(words)
        out = spin(SIMPLE, text, 0)
        assert len(out.split()) <= 2 * max(1, len(words))


class TestVariants:
    def test_deterministic_for_seed(self):
        a = spin_variants(SIMPLE, "good intentions", 3, seed=5)
        b = spin_variants(SIMPLE, "good intentions", 3, seed=5)
        assert a == b

    def test_all_distinct_and_exhaustive_when_space_small(self):
        variants = spin_variants(SIMPLE, "good intentions", 10, seed=0)
        assert sorted(variants) == sorted(
            ["sincere goals", "honest goals", "well meaning goals"]
        )

    def test_k_one_no_matches_returns_original(self):
        empty = parse_thesaurus("# nothing\n")
        assert spin_variants(empty, "plain words", 1, seed=0) == ["plain words"]

    def test_includes_requested_example(self):
        variants = spin_variants(SIMPLE, "good intentions", 3, seed=2)
        assert "sincere goals" in variants

    def test_k_validation(self):
        with pytest.raises(ValueError):
            spin_variants(SIMPLE, "x", 0)

    def test_large_space_sampling_caps_at_k(self):
        entries = "\n".join(f"w{i} => " + " | ".join(f"s{i}x{j}" for j in range(8)) for i in range(8))
        t = parse_thesaurus(entries)
        text = " ".join(f"w{i}" for i in range(8))  # 8^8 combos, far past enumeration
        variants = spin_variants(t, text, 12, seed=3)
        assert len(variants) == 12
        assert len(set(variants)) == 12
