import io
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragmt.lexicon import Lexicon, LexiconEntry, load_lexicon
from ragmt.segmenter import (
    CLASS_ASCII,
    CLASS_SPACE,
    CLASS_SYMBOL,
    CLASS_TEXT,
    char_class,
    enumerate_partitions,
    partition_sort_key,
    segment,
)


def make_lexicon(rows: str) -> Lexicon:
    return load_lexicon(io.StringIO(rows))


AB_LEXICON = make_lexicon("AB\tx\t2\nA\ty\t1\nB\tz\t1\n")  # total 4
HAN_LEXICON = make_lexicon("你好\t若好\t5\n世界\t世界事\t3\n")


class TestOracle:
    """enumerate_partitions is the brute-force reference; pin it down first."""

    def test_two_partitions_of_ab(self):
        parts = dict((tuple(p), s) for p, s in enumerate_partitions(AB_LEXICON, "AB"))
        assert set(parts) == {("AB",), ("A", "B")}
        assert parts[("AB",)] == pytest.approx(math.log(2 / 4), abs=1e-12)
        assert parts[("A", "B")] == pytest.approx(2 * math.log(1 / 4), abs=1e-12)

    def test_single_char(self):
        parts = enumerate_partitions(AB_LEXICON, "A")
        assert [p for p, _ in parts] == [["A"]]

    def test_empty_text_has_one_empty_partition(self):
        parts = enumerate_partitions(AB_LEXICON, "")
        assert parts == [([], 0.0)]

    def test_cap_enforced(self):
        with pytest.raises(ValueError, match="cap"):
            enumerate_partitions(AB_LEXICON, "A" * 13)

    def test_punctuation_atomicity(self):
        parts = [tuple(p) for p, _ in enumerate_partitions(HAN_LEXICON, "你好，世界")]
        assert all("，" in p for p in parts)
        assert ("你好", "，", "世界") in parts


class TestSegment:
    def test_empty_text(self):
        assert segment(AB_LEXICON, "") == []

    def test_known_word_beats_character_split(self):
        assert [s.text for s in segment(AB_LEXICON, "AB")] == ["AB"]

    def test_punctuation_survives_as_own_segment(self):
        segs = segment(HAN_LEXICON, "你好，世界")
        assert [s.text for s in segs] == ["你好", "，", "世界"]
        assert [s.in_lexicon for s in segs] == [True, False, True]

    def test_spans_match_text(self):
        text = "你好，世界 hello"
        for seg in segment(HAN_LEXICON, text):
            assert seg.text == text[seg.start : seg.end]
            assert seg.start < seg.end

    def test_non_han_runs_stay_atomic(self):
        segs = segment(HAN_LEXICON, "abc 123!!你好")
        assert [s.text for s in segs] == ["abc", " ", "123", "!!", "你好"]

    def test_unknown_han_falls_back_to_single_characters(self):
        segs = segment(HAN_LEXICON, "貓狗")
        assert [s.text for s in segs] == ["貓", "狗"]

    def test_determinism(self):
        text = "你好，世界 ABC 貓"
        first = segment(HAN_LEXICON, text)
        for _ in range(5):
            assert segment(HAN_LEXICON, text) == first


class TestCharClass:
    @pytest.mark.parametrize(
        "ch,cls",
        [
            (" ", CLASS_SPACE),
            ("　", CLASS_SPACE),
            ("a", CLASS_ASCII),
            ("7", CLASS_ASCII),
            ("!", CLASS_SYMBOL),
            ("，", CLASS_SYMBOL),
            ("。", CLASS_SYMBOL),
            ("€", CLASS_SYMBOL),
            ("你", CLASS_TEXT),
            ("𠊎", CLASS_TEXT),
            ("é", CLASS_TEXT),
        ],
    )
    def test_classes(self, ch, cls):
        assert char_class(ch) == cls


ALPHABET = "甲乙丙丁"


def random_lexicon(rng: random.Random) -> Lexicon:
    entries = {}
    for _ in range(rng.randint(0, 10)):
        surface = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 4)))
        entries[surface] = LexiconEntry(surface, surface + "'", rng.randint(1, 9))
    return Lexicon.from_entries(entries.values())


def oracle_best(lexicon: Lexicon, text: str) -> list[str]:
    parts = enumerate_partitions(lexicon, text)
    return max((p for p, _ in parts), key=lambda p: partition_sort_key(lexicon, p))


class TestOracleEquivalence:
    def test_randomized_against_brute_force(self):
        rng = random.Random(20240813)
        for _ in range(300):
            lexicon = random_lexicon(rng)
            text = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 8)))
            got = [s.text for s in segment(lexicon, text)]
            assert got == oracle_best(lexicon, text), (text, sorted(lexicon.entries))

    def test_equivalence_holds_with_mixed_classes(self):
        rng = random.Random(7)
        mixed = ALPHABET + "a!，"
        for _ in range(200):
            lexicon = random_lexicon(rng)
            text = "".join(rng.choice(mixed) for _ in range(rng.randint(0, 7)))
            got = [s.text for s in segment(lexicon, text)]
            assert got == oracle_best(lexicon, text), (text, sorted(lexicon.entries))

    def test_tie_break_prefers_fewer_segments(self):
        # weights tie exactly when f(甲乙)*total == f(甲)*f(乙): 1*16 == 4*4
        lexicon = Lexicon.from_entries(
            [
                LexiconEntry("甲乙", "x", 1),
                LexiconEntry("甲", "y", 4),
                LexiconEntry("乙", "z", 4),
                LexiconEntry("丙", "w", 7),
            ]
        )
        got = [s.text for s in segment(lexicon, "甲乙")]
        assert got == ["甲乙"]
        assert got == oracle_best(lexicon, "甲乙")

    def test_tie_break_leftmost_longest(self):
        # [甲乙][丙] and [甲][乙丙] both score (2*3)/total^2 with two pieces
        lexicon = Lexicon.from_entries(
            [
                LexiconEntry("甲乙", "a", 2),
                LexiconEntry("丙", "b", 3),
                LexiconEntry("甲", "c", 3),
                LexiconEntry("乙丙", "d", 2),
            ]
        )
        got = [s.text for s in segment(lexicon, "甲乙丙")]
        assert got == ["甲乙", "丙"]
        assert got == oracle_best(lexicon, "甲乙丙")


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=40))
def test_lossless_partition_arbitrary_unicode(text):
    segs = segment(HAN_LEXICON, text)
    assert "".join(s.text for s in segs) == text
    # spans are contiguous and non-overlapping
    cursor = 0
    for seg in segs:
        assert seg.start == cursor
        cursor = seg.end
    assert cursor == len(text)


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=30))
def test_in_lexicon_flag_matches_lookup(text):
    for seg in segment(HAN_LEXICON, text):
        assert seg.in_lexicon == (HAN_LEXICON.lookup(seg.text) is not None)


def test_adding_an_entry_never_shrinks_the_partition_space():
    """Every previously legal partition stays legal, and the new optimum
    dominates the old optimal partition when both are scored under the
    augmented lexicon's weights."""
    rng = random.Random(99)
    for _ in range(100):
        lexicon = random_lexicon(rng)
        text = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 7)))
        new_surface = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 3)))
        augmented = Lexicon.from_entries(
            list(lexicon.entries.values())
            + ([LexiconEntry(new_surface, "t", 5)] if new_surface not in lexicon.entries else [])
        )
        old_parts = {tuple(p) for p, _ in enumerate_partitions(lexicon, text)}
        new_parts = {tuple(p) for p, _ in enumerate_partitions(augmented, text)}
        assert old_parts <= new_parts
        old_best = oracle_best(lexicon, text)
        new_best = oracle_best(augmented, text)
        assert partition_sort_key(augmented, new_best) >= partition_sort_key(augmented, old_best)
