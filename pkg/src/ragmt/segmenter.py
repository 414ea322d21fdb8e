"""Dictionary-driven word segmentation over a match lattice.

Every position either starts a lexicon match or falls back to an unknown
piece, and dynamic programming picks the partition maximizing the sum of
log weights, where an in-lexicon piece weighs ``frequency / total_frequency``
and an unknown piece weighs ``0.5 / (total_frequency + 1)`` (always strictly
below any real entry, so known words win whenever possible).

Text is first split into maximal runs of one character class: segmentable
text (Han and other non-ASCII letters), whitespace, ASCII letters/digits,
and punctuation/symbols. Lexicon matches never cross a run boundary. Inside
a segmentable run the unknown fallback is a single character; a non-text run
falls back to one atomic piece, so punctuation and foreign words survive
segmentation whole.

Scores are compared as exact rationals, making the arg-max and its
tie-breaks (fewer pieces, then leftmost-longest) reproducible bit-for-bit.
"""

import math
import unicodedata
from dataclasses import dataclass
from fractions import Fraction

from .lexicon import Lexicon

# Character classes used to form atomic runs.
CLASS_TEXT = "text"
CLASS_SPACE = "space"
CLASS_ASCII = "ascii"
CLASS_SYMBOL = "symbol"

ORACLE_DEFAULT_CAP = 12


@dataclass(frozen=True)
class Segment:
    """A contiguous span of source text; ``text == source[start:end]``."""

    text: str
    start: int
    end: int
    in_lexicon: bool


def char_class(ch: str) -> str:
    if ch.isspace():
        return CLASS_SPACE
    if ch.isascii():
        return CLASS_ASCII if ch.isalnum() else CLASS_SYMBOL
    category = unicodedata.category(ch)
    if category[0] in "PSZC":
        return CLASS_SYMBOL
    return CLASS_TEXT


def _runs(text: str) -> list[tuple[int, int, str]]:
    """Maximal same-class runs as (start, end, class) triples."""
    runs = []
    start = 0
    for i in range(1, len(text) + 1):
        if i == len(text) or char_class(text[i]) != char_class(text[start]):
            runs.append((start, i, char_class(text[start])))
            start = i
    return runs


def _unknown_weight(lexicon: Lexicon) -> Fraction:
    return Fraction(1, 2 * (lexicon.total_frequency + 1))


def _entry_weight(lexicon: Lexicon, surface: str) -> Fraction:
    entry = lexicon.entries[surface]
    return Fraction(entry.frequency, lexicon.total_frequency)


def _piece_weight(lexicon: Lexicon, piece: str) -> Fraction:
    if lexicon.lookup(piece) is not None:
        return _entry_weight(lexicon, piece)
    return _unknown_weight(lexicon)


def _run_edges(lexicon: Lexicon, text: str, run_start: int, run_end: int, cls: str) -> dict[tuple[int, int], Fraction]:
    """Lattice edges for one run, keyed by (start, end) span.

    A span gets its lexicon weight when the surface is an entry, which always
    dominates the unknown floor, so collisions resolve by taking the max.
    """
    floor = _unknown_weight(lexicon)
    edges: dict[tuple[int, int], Fraction] = {}
    if cls == CLASS_TEXT:
        for i in range(run_start, run_end):
            edges[(i, i + 1)] = floor
    else:
        for i in range(run_start, run_end):
            edges[(i, run_end)] = floor
    if lexicon.max_source_len > 0:
        for i in range(run_start, run_end):
            for end, entry in lexicon.prefix_candidates(text, i):
                if end > run_end:
                    break
                weight = Fraction(entry.frequency, lexicon.total_frequency)
                span = (i, end)
                if span not in edges or weight > edges[span]:
                    edges[span] = weight
    return edges


def _segment_run(lexicon: Lexicon, text: str, run_start: int, run_end: int, cls: str) -> list[tuple[int, int]]:
    """Best partition of one run, as (start, end) spans.

    Backward DP keeps, per position, the maximal (product, -count) pair;
    forward reconstruction then picks the largest feasible end at every
    step, which realizes the leftmost-longest tie-break.
    """
    edges = _run_edges(lexicon, text, run_start, run_end, cls)
    by_start: dict[int, list[tuple[int, Fraction]]] = {}
    for (i, j), weight in edges.items():
        by_start.setdefault(i, []).append((j, weight))

    # best[i]: (product, -count) achievable over [i, run_end)
    best: dict[int, tuple[Fraction, int]] = {run_end: (Fraction(1), 0)}
    for i in range(run_end - 1, run_start - 1, -1):
        candidates = []
        for j, weight in by_start.get(i, ()):
            product, neg_count = best[j]
            candidates.append((weight * product, neg_count - 1))
        best[i] = max(candidates)

    spans = []
    i = run_start
    while i < run_end:
        target = best[i]
        chosen = max(
            j for j, weight in by_start[i]
            if (weight * best[j][0], best[j][1] - 1) == target
        )
        spans.append((i, chosen))
        i = chosen
    return spans


def segment(lexicon: Lexicon, text: str) -> list[Segment]:
    """Partition ``text`` into the highest-scoring sequence of segments.

    The result is lossless: concatenating segment texts reproduces the
    input exactly. Pure function of its arguments.
    """
    segments = []
    for run_start, run_end, cls in _runs(text):
        for start, end in _segment_run(lexicon, text, run_start, run_end, cls):
            piece = text[start:end]
            segments.append(Segment(piece, start, end, lexicon.lookup(piece) is not None))
    return segments


def _legal_extensions(lexicon: Lexicon, text: str, pos: int, runs: list[tuple[int, int, str]]) -> list[int]:
    """End positions of all legal pieces starting at ``pos``."""
    run_start, run_end, cls = next(r for r in runs if r[0] <= pos < r[1])
    ends = set()
    if cls == CLASS_TEXT:
        ends.add(pos + 1)
    else:
        ends.add(run_end)
    for end, _entry in lexicon.prefix_candidates(text, pos):
        if end <= run_end:
            ends.add(end)
    return sorted(ends)


def enumerate_partitions(lexicon: Lexicon, text: str, cap: int = ORACLE_DEFAULT_CAP) -> list[tuple[list[str], float]]:
    """Every legal partition of ``text`` with its log-weight score.

    Brute-force oracle for :func:`segment`; exponential, so inputs longer
    than ``cap`` characters are rejected.
    """
    if len(text) > cap:
        raise ValueError(f"text of length {len(text)} exceeds oracle cap {cap}")
    runs = _runs(text)
    results: list[tuple[list[str], float]] = []

    def recurse(pos: int, pieces: list[str]):
        if pos == len(text):
            score = math.fsum(math.log(_piece_weight(lexicon, p)) for p in pieces)
            results.append((list(pieces), score))
            return
        for end in _legal_extensions(lexicon, text, pos, runs):
            pieces.append(text[pos:end])
            recurse(end, pieces)
            pieces.pop()

    recurse(0, [])
    return results


def partition_sort_key(lexicon: Lexicon, pieces: list[str]) -> tuple[Fraction, int, tuple[int, ...]]:
    """Exact ranking key: higher is better under ``max``.

    Orders by weight product, then fewer pieces, then leftmost-longest
    (lexicographically greatest end positions).
    """
    product = Fraction(1)
    for piece in pieces:
        product *= _piece_weight(lexicon, piece)
    ends = []
    pos = 0
    for piece in pieces:
        pos += len(piece)
        ends.append(pos)
    return (product, -len(pieces), tuple(ends))
