"""Bilingual knowledge base: source surface forms mapped to target surface forms.

The on-disk format is UTF-8 TSV, one entry per line::

    source<TAB>target<TAB>frequency

The frequency column is optional (defaults to 1). Lines starting with ``#``
and blank lines are skipped. Duplicate sources are merged keeping the higher
frequency (ties: last row wins), with one warning recorded per merge.

All indices and lengths are counted in Unicode scalar values, never bytes.
"""

from dataclasses import dataclass
from typing import IO, Iterable, Optional


class LexiconFormatError(ValueError):
    """A lexicon file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LexiconEntry:
    """One knowledge-base row: a source surface form and its target."""

    source_surface: str
    target_surface: str
    frequency: int = 1
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.source_surface:
            raise ValueError("empty source surface")
        if not self.target_surface:
            raise ValueError("empty target surface")
        for name, text in (("source", self.source_surface), ("target", self.target_surface)):
            if "\t" in text or "\n" in text or "\r" in text:
                raise ValueError(f"{name} surface contains tab or newline")
        if self.frequency < 0:
            raise ValueError(f"negative frequency {self.frequency}")
        if self.frequency == 0:
            object.__setattr__(self, "frequency", 1)


@dataclass(frozen=True)
class Lexicon:
    """Immutable index over lexicon entries, keyed by exact source surface.

    Safe for unrestricted concurrent reads once constructed.
    """

    entries: dict[str, LexiconEntry]
    max_source_len: int
    total_frequency: int
    warnings: tuple[str, ...] = ()

    @classmethod
    def from_entries(cls, entries: Iterable[LexiconEntry], warnings: Iterable[str] = ()) -> "Lexicon":
        indexed = {e.source_surface: e for e in entries}
        return cls(
            entries=indexed,
            max_source_len=max((len(s) for s in indexed), default=0),
            total_frequency=sum(e.frequency for e in indexed.values()),
            warnings=tuple(warnings),
        )

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, surface: str) -> Optional[LexiconEntry]:
        """Return the entry whose source equals ``surface`` exactly, or None."""
        if not surface:
            return None
        return self.entries.get(surface)

    def prefix_candidates(self, text: str, start: int) -> list[tuple[int, LexiconEntry]]:
        """All entries matching ``text[start:end]``, ordered by increasing end.

        Only spans up to ``max_source_len`` characters are probed, so the
        result has at most ``max_source_len`` elements.
        """
        if not 0 <= start < len(text):
            raise IndexError(f"start {start} out of range for text of length {len(text)}")
        out = []
        limit = min(len(text), start + self.max_source_len)
        for end in range(start + 1, limit + 1):
            entry = self.entries.get(text[start:end])
            if entry is not None:
                out.append((end, entry))
        return out

    def same_entries(self, other: "Lexicon") -> bool:
        """Equality on entry set and frequencies, ignoring load warnings."""
        return self.entries == other.entries


def _parse_line(line: str, line_no: int) -> Optional[LexiconEntry]:
    body = line.rstrip("\r\n")
    if not body.strip() or body.lstrip().startswith("#"):
        return None
    # Split before stripping fields so empty columns stay detectable.
    columns = [c.strip() for c in body.split("\t")]
    if len(columns) not in (2, 3):
        raise LexiconFormatError(f"expected 2 or 3 tab-separated columns, got {len(columns)}", line_no)
    source, target = columns[0], columns[1]
    if not source:
        raise LexiconFormatError("empty source field", line_no)
    if not target:
        raise LexiconFormatError("empty target field", line_no)
    frequency = 1
    if len(columns) == 3 and columns[2]:
        try:
            frequency = int(columns[2])
        except ValueError:
            raise LexiconFormatError(f"frequency is not an integer: {columns[2]!r}", line_no) from None
        if frequency < 0:
            raise LexiconFormatError(f"negative frequency: {frequency}", line_no)
    return LexiconEntry(source, target, frequency)


def load_lexicon(stream: IO[str] | Iterable[str], format: str = "tsv") -> Lexicon:
    """Parse a lexicon from a character stream.

    Duplicate sources merge keeping the higher-frequency row (tie: last row
    wins); each merge records a warning on the returned Lexicon.
    """
    if format != "tsv":
        raise ValueError(f"unsupported lexicon format: {format!r}")
    entries: dict[str, LexiconEntry] = {}
    warnings: list[str] = []
    lines = enumerate(stream, start=1)
    while True:
        try:
            line_no, line = next(lines)
        except StopIteration:
            break
        except UnicodeDecodeError as exc:
            raise LexiconFormatError(f"undecodable bytes: {exc}") from exc
        entry = _parse_line(line, line_no)
        if entry is None:
            continue
        existing = entries.get(entry.source_surface)
        if existing is not None:
            winner = entry if entry.frequency >= existing.frequency else existing
            warnings.append(
                f"line {line_no}: duplicate source {entry.source_surface!r}; "
                f"keeping {winner.target_surface!r} (frequency {winner.frequency})"
            )
            entry = winner
        entries[entry.source_surface] = entry
    return Lexicon.from_entries(entries.values(), warnings)


def load_lexicon_path(path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh)


def dump_lexicon(lexicon: Lexicon, stream: IO[str]) -> None:
    """Serialize back to the TSV format, sorted by source surface."""
    for source in sorted(lexicon.entries):
        entry = lexicon.entries[source]
        stream.write(f"{entry.source_surface}\t{entry.target_surface}\t{entry.frequency}\n")
