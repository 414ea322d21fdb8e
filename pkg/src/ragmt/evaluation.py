"""Corpus and sentence BLEU, built from first principles.

Character-level tokenization is the default: Han-script hypotheses and
references have no whitespace word boundaries, and counting characters keeps
the metric independent of the segmenter. Corpus scores use uniform n-gram
weights up to order 4 with no smoothing (any zero corpus precision gives 0);
sentence scores optionally apply add-one smoothing on the numerator for
orders >= 2.

Scores live in [0, 1]; the report table prints them as 0.xx.
"""

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class EvalConfig:
    max_order: int = 4
    tokenization: str = "character"
    sentence_smoothing: bool = True

    def __post_init__(self):
        if not 1 <= self.max_order <= 9:
            raise ValueError(f"max_order {self.max_order} outside [1, 9]")
        if self.tokenization not in ("character", "whitespace"):
            raise ValueError(f"unknown tokenization mode: {self.tokenization!r}")


def eval_tokenize(text: str, mode: str = "character") -> list[str]:
    """Character mode: one token per Unicode scalar, whitespace dropped.

    Whitespace mode: split on Unicode whitespace runs.
    """
    if mode == "character":
        return [ch for ch in text if not ch.isspace()]
    if mode == "whitespace":
        return text.split()
    raise ValueError(f"unknown tokenization mode: {mode!r}")


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(
    candidates: list[list[str]], references: list[list[str]], n: int
) -> tuple[int, int]:
    """Corpus-summed clipped n-gram matches and candidate n-gram totals.

    Candidate counts are clipped per sentence by the reference's counts.
    """
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates vs {len(references)} references")
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    clipped = 0
    total = 0
    for cand, ref in zip(candidates, references):
        cand_counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        for gram, count in cand_counts.items():
            clipped += min(count, ref_counts.get(gram, 0))
            total += count
    return clipped, total


def brevity_penalty(candidate_len: int, reference_len: int) -> float:
    if candidate_len >= reference_len:
        return 1.0
    if candidate_len == 0:
        return 0.0
    return math.exp(1.0 - reference_len / candidate_len)


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: list[float]
    brevity_penalty: float
    candidate_len: int
    reference_len: int


def corpus_bleu(pairs: list[tuple[str, str]], config: EvalConfig = EvalConfig()) -> BleuScore:
    """Geometric mean of clipped precisions times the brevity penalty.

    Any zero corpus-level precision zeroes the score; there is no corpus
    smoothing.
    """
    if not pairs:
        raise ValueError("empty corpus")
    candidates = [eval_tokenize(hyp, config.tokenization) for hyp, _ in pairs]
    references = [eval_tokenize(ref, config.tokenization) for _, ref in pairs]
    precisions = []
    for n in range(1, config.max_order + 1):
        clipped, total = modified_precision(candidates, references, n)
        precisions.append(clipped / total if total else 0.0)
    candidate_len = sum(len(c) for c in candidates)
    reference_len = sum(len(r) for r in references)
    bp = brevity_penalty(candidate_len, reference_len)
    if all(p > 0.0 for p in precisions):
        score = bp * math.exp(math.fsum(math.log(p) for p in precisions) / config.max_order)
    else:
        score = 0.0
    return BleuScore(score, precisions, bp, candidate_len, reference_len)


def sentence_bleu(hypothesis: str, reference: str, config: EvalConfig = EvalConfig()) -> float:
    """Single-pair BLEU with optional add-one smoothing for orders >= 2."""
    cand = eval_tokenize(hypothesis, config.tokenization)
    ref = eval_tokenize(reference, config.tokenization)
    precisions = []
    for n in range(1, config.max_order + 1):
        clipped, total = modified_precision([cand], [ref], n)
        if config.sentence_smoothing and n >= 2 and clipped == 0:
            clipped = 1
        precisions.append(clipped / max(total, 1))
    bp = brevity_penalty(len(cand), len(ref))
    if all(p > 0.0 for p in precisions):
        return bp * math.exp(math.fsum(math.log(p) for p in precisions) / config.max_order)
    return 0.0


@dataclass
class EvaluationReport:
    """Per-configuration scores plus the material behind them."""

    corpus_bleu: dict[str, float] = field(default_factory=dict)
    sentence_bleu: dict[str, list[float]] = field(default_factory=dict)
    ngram_precisions: dict[str, list[float]] = field(default_factory=dict)
    brevity_penalty: dict[str, float] = field(default_factory=dict)
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    workflows: dict[str, str] = field(default_factory=dict)

    def add(self, label: str, pairs: list[tuple[str, str]], config: EvalConfig, workflow: str = ""):
        result = corpus_bleu(pairs, config)
        self.corpus_bleu[label] = result.score
        self.sentence_bleu[label] = [sentence_bleu(h, r, config) for h, r in pairs]
        self.ngram_precisions[label] = result.precisions
        self.brevity_penalty[label] = result.brevity_penalty
        self.counts[label] = {
            "candidate_tokens": result.candidate_len,
            "reference_tokens": result.reference_len,
        }
        if workflow:
            self.workflows[label] = workflow

    def to_json(self) -> str:
        payload = {
            "corpus_bleu": self.corpus_bleu,
            "sentence_bleu": self.sentence_bleu,
            "ngram_precisions": self.ngram_precisions,
            "brevity_penalty": self.brevity_penalty,
            "counts": self.counts,
        }
        return json.dumps(payload, ensure_ascii=False, indent=2)


def render_report(scores: dict[str, float], workflows: Optional[dict[str, str]] = None) -> str:
    """Fixed-width comparison table, rows in the order of ``scores``."""
    workflows = workflows or {}
    headers = ("Models", "Workflow Design", "BLEU")
    rows = [(label, workflows.get(label, ""), f"{score:.2f}") for label, score in scores.items()]
    widths = [
        max(len(headers[col]), max((len(row[col]) for row in rows), default=0))
        for col in range(3)
    ]
    lines = [
        " | ".join(headers[col].ljust(widths[col]) for col in range(3)).rstrip(),
        "-+-".join("-" * widths[col] for col in range(3)),
    ]
    for row in rows:
        lines.append(" | ".join(row[col].ljust(widths[col]) for col in range(3)).rstrip())
    return "\n".join(lines)
