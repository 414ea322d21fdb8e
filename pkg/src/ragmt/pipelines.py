"""The seven translation pipeline variants and the experiment runner.

Five workflow shapes cover all seven configurations: the two baselines and
the two refinement setups differ only in ``model_id``, and the two
retrieval-augmented setups differ in template and ``model_id``. Every stage
appends its input and output to the record's trace, and LLM stages also
record their cache key, so any hypothesis can be audited after the fact.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import llm
from .lexicon import Lexicon
from .prompting import get_template, render
from .retrieval import dictionary_translate, glossary_block, retrieve
from .segmenter import segment

VARIANT_BASELINE = "Baseline"
VARIANT_DICTIONARY = "Dictionary"
VARIANT_RAG_GENERATE = "RagGenerate"
VARIANT_DICT_THEN_REFINE = "DictThenRefine"
VARIANT_INTEGRATED_RAG = "IntegratedRag"

VARIANTS = (
    VARIANT_BASELINE,
    VARIANT_DICTIONARY,
    VARIANT_RAG_GENERATE,
    VARIANT_DICT_THEN_REFINE,
    VARIANT_INTEGRATED_RAG,
)

_LLM_VARIANTS = frozenset(VARIANTS) - {VARIANT_DICTIONARY}


class PipelineError(RuntimeError):
    """A sentence failed; carries the stage and pipeline label that failed."""

    def __init__(self, message: str, stage: str, label: str):
        super().__init__(message)
        self.stage = stage
        self.label = label


@dataclass(frozen=True)
class PipelineConfig:
    label: str
    variant: str
    model_id: Optional[str] = None
    workflow: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown pipeline variant: {self.variant!r}")
        if self.variant == VARIANT_DICTIONARY:
            if self.model_id is not None:
                raise ValueError(f"{self.label}: the Dictionary variant takes no model_id")
        elif not self.model_id:
            raise ValueError(f"{self.label}: variant {self.variant} requires a model_id")


@dataclass(frozen=True)
class StageTrace:
    name: str
    input: str
    output: str
    cache_key: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "input": self.input, "output": self.output}
        if self.cache_key is not None:
            out["cache_key"] = self.cache_key
        return out


@dataclass
class TranslationRecord:
    source: str
    hypothesis: str
    stages: list[StageTrace]
    config_label: str
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "hypothesis": self.hypothesis,
            "config_label": self.config_label,
            "diagnostics": list(self.diagnostics),
            "stages": [s.to_dict() for s in self.stages],
        }


@dataclass
class ExperimentResult:
    per_config: dict[str, list[TranslationRecord]]
    corpus: list[tuple[str, str]]


@dataclass
class PipelineContext:
    lexicon: Lexicon
    backend: Optional[object] = None
    cache: Optional[llm.ResponseCache] = None


def _llm_stage(config: PipelineConfig, ctx: PipelineContext, rendered, template) -> tuple[str, StageTrace]:
    request = llm.ChatRequest(
        model_id=config.model_id,
        system_text=rendered.system_text,
        user_text=rendered.user_text,
        max_output_chars=template.output_char_limit,
    )
    key = llm.cache_key(request)
    try:
        response = llm.send_cached(ctx.backend, ctx.cache, request)
    except llm.BackendError as exc:
        raise PipelineError(str(exc), stage="send", label=config.label) from exc
    return response.text, StageTrace("send", rendered.user_text, response.text, cache_key=key)


def run_pipeline(config: PipelineConfig, source: str, ctx: PipelineContext) -> TranslationRecord:
    """Translate one sentence through the configured pipeline, fully traced."""
    if config.variant in _LLM_VARIANTS and (ctx.backend is None or ctx.cache is None):
        raise ValueError(f"{config.label}: variant {config.variant} needs a backend and cache")

    stages: list[StageTrace] = []
    diagnostics: list[str] = []
    output_limit: Optional[int] = None

    if config.variant == VARIANT_DICTIONARY:
        hypothesis = dictionary_translate(ctx.lexicon, source)
        stages.append(StageTrace("dictionary", source, hypothesis))

    elif config.variant == VARIANT_BASELINE:
        template = get_template("baseline_translate")
        output_limit = template.output_char_limit
        rendered = render(template, source)
        stages.append(StageTrace("render", source, rendered.user_text))
        hypothesis, trace = _llm_stage(config, ctx, rendered, template)
        stages.append(trace)

    elif config.variant in (VARIANT_RAG_GENERATE, VARIANT_INTEGRATED_RAG):
        template_id = "rag_translate_a" if config.variant == VARIANT_RAG_GENERATE else "rag_translate_b"
        segments = segment(ctx.lexicon, source)
        joined = "/".join(s.text for s in segments)
        stages.append(StageTrace("segment", source, joined))
        terms = retrieve(ctx.lexicon, segments)
        terms_text = "\n".join(f"{t.source_text} => {t.target_text}" for t in terms)
        stages.append(StageTrace("retrieve", joined, terms_text))
        glossary = glossary_block(terms)
        stages.append(StageTrace("glossary", terms_text, glossary))
        template = get_template(template_id)
        output_limit = template.output_char_limit
        rendered = render(template, source, glossary)
        stages.append(StageTrace("render", source, rendered.user_text))
        hypothesis, trace = _llm_stage(config, ctx, rendered, template)
        stages.append(trace)

    elif config.variant == VARIANT_DICT_THEN_REFINE:
        intermediate = dictionary_translate(ctx.lexicon, source)
        stages.append(StageTrace("dictionary", source, intermediate))
        template = get_template("refine")
        output_limit = template.output_char_limit
        rendered = render(template, intermediate)
        stages.append(StageTrace("render", intermediate, rendered.user_text))
        hypothesis, trace = _llm_stage(config, ctx, rendered, template)
        stages.append(trace)

    else:  # unreachable: PipelineConfig validates the variant
        raise AssertionError(config.variant)

    if output_limit is not None and len(hypothesis) > output_limit:
        diagnostics.append(
            f"output length {len(hypothesis)} exceeds the {output_limit}-character limit"
        )

    return TranslationRecord(
        source=source,
        hypothesis=hypothesis,
        stages=stages,
        config_label=config.label,
        diagnostics=diagnostics,
    )


def _failure_record(config: PipelineConfig, source: str, error: PipelineError) -> TranslationRecord:
    return TranslationRecord(
        source=source,
        hypothesis="",
        stages=[StageTrace(error.stage, source, "")],
        config_label=config.label,
        diagnostics=[f"error at stage {error.stage}: {error}"],
    )


def run_experiment(
    configs: list[PipelineConfig],
    corpus: list[tuple[str, str]],
    ctx: PipelineContext,
    parallelism: int = 4,
) -> ExperimentResult:
    """Run every pipeline over every sentence.

    Sentence-level work may run concurrently, but records are assembled by
    corpus index, so the output is identical at any parallelism. Failed
    sentences become empty-hypothesis records instead of aborting the run.
    """
    if not corpus:
        raise ValueError("empty corpus")
    labels = [c.label for c in configs]
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise ValueError(f"duplicate pipeline labels: {', '.join(dupes)}")

    def work(config: PipelineConfig, index: int) -> TranslationRecord:
        source = corpus[index][0]
        try:
            return run_pipeline(config, source, ctx)
        except PipelineError as exc:
            return _failure_record(config, source, exc)

    jobs = [(config, index) for config in configs for index in range(len(corpus))]
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        records = list(pool.map(lambda job: work(*job), jobs))

    per_config: dict[str, list[TranslationRecord]] = {}
    cursor = 0
    for config in configs:
        per_config[config.label] = records[cursor : cursor + len(corpus)]
        cursor += len(corpus)
    return ExperimentResult(per_config=per_config, corpus=list(corpus))
