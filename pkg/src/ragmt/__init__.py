"""Dictionary and retrieval-augmented Mandarin-to-Hakka translation pipelines."""

from .evaluation import EvalConfig, corpus_bleu, render_report, sentence_bleu
from .lexicon import Lexicon, LexiconEntry, load_lexicon, load_lexicon_path
from .llm import ChatRequest, HttpBackend, MockBackend, ReplayBackend, ResponseCache, cache_key
from .pipelines import PipelineConfig, PipelineContext, run_experiment, run_pipeline
from .retrieval import dictionary_translate, glossary_block, retrieve
from .segmenter import Segment, enumerate_partitions, segment

__version__ = "0.1.0"

__all__ = [
    "ChatRequest",
    "EvalConfig",
    "HttpBackend",
    "Lexicon",
    "LexiconEntry",
    "MockBackend",
    "PipelineConfig",
    "PipelineContext",
    "ReplayBackend",
    "ResponseCache",
    "Segment",
    "cache_key",
    "corpus_bleu",
    "dictionary_translate",
    "enumerate_partitions",
    "glossary_block",
    "load_lexicon",
    "load_lexicon_path",
    "render_report",
    "retrieve",
    "run_experiment",
    "run_pipeline",
    "segment",
    "sentence_bleu",
]
