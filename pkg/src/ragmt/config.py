"""Declarative experiment configuration.

One JSON document drives a whole run: lexicon, corpus, cache directory,
backend, parallelism, and the pipeline roster. Relative paths resolve
against the config file's directory; ``RAGMT_CACHE_DIR`` overrides the
cache directory when set.
"""

import json
import os
from dataclasses import dataclass
from pathlib import Path

from typing import Optional

from .llm import HttpBackend, MockBackend, ReplayBackend
from .pipelines import PipelineConfig
from .retrieval import DictEndpoint


class ConfigError(ValueError):
    pass


BACKEND_KINDS = ("http", "mock", "replay")


@dataclass
class RunConfig:
    lexicon_path: Path
    corpus_path: Path
    cache_dir: Path
    backend_spec: dict
    parallelism: int
    pipelines: list[PipelineConfig]
    snapshot: dict
    dictionary_endpoint: Optional[DictEndpoint] = None

    def build_backend(self):
        kind = self.backend_spec["kind"]
        if kind == "mock":
            return MockBackend(self.backend_spec.get("rules", {}))
        if kind == "replay":
            return ReplayBackend()
        return HttpBackend(
            base_url=self.backend_spec["base_url"],
            path=self.backend_spec.get("path", "/v1/chat/completions"),
            auth_header=self.backend_spec.get("auth_header", "Authorization"),
            timeout=float(self.backend_spec.get("timeout", 60.0)),
        )


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


def load_run_config(path) -> RunConfig:
    """Parse and validate an experiment config file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict), f"{path}: top level must be an object")

    for key in ("lexicon_path", "corpus_path", "cache_dir", "backend", "pipelines"):
        _require(key in raw, f"{path}: missing required key {key!r}")

    backend = raw["backend"]
    _require(isinstance(backend, dict) and "kind" in backend, f"{path}: backend must be an object with a 'kind'")
    _require(
        backend["kind"] in BACKEND_KINDS,
        f"{path}: backend kind must be one of {', '.join(BACKEND_KINDS)}, got {backend['kind']!r}",
    )
    if backend["kind"] == "http":
        _require("base_url" in backend, f"{path}: http backend requires base_url")
    if backend["kind"] == "mock":
        rules = backend.get("rules", {})
        _require(
            isinstance(rules, dict) and all(isinstance(k, str) and isinstance(v, str) for k, v in rules.items()),
            f"{path}: mock rules must map strings to strings",
        )

    parallelism = raw.get("parallelism", 4)
    _require(isinstance(parallelism, int) and parallelism >= 1, f"{path}: parallelism must be a positive integer")

    _require(isinstance(raw["pipelines"], list) and raw["pipelines"], f"{path}: pipelines must be a non-empty array")
    pipelines = []
    for i, spec in enumerate(raw["pipelines"]):
        _require(isinstance(spec, dict), f"{path}: pipelines[{i}] must be an object")
        _require("label" in spec and "variant" in spec, f"{path}: pipelines[{i}] needs label and variant")
        try:
            pipelines.append(
                PipelineConfig(
                    label=spec["label"],
                    variant=spec["variant"],
                    model_id=spec.get("model_id"),
                    workflow=spec.get("workflow", ""),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: pipelines[{i}]: {exc}") from exc
    labels = [p.label for p in pipelines]
    _require(len(set(labels)) == len(labels), f"{path}: pipeline labels must be unique")

    endpoint = None
    if "dictionary_endpoint" in raw:
        spec = raw["dictionary_endpoint"]
        _require(
            isinstance(spec, dict) and isinstance(spec.get("base_url"), str),
            f"{path}: dictionary_endpoint requires a base_url string",
        )
        endpoint = DictEndpoint(base_url=spec["base_url"], timeout=float(spec.get("timeout", 30.0)))

    base = path.parent
    cache_dir = Path(os.environ.get("RAGMT_CACHE_DIR") or (base / raw["cache_dir"]))
    return RunConfig(
        lexicon_path=base / raw["lexicon_path"],
        corpus_path=base / raw["corpus_path"],
        cache_dir=cache_dir,
        backend_spec=backend,
        parallelism=parallelism,
        pipelines=pipelines,
        snapshot=raw,
        dictionary_endpoint=endpoint,
    )


def load_corpus(path) -> list[tuple[str, str]]:
    """Read a ``source<TAB>reference`` TSV corpus; blank lines are skipped."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n").rstrip("\r")
            if not stripped.strip():
                continue
            columns = stripped.split("\t")
            if len(columns) != 2:
                raise ConfigError(f"{path}: line {line_no}: expected source<TAB>reference, got {len(columns)} columns")
            pairs.append((columns[0], columns[1]))
    return pairs
