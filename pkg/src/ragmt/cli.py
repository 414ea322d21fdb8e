"""The ``ragmt`` command line.

Subcommands: ``lexicon validate``, ``segment``, ``prompt show``,
``translate``, ``experiment run``, ``score``, ``report``.

Exit status contract: 0 success, 1 usage or config error, 2 missing input
file, 3 partial runtime failure.
"""

import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__, llm
from .config import ConfigError, RunConfig, load_corpus, load_run_config
from .evaluation import EvalConfig, EvaluationReport, corpus_bleu, render_report
from .lexicon import LexiconFormatError, load_lexicon_path
from .pipelines import (
    VARIANT_DICTIONARY,
    PipelineContext,
    PipelineError,
    run_experiment,
    run_pipeline,
)
from .prompting import TEMPLATE_IDS, get_template
from .segmenter import segment

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISSING_INPUT = 2
EXIT_PARTIAL_FAILURE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="experiment config JSON file")
    parser.add_argument("--parallelism", type=int, help="max concurrent sentences")
    parser.add_argument("--quiet", action="store_true", help="suppress warnings on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ragmt",
        description="Dictionary and retrieval-augmented Mandarin-to-Hakka translation pipelines.",
        epilog="exit codes: 0 success, 1 usage/config error, 2 missing input, 3 partial runtime failure",
    )
    parser.add_argument("--version", action="version", version=f"ragmt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    lexicon = sub.add_parser("lexicon", help="knowledge-base utilities")
    lexicon_sub = lexicon.add_subparsers(dest="lexicon_command", required=True)
    validate = lexicon_sub.add_parser("validate", help="check a lexicon TSV file")
    validate.add_argument("path")
    _common_options(validate)

    seg = sub.add_parser("segment", help="segment stdin lines with a lexicon")
    seg.add_argument("--lexicon", required=True, help="lexicon TSV file")
    seg.add_argument("--show-spans", action="store_true", help="append [start:end] to each piece")
    _common_options(seg)

    prompt = sub.add_parser("prompt", help="prompt template utilities")
    prompt_sub = prompt.add_subparsers(dest="prompt_command", required=True)
    show = prompt_sub.add_parser("show", help="print a template's system text")
    show.add_argument("id", choices=TEMPLATE_IDS)
    _common_options(show)

    translate = sub.add_parser("translate", help="translate stdin lines with one pipeline")
    translate.add_argument("label", help="pipeline label from the config")
    translate.add_argument("--trace", help="write a JSON trace per line to this file")
    _common_options(translate)

    experiment = sub.add_parser("experiment", help="experiment execution")
    experiment_sub = experiment.add_subparsers(dest="experiment_command", required=True)
    run = experiment_sub.add_parser("run", help="run every configured pipeline over the corpus")
    run.add_argument("config_path", nargs="?", help="experiment config JSON (or use --config)")
    run.add_argument("--out", help="output directory (default: runs/<config stem>)")
    _common_options(run)

    score = sub.add_parser("score", help="BLEU-score a hypothesis file against a corpus")
    score.add_argument("--corpus", required=True, help="source<TAB>reference TSV")
    score.add_argument("--hyp", required=True, help="hypothesis file, one per line")
    score.add_argument("--mode", choices=("character", "whitespace"), default="character")
    score.add_argument("--max-order", type=int, default=4)
    score.add_argument("--json", action="store_true", help="emit the machine-readable report")
    _common_options(score)

    report = sub.add_parser("report", help="re-render the comparison table from a manifest")
    report.add_argument("manifest", help="manifest.json from an experiment run")
    _common_options(report)

    return parser


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_").lower()


def _flatten(text: str) -> str:
    """Keep hypothesis files one-per-line; character BLEU ignores whitespace."""
    return text.replace("\r\n", " ").replace("\n", " ").replace("\r", " ")


def _say(quiet: bool, message: str):
    if not quiet:
        print(message, file=sys.stderr)


def cmd_lexicon_validate(args) -> int:
    lexicon = load_lexicon_path(args.path)
    for warning in lexicon.warnings:
        _say(args.quiet, f"warning: {warning}")
    print(f"{len(lexicon)} entries")
    return EXIT_OK


def cmd_segment(args) -> int:
    lexicon = load_lexicon_path(args.lexicon)
    for warning in lexicon.warnings:
        _say(args.quiet, f"warning: {warning}")
    for line in sys.stdin:
        text = line.rstrip("\n")
        pieces = segment(lexicon, text)
        if args.show_spans:
            rendered = "/".join(f"{s.text}[{s.start}:{s.end}]" for s in pieces)
        else:
            rendered = "/".join(s.text for s in pieces)
        print(rendered)
    return EXIT_OK


def cmd_prompt_show(args) -> int:
    print(get_template(args.id).system_text)
    return EXIT_OK


def _build_context(run_config: RunConfig, needs_backend: bool) -> PipelineContext:
    lexicon = load_lexicon_path(run_config.lexicon_path)
    if not needs_backend:
        return PipelineContext(lexicon=lexicon)
    return PipelineContext(
        lexicon=lexicon,
        backend=run_config.build_backend(),
        cache=llm.ResponseCache(run_config.cache_dir),
    )


def cmd_translate(args) -> int:
    if not args.config:
        raise UsageError("translate requires --config")
    run_config = load_run_config(args.config)
    by_label = {p.label: p for p in run_config.pipelines}
    if args.label not in by_label:
        raise UsageError(f"unknown pipeline label {args.label!r}; configured: {', '.join(by_label)}")
    pipeline = by_label[args.label]
    ctx = _build_context(run_config, needs_backend=pipeline.variant != VARIANT_DICTIONARY)

    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    failed = False
    try:
        for line in sys.stdin:
            source = line.rstrip("\n")
            try:
                record = run_pipeline(pipeline, source, ctx)
            except PipelineError as exc:
                failed = True
                _say(args.quiet, f"error: {exc}")
                print("<<ERROR>>")
                if trace_fh:
                    trace_fh.write(json.dumps({"source": source, "error": str(exc)}, ensure_ascii=False) + "\n")
                continue
            print(_flatten(record.hypothesis))
            if trace_fh:
                trace_fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    finally:
        if trace_fh:
            trace_fh.close()
    return EXIT_PARTIAL_FAILURE if failed else EXIT_OK


def cmd_experiment_run(args) -> int:
    config_path = args.config_path or args.config
    if not config_path:
        raise UsageError("experiment run requires a config path")
    run_config = load_run_config(config_path)
    for required in (run_config.lexicon_path, run_config.corpus_path):
        if not Path(required).exists():
            raise FileNotFoundError(f"missing input file: {required}")
    corpus = load_corpus(run_config.corpus_path)
    if not corpus:
        raise ConfigError(f"{run_config.corpus_path}: corpus is empty")

    out_dir = Path(args.out) if args.out else Path("runs") / Path(config_path).stem
    out_dir.mkdir(parents=True, exist_ok=True)
    parallelism = args.parallelism or run_config.parallelism
    needs_backend = any(p.variant != VARIANT_DICTIONARY for p in run_config.pipelines)

    manifest = {
        "config_path": str(config_path),
        "config": run_config.snapshot,
        "tool_version": __version__,
        "started_at": llm.rfc3339_now(),
        "finished_at": None,
        "workflows": {p.label: p.workflow for p in run_config.pipelines},
        "scores": {},
        "hypothesis_files": {},
        "failures": [],
        "error": None,
    }
    manifest_path = out_dir / "manifest.json"

    def write_manifest():
        manifest_path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")

    try:
        ctx = _build_context(run_config, needs_backend)
        result = run_experiment(run_config.pipelines, corpus, ctx, parallelism=parallelism)

        eval_config = EvalConfig()
        for pipeline in run_config.pipelines:
            records = result.per_config[pipeline.label]
            slug = _slug(pipeline.label)
            hyp_path = out_dir / f"{slug}.hyp.txt"
            hyp_path.write_text(
                "".join(_flatten(r.hypothesis) + "\n" for r in records), encoding="utf-8"
            )
            trace_path = out_dir / f"{slug}.trace.jsonl"
            trace_path.write_text(
                "".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records),
                encoding="utf-8",
            )
            pairs = [(r.hypothesis, ref) for r, (_, ref) in zip(records, corpus)]
            manifest["scores"][pipeline.label] = corpus_bleu(pairs, eval_config).score
            manifest["hypothesis_files"][pipeline.label] = hyp_path.name
            for index, record in enumerate(records):
                for diag in record.diagnostics:
                    manifest["failures"].append(f"{pipeline.label}[{index}]: {diag}")

        table = render_report(manifest["scores"], manifest["workflows"])
        (out_dir / "report.txt").write_text(table + "\n", encoding="utf-8")
        manifest["finished_at"] = llm.rfc3339_now()
        write_manifest()
        print(table)
        _say(args.quiet, f"wrote {manifest_path}")
        return EXIT_OK
    except Exception as exc:
        manifest["finished_at"] = llm.rfc3339_now()
        manifest["error"] = str(exc)
        write_manifest()
        _say(args.quiet, f"error: {exc}")
        return EXIT_PARTIAL_FAILURE


def cmd_score(args) -> int:
    corpus = load_corpus(args.corpus)
    hyp_path = Path(args.hyp)
    if not hyp_path.exists():
        raise FileNotFoundError(f"missing input file: {hyp_path}")
    hypotheses = hyp_path.read_text(encoding="utf-8").splitlines()
    if len(hypotheses) != len(corpus):
        raise ConfigError(
            f"{hyp_path}: {len(hypotheses)} hypotheses but corpus has {len(corpus)} sentences"
        )
    config = EvalConfig(max_order=args.max_order, tokenization=args.mode)
    pairs = [(hyp, ref) for hyp, (_, ref) in zip(hypotheses, corpus)]
    report = EvaluationReport()
    report.add(hyp_path.stem, pairs, config)
    if args.json:
        print(report.to_json())
    else:
        print(render_report(report.corpus_bleu))
    return EXIT_OK


def cmd_report(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    print(render_report(manifest.get("scores", {}), manifest.get("workflows", {})))
    return EXIT_OK


_HANDLERS = {
    ("lexicon", "validate"): cmd_lexicon_validate,
    ("segment", None): cmd_segment,
    ("prompt", "show"): cmd_prompt_show,
    ("translate", None): cmd_translate,
    ("experiment", "run"): cmd_experiment_run,
    ("score", None): cmd_score,
    ("report", None): cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        subcommand = getattr(args, f"{args.command}_command", None)
        handler = _HANDLERS[(args.command, subcommand)]
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ConfigError, LexiconFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
