"""Command-line entry point for batch use and scripting.

Four subcommands cover the pipeline: ``ingest`` (parse, validate, refine,
write canonical JSON), ``train`` (textify and fit the embedding model),
``match`` (crosswalk a source schema against a standard schema), ``eval``
(run the synthetic benchmark and print the accuracy report).

Exit codes: 0 success, 2 usage or configuration error, 3 data or model
error.  Diagnostics go to standard error; data goes to --out (default
stdout).  All randomness is controlled by explicit seed flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .crosswalk import Strategy, crosswalk_schema, results_to_csv, results_to_json
from .embedding import Hyperparams, load_model, save_model, train
from .evaluation import (
    PerturbationSpec,
    evaluate,
    format_report,
    generate_benchmark,
    report_to_json,
    synthetic_standard_schema,
)
from .ingest import IngestError, load_source_schema, load_standard_schema, refine_schema, schema_to_json
from .model import DEFAULT_THRESHOLD, StandardSchema, validate_schema
from .textify import textify_schema, write_corpus


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _write_out(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_refined(path: str, format: Optional[str] = None) -> StandardSchema:
    schema = load_standard_schema(path, format=format)
    return schema if schema.normalized else refine_schema(schema)


def cmd_ingest(args: argparse.Namespace) -> int:
    schema = load_standard_schema(args.std, format=args.format)
    refined = refine_schema(schema)
    violations = validate_schema(refined)
    if violations:
        for v in violations:
            _note(f"violation: {v}")
        return 3
    named = sum(1 for e in schema.entries if e.tokens)
    unnamed = len(schema.entries) - named
    duplicates = named - len(refined.entries)
    if unnamed:
        _note(f"{unnamed} unnamed entries removed")
    if duplicates:
        _note(f"{duplicates} duplicates removed")
    _write_out(schema_to_json(refined), args.out)
    return 0


def _hyper_from_args(args: argparse.Namespace) -> Hyperparams:
    return Hyperparams(
        dim=args.dim,
        epochs=args.epochs,
        learning_rate=args.lr,
        learning_rate_min=args.lr_min,
        negatives=args.negatives,
        min_count=args.min_count,
        seed=args.seed,
    )


def cmd_train(args: argparse.Namespace) -> int:
    try:
        hyper = _hyper_from_args(args)
    except ValueError as exc:
        _note(f"error: {exc}")
        return 2
    schema = _load_refined(args.std, args.format)
    corpus = textify_schema(schema)
    if args.dump_corpus:
        write_corpus(corpus, args.dump_corpus)
    model = train(corpus, hyper)
    save_model(model, args.model_out)
    print(f"final epoch loss {model.epoch_losses[-1]:.6f}")
    return 0


def _strategy_from_args(args: argparse.Namespace) -> Strategy:
    # Qualification is strict (score > threshold), so any flag above 100
    # behaves exactly like 100: nothing qualifies.  Clamp instead of erroring.
    threshold = min(100, max(0, args.threshold))
    fields = frozenset(f.strip() for f in args.meta_fields.split(",") if f.strip())
    return Strategy(
        mode=args.mode,
        threshold=threshold,
        k=args.k,
        use_meta_fields=fields,
        strict=getattr(args, "strict", False),
    )


def cmd_match(args: argparse.Namespace) -> int:
    if args.mode in ("embedding", "hybrid") and not args.model:
        _note(f"error: --mode {args.mode} requires --model")
        return 2
    try:
        strategy = _strategy_from_args(args)
    except ValueError as exc:
        _note(f"error: {exc}")
        return 2
    source = load_source_schema(args.src)
    schema = _load_refined(args.std)
    model = load_model(args.model) if args.model else None
    results = crosswalk_schema(source, schema, model=model, strategy=strategy)
    if args.out_format == "json":
        text = results_to_json(results, schema)
    else:
        text = results_to_csv(results, schema)
    _write_out(text, args.out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        spec = PerturbationSpec(
            typo_rate=args.typo_rate,
            abbreviation_rate=args.abbr_rate,
            reorder_rate=args.reorder_rate,
            seed=args.bench_seed,
        )
        strategy = _strategy_from_args(args)
    except ValueError as exc:
        _note(f"error: {exc}")
        return 2
    if args.std:
        base = _load_refined(args.std)
    else:
        base = synthetic_standard_schema(args.entries, seed=args.bench_seed)
    sources, truth = generate_benchmark(base, spec, n_sources=args.sources, columns_per_source=args.columns)
    model = None
    if args.mode in ("embedding", "hybrid"):
        hyper = Hyperparams(
            dim=args.dim,
            epochs=args.epochs,
            learning_rate=args.lr,
            negatives=args.negatives,
            seed=args.train_seed,
        )
        model = train(textify_schema(base), hyper)
    predictions = [
        result
        for source in sources
        for result in crosswalk_schema(source, base, model=model, strategy=strategy)
    ]
    report = evaluate(predictions, truth, base)
    sys.stdout.write(report_to_json(report) if args.json else format_report(report))
    return 0


def _add_strategy_flags(p: argparse.ArgumentParser, default_mode: str) -> None:
    p.add_argument("--mode", choices=("levenshtein", "embedding", "hybrid"), default=default_mode)
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--meta-fields", default="", help="comma-separated descriptive fields to fold into matching")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metaharmon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and refine a standard schema, write canonical JSON")
    p.add_argument("std", help="standard schema file (CSV or JSON)")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the token embedding model on a standard schema")
    p.add_argument("std")
    p.add_argument("model_out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--lr-min", type=float, default=0.0001)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-corpus", help="also write the textified corpus, one sentence per line")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("match", help="crosswalk a source schema against a standard schema")
    p.add_argument("src")
    p.add_argument("std")
    p.add_argument("--model", help="embedding model file (required for embedding/hybrid modes)")
    _add_strategy_flags(p, default_mode="levenshtein")
    p.add_argument("--strict", action="store_true", help="report below-threshold columns as unmatched")
    p.add_argument("--format", dest="out_format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval", help="run the synthetic benchmark and print the accuracy report")
    p.add_argument("--std", help="benchmark base schema; default is a generated synthetic schema")
    p.add_argument("--entries", type=int, default=300, help="size of the generated base schema")
    p.add_argument("--sources", type=int, default=5)
    p.add_argument("--columns", type=int, default=100, help="columns sampled per synthetic source")
    p.add_argument("--bench-seed", type=int, default=0)
    p.add_argument("--typo-rate", type=float, default=0.3)
    p.add_argument("--abbr-rate", type=float, default=0.2)
    p.add_argument("--reorder-rate", type=float, default=0.2)
    _add_strategy_flags(p, default_mode="hybrid")
    # Benchmark-scale corpora want a wider, shorter schedule than the
    # training defaults; see the embedding module notes on frequency skew.
    p.add_argument("--dim", type=int, default=192)
    p.add_argument("--epochs", type=int, default=70)
    p.add_argument("--lr", type=float, default=0.0075)
    p.add_argument("--negatives", type=int, default=2)
    p.add_argument("--train-seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="emit the report as JSON instead of a table")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IngestError as exc:
        _note(f"error: {exc}")
        return 2
    except OSError as exc:
        _note(f"error: {exc}")
        return 2
    except (ValueError, KeyError) as exc:
        _note(f"error: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
