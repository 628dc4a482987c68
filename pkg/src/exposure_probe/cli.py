"""Command-line entry point.

Each subcommand is a thin wrapper over the core package; `run` wires all
stages into a cached run directory and `serve` starts the HTTP service.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .dataset import load_pairs, stratify, summarize_exposure
from .genmatch import outcome_rates
from .jsonl import write_records
from .pipeline import (
    RunConfig,
    StageError,
    build_portrait_file,
    load_categories,
    load_outcomes,
    match_files,
    merge_config,
    query_pairs_file,
    report_from_run_dir,
    run_pipeline,
    score_files,
    stratify_files,
)
from .refmodel import NGramModel, train
from .report import emit_exposure_table, emit_generation_rates

logger = logging.getLogger(__name__)


def _default_jobs() -> int:
    value = os.environ.get("EXPOSURE_PROBE_JOBS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exposure-probe",
        description="Exposure-aware bug-vs-fix preference evaluation pipeline",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    portrait = sub.add_parser("portrait", help="build or query corpus portraits")
    portrait_sub = portrait.add_subparsers(dest="portrait_command", required=True)

    build = portrait_sub.add_parser("build", help="build a portrait from a corpus")
    build.add_argument("--corpus", required=True, help="directory tree or corpus JSONL")
    build.add_argument("--out", required=True, help="output portrait file")
    build.add_argument("--width", type=int, default=50)
    build.add_argument("--stride", type=int, default=50)
    build.add_argument("--fpr", type=float, default=0.001)
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--expected-elements", type=int, default=None)
    build.add_argument("--jobs", type=int, default=_default_jobs())

    query = portrait_sub.add_parser("query", help="query pair exposure against a portrait")
    query.add_argument("--portrait", help="portrait file (local mode)")
    query.add_argument("--in", dest="pairs", required=True, help="pairs JSONL")
    query.add_argument("--out", required=True, help="exposure JSONL output")
    query.add_argument("--threshold", type=float, default=0.9)
    query.add_argument("--server", help="base URL of a running service (thin-client mode)")
    query.add_argument("--portrait-name", default="default", help="portrait name on the server")

    strat = sub.add_parser("stratify", help="assign exposure categories and summarize")
    strat.add_argument("--pairs", required=True)
    strat.add_argument("--exposure", required=True)
    strat.add_argument("--out", required=True, help="categories JSONL output")
    strat.add_argument("--summary", help="category-count CSV output")
    strat.add_argument("--include-unsound", action="store_true")

    score = sub.add_parser("score", help="compute metrics and preference verdicts")
    score.add_argument("--tokenprobs", required=True)
    score.add_argument("--categories", required=True)
    score.add_argument("--out", required=True, help="verdicts JSONL output")
    score.add_argument("--metrics-out", help="metric vectors JSONL (default: alongside --out)")
    score.add_argument("--tables", help="directory for preference-table CSVs")
    score.add_argument("--pairs", help="pairs JSONL (needed for --per-category-n)")
    score.add_argument("--per-category-n", type=int, default=None)
    score.add_argument("--seed", type=int, default=0)

    match = sub.add_parser("match", help="match completions against bug/fix variants")
    match.add_argument("--generations", required=True)
    match.add_argument("--pairs", required=True)
    match.add_argument("--categories", required=True)
    match.add_argument("--out", required=True, help="outcomes JSONL output")
    match.add_argument("--rates", help="per-stratum rate CSV output")
    match.add_argument("--mode", choices=["line", "substring"], default="line")

    refmodel = sub.add_parser("refmodel", help="reference character n-gram model")
    refmodel_sub = refmodel.add_subparsers(dest="refmodel_command", required=True)

    rm_train = refmodel_sub.add_parser("train", help="train on a corpus")
    rm_train.add_argument("--corpus", required=True)
    rm_train.add_argument("--out", required=True, help="model JSON output")
    rm_train.add_argument("--order", type=int, default=8)
    rm_train.add_argument("--alpha", type=float, default=0.1)
    rm_train.add_argument("--seed", type=int, default=0)

    rm_score = refmodel_sub.add_parser("score", help="emit token probabilities for pairs")
    rm_score.add_argument("--model", required=True)
    rm_score.add_argument("--pairs", required=True)
    rm_score.add_argument("--out", required=True, help="tokenprobs JSONL output")
    rm_score.add_argument("--context-limit", type=int, default=2048)

    rm_generate = refmodel_sub.add_parser("generate", help="sample completions for pairs")
    rm_generate.add_argument("--model", required=True)
    rm_generate.add_argument("--pairs", required=True)
    rm_generate.add_argument("--out", required=True, help="generations JSONL output")
    rm_generate.add_argument("--samples", type=int, default=5)
    rm_generate.add_argument("--temperature", type=float, default=0.8)
    rm_generate.add_argument("--top-p", type=float, default=0.95)
    rm_generate.add_argument("--max-new-tokens", type=int, default=64)
    rm_generate.add_argument("--seed", type=int, default=0)
    rm_generate.add_argument("--context-limit", type=int, default=2048)

    report = sub.add_parser("report", help="emit report tables for a run directory")
    report.add_argument("--run-dir", required=True)
    report.add_argument("--out", required=True)

    run = sub.add_parser("run", help="run the full pipeline")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--corpus")
    run.add_argument("--pairs")
    run.add_argument("--out")
    run.add_argument("--width", type=int)
    run.add_argument("--stride", type=int)
    run.add_argument("--fpr", type=float, dest="target_fpr")
    run.add_argument("--expected-elements", type=int, dest="expected_elements")
    run.add_argument("--threshold", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--per-category-n", type=int, dest="per_category_n")
    run.add_argument("--match-mode", choices=["line", "substring"], dest="match_mode")
    run.add_argument("--include-unsound", action="store_const", const=True, dest="include_unsound")
    run.add_argument("--order", type=int)
    run.add_argument("--alpha", type=float)
    run.add_argument("--temperature", type=float)
    run.add_argument("--top-p", type=float, dest="top_p")
    run.add_argument("--samples", type=int)
    run.add_argument("--max-new-tokens", type=int, dest="max_new_tokens")
    run.add_argument("--context-limit", type=int, dest="context_limit")
    run.add_argument("--tokenprobs", help="pre-computed tokenprobs JSONL (skips refmodel scoring)")
    run.add_argument("--generations", help="pre-computed generations JSONL (skips refmodel sampling)")
    run.add_argument("--jobs", type=int)
    run.add_argument("--stages", help="comma-separated stage subset")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument(
        "--portrait",
        action="append",
        default=[],
        metavar="NAME=PATH",
        help="preload a portrait file under a name (repeatable)",
    )

    return parser


def _cmd_portrait_build(args: argparse.Namespace) -> int:
    params = build_portrait_file(
        args.corpus,
        args.out,
        width=args.width,
        stride=args.stride,
        target_fpr=args.fpr,
        hash_seed=args.seed,
        expected_elements=args.expected_elements,
        jobs=args.jobs,
    )
    print(
        f"built portrait {args.out} "
        f"(m={params.bit_count} bits, k={params.hash_count} hashes)"
    )
    return 0


def _cmd_portrait_query(args: argparse.Namespace) -> int:
    if args.server:
        from .service.client import ServiceClient

        pairs, errors = load_pairs(args.pairs)
        for err in errors:
            logger.warning("pairs %s: %s", args.pairs, err)
        with ServiceClient(args.server) as client:
            records = client.classify_pairs(args.portrait_name, pairs, args.threshold)
        count = write_records(args.out, records)
    elif args.portrait:
        count = query_pairs_file(args.portrait, args.pairs, args.out, args.threshold)
    else:
        print("error: either --portrait or --server is required", file=sys.stderr)
        return 2
    print(f"wrote {count} exposure records to {args.out}")
    return 0


def _cmd_stratify(args: argparse.Namespace) -> int:
    categories = stratify_files(args.pairs, args.exposure, args.out, args.include_unsound)
    print(f"categorized {len(categories)} pairs into {args.out}")
    if args.summary:
        pairs, _errors = load_pairs(args.pairs)
        summary = summarize_exposure(pairs, categories)
        Path(args.summary).parent.mkdir(parents=True, exist_ok=True)
        Path(args.summary).write_text(emit_exposure_table(summary), encoding="utf-8")
        print(f"wrote summary table to {args.summary}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    metrics_out = args.metrics_out or str(Path(args.out).with_name("metrics.jsonl"))
    score_files(
        args.tokenprobs,
        args.categories,
        args.out,
        metrics_out,
        pairs_path=args.pairs,
        per_category_n=args.per_category_n,
        seed=args.seed,
    )
    print(f"wrote verdicts to {args.out} and metric vectors to {metrics_out}")
    if args.tables:
        from .metrics import preference_table
        from .pipeline import load_verdicts
        from .report import (
            AND_NOR_CONDITIONS,
            XOR_CONDITIONS,
            emit_preference_tables,
        )

        verdicts = load_verdicts(args.out)
        categories = load_categories(args.categories)
        tables_dir = Path(args.tables)
        tables_dir.mkdir(parents=True, exist_ok=True)
        xor_rows = [
            row
            for condition in XOR_CONDITIONS
            for row in preference_table(verdicts, categories, condition)
        ]
        nor_rows = [
            row
            for condition in AND_NOR_CONDITIONS
            for row in preference_table(verdicts, categories, condition)
        ]
        (tables_dir / "table2_xor.csv").write_text(
            emit_preference_tables(xor_rows), encoding="utf-8"
        )
        (tables_dir / "table3_and_nor.csv").write_text(
            emit_preference_tables(nor_rows), encoding="utf-8"
        )
        print(f"wrote preference tables to {tables_dir}")
    return 0


def _cmd_match(args: argparse.Namespace) -> int:
    match_files(args.generations, args.pairs, args.out, args.mode)
    print(f"wrote outcomes to {args.out}")
    if args.rates:
        outcomes = load_outcomes(args.out)
        categories = load_categories(args.categories)
        rates = outcome_rates(outcomes, categories)
        Path(args.rates).parent.mkdir(parents=True, exist_ok=True)
        Path(args.rates).write_text(emit_generation_rates(rates), encoding="utf-8")
        print(f"wrote rates to {args.rates}")
    return 0


def _cmd_refmodel(args: argparse.Namespace) -> int:
    from .pipeline import refmodel_generate_file, refmodel_score_file
    from .portrait import iter_corpus

    if args.refmodel_command == "train":
        model = train(iter_corpus(args.corpus), order=args.order, alpha=args.alpha, seed=args.seed)
        model.save(args.out)
        print(
            f"trained order-{model.order} model on {len(model.vocabulary)}-char "
            f"vocabulary; saved to {args.out}"
        )
        return 0
    model = NGramModel.load(args.model)
    pairs, errors = load_pairs(args.pairs)
    for err in errors:
        logger.warning("pairs %s: %s", args.pairs, err)
    if args.refmodel_command == "score":
        count = refmodel_score_file(model, pairs, args.out, args.context_limit)
    else:
        count = refmodel_generate_file(
            model,
            pairs,
            args.out,
            samples=args.samples,
            max_new_tokens=args.max_new_tokens,
            temperature=args.temperature,
            top_p=args.top_p,
            seed=args.seed,
            context_limit=args.context_limit,
        )
    print(f"wrote {count} records to {args.out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    report_from_run_dir(args.run_dir, args.out)
    print(f"wrote report to {args.out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        key: getattr(args, key)
        for key in (
            "corpus",
            "pairs",
            "out",
            "width",
            "stride",
            "target_fpr",
            "expected_elements",
            "threshold",
            "seed",
            "per_category_n",
            "match_mode",
            "include_unsound",
            "order",
            "alpha",
            "temperature",
            "top_p",
            "samples",
            "max_new_tokens",
            "context_limit",
            "tokenprobs",
            "generations",
            "jobs",
        )
        if getattr(args, key, None) is not None
    }
    if args.stages:
        overrides["stages"] = tuple(s.strip() for s in args.stages.split(",") if s.strip())
    if "jobs" not in overrides and _default_jobs() != 1:
        overrides["jobs"] = _default_jobs()
    config = merge_config(args.config, overrides)
    run_dir = run_pipeline(config)
    print(f"pipeline complete; run directory: {run_dir}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    preload = {}
    for spec in args.portrait:
        name, _sep, path = spec.partition("=")
        if not path:
            print(f"error: --portrait expects NAME=PATH, got {spec!r}", file=sys.stderr)
            return 2
        preload[name] = path
    app = create_app(preload)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "portrait":
            if args.portrait_command == "build":
                return _cmd_portrait_build(args)
            return _cmd_portrait_query(args)
        if args.command == "stratify":
            return _cmd_stratify(args)
        if args.command == "score":
            return _cmd_score(args)
        if args.command == "match":
            return _cmd_match(args)
        if args.command == "refmodel":
            return _cmd_refmodel(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
