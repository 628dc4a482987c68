"""Pipeline orchestration: stage wiring, run directories, and caching.

Stages run in dependency order (portrait, exposure, stratify, scorer,
score, match, report). Each stage's outputs are cached under the run
directory keyed by the digests of its inputs and its slice of the
configuration, so unchanged reruns skip work and reproduce byte-identical
artifacts.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import __version__
from .dataset import (
    BugFixPair,
    ExposureCategory,
    load_pairs,
    sample_balanced,
    stratify,
    summarize_exposure,
)
from .genmatch import classify_outcome, generation_from_record, outcome_rates
from .jsonl import read_valid, write_records
from .membership import classify_pair
from .metrics import score_pair, sequence_from_record
from .portrait import (
    PortraitParams,
    build_portrait,
    count_windows,
    iter_corpus,
    read_portrait,
    save_portrait,
)
from .refmodel import NGramModel, sample_completions, score_sequence, train
from .report import (
    AND_NOR_CONDITIONS,
    XOR_CONDITIONS,
    ExperimentManifest,
    category_breakdown,
    emit_category_breakdown,
    emit_exposure_table,
    emit_generation_rates,
    emit_preference_tables,
    exposure_table_sidecar,
    generation_rates_sidecar,
    preference_sidecar,
)

logger = logging.getLogger(__name__)

STAGE_ORDER = ("portrait", "query", "stratify", "scorer", "score", "match", "report")


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class RunConfig:
    """Fully merged configuration of one pipeline run."""

    corpus: str = ""
    pairs: str = ""
    out: str = "run"
    width: int = 50
    stride: int = 50
    target_fpr: float = 0.001
    expected_elements: int | None = None
    threshold: float = 0.9
    seed: int = 0
    per_category_n: int | None = None
    match_mode: str = "line"
    include_unsound: bool = False
    order: int = 8
    alpha: float = 0.1
    temperature: float = 0.8
    top_p: float = 0.95
    samples: int = 5
    max_new_tokens: int = 64
    context_limit: int = 2048
    tokenprobs: str | None = None
    generations: str | None = None
    jobs: int = 1
    stages: tuple[str, ...] = STAGE_ORDER

    def validate(self) -> None:
        if not self.corpus or not Path(self.corpus).exists():
            raise StageError("config", f"corpus input not found: {self.corpus!r}")
        if not self.pairs or not Path(self.pairs).exists():
            raise StageError("config", f"pairs input not found: {self.pairs!r}")
        for name, path in (("tokenprobs", self.tokenprobs), ("generations", self.generations)):
            if path is not None and not Path(path).exists():
                raise StageError("config", f"{name} input not found: {path!r}")
        unknown = set(self.stages) - set(STAGE_ORDER)
        if unknown:
            raise StageError("config", f"unknown stages: {sorted(unknown)}")
        if self.match_mode not in ("line", "substring"):
            raise StageError("config", f"unknown match mode {self.match_mode!r}")

    def manifest_view(self) -> dict:
        """Config as persisted: the output root is normalized so reruns
        into different directories stay byte-identical."""
        data = asdict(self)
        data["out"] = "."
        data["stages"] = list(self.stages)
        return data


def merge_config(
    config_file: str | None = None,
    overrides: Mapping[str, object] | None = None,
) -> RunConfig:
    """Defaults, then config file, then explicit flags."""
    config = RunConfig()
    if config_file:
        try:
            payload = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StageError("config", f"cannot read config file {config_file!r}: {exc}")
        unknown = set(payload) - set(asdict(config))
        if unknown:
            raise StageError("config", f"unknown config keys: {sorted(unknown)}")
        if "stages" in payload:
            payload["stages"] = tuple(payload["stages"])
        config = replace(config, **payload)
    if overrides:
        cleaned = {k: v for k, v in overrides.items() if v is not None}
        if "stages" in cleaned:
            cleaned["stages"] = tuple(cleaned["stages"])
        config = replace(config, **cleaned)
    logger.info("merged configuration: %s", json.dumps(asdict(config), sort_keys=True, default=list))
    return config


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunContext:
    config: RunConfig
    run_dir: Path
    cache_dir: Path = field(init=False)

    def __post_init__(self) -> None:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.cache_dir = self.run_dir / ".stages"
        self.cache_dir.mkdir(exist_ok=True)

    def artifact(self, name: str) -> Path:
        return self.run_dir / name

    def stage_cached(self, stage: str, key: str, outputs: Sequence[Path]) -> bool:
        record_path = self.cache_dir / f"{stage}.json"
        if not record_path.exists():
            return False
        try:
            record = json.loads(record_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return False
        return record.get("key") == key and all(p.exists() for p in outputs)

    def mark_stage(self, stage: str, key: str, outputs: Sequence[Path]) -> None:
        record = {"key": key, "outputs": [p.name for p in outputs]}
        (self.cache_dir / f"{stage}.json").write_text(
            json.dumps(record, sort_keys=True), encoding="utf-8"
        )


def _stage_key(inputs: Mapping[str, str], stage_config: Mapping[str, object]) -> str:
    payload = json.dumps(
        {"inputs": dict(inputs), "config": dict(stage_config), "version": __version__},
        sort_keys=True,
        default=str,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _run_stage(
    ctx: RunContext,
    stage: str,
    inputs: Mapping[str, str],
    stage_config: Mapping[str, object],
    outputs: Sequence[Path],
    action: Callable[[], None],
) -> None:
    key = _stage_key(inputs, stage_config)
    if ctx.stage_cached(stage, key, outputs):
        logger.info("stage %s: cached, skipping", stage)
        return
    logger.info("stage %s: running", stage)
    try:
        action()
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, str(exc)) from exc
    ctx.mark_stage(stage, key, outputs)


# --- stage bodies, shared by the pipeline and the standalone CLI commands ---


def build_portrait_file(
    corpus: str,
    out: str | Path,
    width: int = 50,
    stride: int = 50,
    target_fpr: float = 0.001,
    hash_seed: int = 0,
    expected_elements: int | None = None,
    jobs: int = 1,
) -> PortraitParams:
    """Build and save a portrait; sizes the filter by a counting pre-pass
    when no expected element count is given."""
    probe = PortraitParams.sized(1, width=width, stride=stride, target_fpr=target_fpr)
    if expected_elements is None:
        expected_elements = count_windows(iter_corpus(corpus), probe)
        logger.info("counting pre-pass found %d windows", expected_elements)
    params = PortraitParams.sized(
        expected_elements,
        width=width,
        stride=stride,
        target_fpr=target_fpr,
        hash_seed=hash_seed,
    )
    portrait = build_portrait(iter_corpus(corpus), params, jobs=jobs)
    save_portrait(portrait, out)
    return params


def query_pairs_file(
    portrait_path: str | Path,
    pairs_path: str | Path,
    out: str | Path,
    threshold: float = 0.9,
) -> int:
    """Classify every pair's variants against a portrait file.

    Pairs whose query cannot be constructed (snippet not found, empty
    snippet) are reported as unsound zero-score records so downstream
    stages stay total; details go to the log.
    """
    if not Path(portrait_path).exists():
        raise FileNotFoundError(f"portrait file not found: {portrait_path}")
    portrait = read_portrait(portrait_path)
    pairs, errors = load_pairs(pairs_path)
    for err in errors:
        logger.warning("pairs %s: %s", pairs_path, err)
    records = []
    for pair in pairs:
        try:
            bug_report, fix_report, _category = classify_pair(portrait, pair, threshold)
            records.append(bug_report.to_record(pair.pair_id, "bug"))
            records.append(fix_report.to_record(pair.pair_id, "fix"))
        except ValueError as exc:
            logger.warning("pair %s: %s; emitting unsound report", pair.pair_id, exc)
            for variant in ("bug", "fix"):
                records.append(
                    {
                        "pair_id": pair.pair_id,
                        "variant": variant,
                        "hits": 0,
                        "expected": 1,
                        "score": 0.0,
                        "coverage": 0.0,
                        "seen": False,
                        "unsound": True,
                    }
                )
    return write_records(out, records)


def _validate_exposure_record(record: object) -> dict:
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    required = ("pair_id", "variant", "hits", "expected", "score", "coverage", "seen", "unsound")
    for name in required:
        if name not in record:
            raise ValueError(f"missing required field {name!r}")
    return record


def load_exposure(path: str | Path) -> dict[tuple[str, str], dict]:
    records, errors = read_valid(path, _validate_exposure_record)
    for err in errors:
        logger.warning("exposure %s: %s", path, err)
    return {(r["pair_id"], r["variant"]): r for r in records}


def stratify_files(
    pairs_path: str | Path,
    exposure_path: str | Path,
    out: str | Path,
    include_unsound: bool = False,
) -> dict[str, ExposureCategory]:
    pairs, _errors = load_pairs(pairs_path)
    reports = load_exposure(exposure_path)
    categories = stratify(pairs, reports, include_unsound=include_unsound)
    write_records(
        out,
        [
            {"pair_id": pair_id, "category": category.value}
            for pair_id, category in sorted(categories.items())
        ],
    )
    return categories


def _validate_category_record(record: object) -> tuple[str, ExposureCategory]:
    if not isinstance(record, dict) or "pair_id" not in record or "category" not in record:
        raise ValueError('category records need "pair_id" and "category"')
    return record["pair_id"], ExposureCategory(record["category"])


def load_categories(path: str | Path) -> dict[str, ExposureCategory]:
    records, errors = read_valid(path, _validate_category_record)
    for err in errors:
        logger.warning("categories %s: %s", path, err)
    return dict(records)


def refmodel_score_file(
    model: NGramModel,
    pairs: Sequence[BugFixPair],
    out: str | Path,
    context_limit: int = 2048,
) -> int:
    records = []
    for pair in pairs:
        context = pair.context_before[-context_limit:] if context_limit else pair.context_before
        for variant in ("bug", "fix"):
            tokens, probs = score_sequence(model, context, pair.variant_text(variant))
            records.append(
                {"pair_id": pair.pair_id, "variant": variant, "tokens": tokens, "probs": probs}
            )
    return write_records(out, records)


def refmodel_generate_file(
    model: NGramModel,
    pairs: Sequence[BugFixPair],
    out: str | Path,
    samples: int = 5,
    max_new_tokens: int = 64,
    temperature: float = 0.8,
    top_p: float = 0.95,
    seed: int = 0,
    context_limit: int = 2048,
) -> int:
    records = []
    for pair in pairs:
        record = sample_completions(
            model,
            pair.context_before,
            pair.pair_id,
            n_samples=samples,
            max_chars=max_new_tokens,
            temperature=temperature,
            top_p=top_p,
            seed=seed,
            context_limit=context_limit,
        )
        records.append(
            {
                "pair_id": record.pair_id,
                "completions": list(record.completions),
                "decoding": dict(record.decoding),
            }
        )
    return write_records(out, records)


def load_tokenprobs(path: str | Path) -> dict[tuple[str, str], object]:
    sequences, errors = read_valid(path, sequence_from_record)
    for err in errors:
        logger.warning("tokenprobs %s: %s", path, err)
    return {(s.pair_id, s.variant): s for s in sequences}


def score_files(
    tokenprobs_path: str | Path,
    categories_path: str | Path,
    verdicts_out: str | Path,
    metrics_out: str | Path | None = None,
    pairs_path: str | Path | None = None,
    per_category_n: int | None = None,
    seed: int = 0,
) -> None:
    """Compute metric vectors and per-metric verdicts for every pair with
    both variant sequences; optionally restrict to a balanced per-category
    sample first."""
    sequences = load_tokenprobs(tokenprobs_path)
    categories = load_categories(categories_path)
    pair_ids = sorted({pid for pid, _variant in sequences})
    if per_category_n is not None:
        if pairs_path is None:
            raise ValueError("balanced sampling needs the pairs file")
        pairs, _errors = load_pairs(pairs_path)
        subset = sample_balanced(pairs, categories, per_category_n, seed)
        keep = {p.pair_id for p in subset}
        pair_ids = [pid for pid in pair_ids if pid in keep]
    metric_records = []
    verdict_records = []
    skipped = 0
    for pair_id in pair_ids:
        bug_seq = sequences.get((pair_id, "bug"))
        fix_seq = sequences.get((pair_id, "fix"))
        if bug_seq is None or fix_seq is None:
            skipped += 1
            continue
        bug_vec, fix_vec, verdicts = score_pair(pair_id, bug_seq, fix_seq)
        metric_records.append(bug_vec.to_record(pair_id, "bug"))
        metric_records.append(fix_vec.to_record(pair_id, "fix"))
        verdict_records.extend(v.to_record() for v in verdicts)
    if skipped:
        logger.warning("skipped %d pairs missing a variant sequence", skipped)
    if metrics_out is not None:
        write_records(metrics_out, metric_records)
    write_records(verdicts_out, verdict_records)


def _validate_verdict_record(record: object) -> dict:
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    for name in ("pair_id", "metric", "preferred"):
        if name not in record:
            raise ValueError(f"missing required field {name!r}")
    return record


def load_verdicts(path: str | Path):
    from .metrics import Preference, PreferenceVerdict

    records, errors = read_valid(path, _validate_verdict_record)
    for err in errors:
        logger.warning("verdicts %s: %s", path, err)
    return [
        PreferenceVerdict(r["pair_id"], r["metric"], Preference(r["preferred"])) for r in records
    ]


def match_files(
    generations_path: str | Path,
    pairs_path: str | Path,
    outcomes_out: str | Path,
    match_mode: str = "line",
) -> None:
    pairs, _errors = load_pairs(pairs_path)
    by_id = {p.pair_id: p for p in pairs}
    generations, errors = read_valid(generations_path, generation_from_record)
    for err in errors:
        logger.warning("generations %s: %s", generations_path, err)
    records = []
    for generation in generations:
        pair = by_id.get(generation.pair_id)
        if pair is None:
            logger.warning("generation for unknown pair %s skipped", generation.pair_id)
            continue
        records.append(classify_outcome(generation, pair, match_mode).to_record())
    write_records(outcomes_out, records)


def _validate_outcome_record(record: object):
    from .genmatch import MatchCategory, MatchOutcome

    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    for name in ("pair_id", "any_bug", "any_fix", "category"):
        if name not in record:
            raise ValueError(f"missing required field {name!r}")
    return MatchOutcome(
        pair_id=record["pair_id"],
        any_bug=record["any_bug"],
        any_fix=record["any_fix"],
        category=MatchCategory(record["category"]),
    )


def load_outcomes(path: str | Path):
    records, errors = read_valid(path, _validate_outcome_record)
    for err in errors:
        logger.warning("outcomes %s: %s", path, err)
    return records


def write_report_dir(
    out_dir: str | Path,
    pairs_path: str | Path,
    categories_path: str | Path,
    verdicts_path: str | Path | None,
    outcomes_path: str | Path | None,
    manifest: ExperimentManifest,
) -> None:
    """Emit every report artifact that its inputs allow."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs, _errors = load_pairs(pairs_path)
    categories = load_categories(categories_path)

    summary = summarize_exposure(pairs, categories)
    (out / "table1.csv").write_text(emit_exposure_table(summary), encoding="utf-8")
    (out / "table1.json").write_text(
        json.dumps(exposure_table_sidecar(summary), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )

    if verdicts_path is not None and Path(verdicts_path).exists():
        from .metrics import preference_table

        verdicts = load_verdicts(verdicts_path)
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
        (out / "table2_xor.csv").write_text(emit_preference_tables(xor_rows), encoding="utf-8")
        (out / "table2_xor.json").write_text(
            json.dumps(preference_sidecar(xor_rows), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        (out / "table3_and_nor.csv").write_text(emit_preference_tables(nor_rows), encoding="utf-8")
        (out / "table3_and_nor.json").write_text(
            json.dumps(preference_sidecar(nor_rows), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        bug_category = {p.pair_id: p.bug_category for p in pairs}
        breakdown = category_breakdown(verdicts, categories, bug_category)
        (out / "categories.csv").write_text(emit_category_breakdown(breakdown), encoding="utf-8")

    if outcomes_path is not None and Path(outcomes_path).exists():
        outcomes = load_outcomes(outcomes_path)
        rates = outcome_rates(outcomes, categories)
        (out / "generation_rates.csv").write_text(emit_generation_rates(rates), encoding="utf-8")
        (out / "generation_rates.json").write_text(
            json.dumps(generation_rates_sidecar(rates), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")


def _build_manifest(config: RunConfig, run_dir: Path) -> ExperimentManifest:
    portrait_path = run_dir / "portrait.xpdp"
    needs_refmodel = config.tokenprobs is None or config.generations is None
    scorer_identity = (
        f"char-ngram(order={config.order},alpha={config.alpha},seed={config.seed})"
        if needs_refmodel
        else "external"
    )
    return ExperimentManifest(
        tool_version=__version__,
        portrait_digest=f"{read_portrait(portrait_path).corpus_digest:064x}"
        if portrait_path.exists()
        else None,
        dataset_digest=file_digest(config.pairs) if Path(config.pairs).is_file() else None,
        scorer=scorer_identity,
        decoding={
            "temperature": config.temperature,
            "top_p": config.top_p,
            "samples": config.samples,
            "max_new_tokens": config.max_new_tokens,
            "context_limit": config.context_limit,
        },
        threshold=config.threshold,
        seeds={"root": config.seed},
        config=config.manifest_view(),
    )


def report_from_run_dir(run_dir: str | Path, out_dir: str | Path) -> None:
    """Re-emit the report for an existing run directory.

    The merged configuration persisted as config.json locates the pairs
    input and reproduces the manifest.
    """
    run_dir = Path(run_dir)
    config_path = run_dir / "config.json"
    if not config_path.exists():
        raise StageError("report", f"no config.json in run directory {run_dir}")
    payload = json.loads(config_path.read_text(encoding="utf-8"))
    payload["stages"] = tuple(payload.get("stages", STAGE_ORDER))
    config = RunConfig(**payload)
    write_report_dir(
        out_dir,
        config.pairs,
        run_dir / "categories.jsonl",
        run_dir / "verdicts.jsonl",
        run_dir / "outcomes.jsonl",
        _build_manifest(config, run_dir),
    )


def run_pipeline(config: RunConfig) -> Path:
    """Execute all configured stages; returns the run directory."""
    config.validate()
    ctx = RunContext(config, Path(config.out))
    selected = [s for s in STAGE_ORDER if s in config.stages]
    (ctx.run_dir / "config.json").write_text(
        json.dumps(asdict(config), sort_keys=True, indent=2, default=list) + "\n",
        encoding="utf-8",
    )

    portrait_path = ctx.artifact("portrait.xpdp")
    exposure_path = ctx.artifact("exposure.jsonl")
    categories_path = ctx.artifact("categories.jsonl")
    model_path = ctx.artifact("model.json")
    tokenprobs_path = Path(config.tokenprobs) if config.tokenprobs else ctx.artifact("tokenprobs.jsonl")
    generations_path = Path(config.generations) if config.generations else ctx.artifact("generations.jsonl")
    metrics_path = ctx.artifact("metrics.jsonl")
    verdicts_path = ctx.artifact("verdicts.jsonl")
    outcomes_path = ctx.artifact("outcomes.jsonl")
    report_dir = ctx.artifact("report")

    corpus_digest = file_digest(config.corpus) if Path(config.corpus).is_file() else config.corpus
    pairs_digest = file_digest(config.pairs)

    if "portrait" in selected:
        _run_stage(
            ctx,
            "portrait",
            {"corpus": corpus_digest},
            {
                "width": config.width,
                "stride": config.stride,
                "target_fpr": config.target_fpr,
                "hash_seed": config.seed,
                "expected_elements": config.expected_elements,
            },
            [portrait_path],
            lambda: build_portrait_file(
                config.corpus,
                portrait_path,
                width=config.width,
                stride=config.stride,
                target_fpr=config.target_fpr,
                hash_seed=config.seed,
                expected_elements=config.expected_elements,
                jobs=config.jobs,
            ),
        )

    if "query" in selected:
        if not portrait_path.exists():
            raise StageError("query", f"portrait file not found: {portrait_path}")
        _run_stage(
            ctx,
            "query",
            {"portrait": file_digest(portrait_path), "pairs": pairs_digest},
            {"threshold": config.threshold},
            [exposure_path],
            lambda: query_pairs_file(portrait_path, config.pairs, exposure_path, config.threshold),
        )

    if "stratify" in selected:
        if not exposure_path.exists():
            raise StageError("stratify", f"exposure file not found: {exposure_path}")
        _run_stage(
            ctx,
            "stratify",
            {"pairs": pairs_digest, "exposure": file_digest(exposure_path)},
            {"include_unsound": config.include_unsound},
            [categories_path],
            lambda: stratify_files(
                config.pairs, exposure_path, categories_path, config.include_unsound
            ),
        )

    needs_refmodel = config.tokenprobs is None or config.generations is None
    if "scorer" in selected and needs_refmodel:

        def _scorer_stage() -> None:
            model = train(iter_corpus(config.corpus), order=config.order, alpha=config.alpha, seed=config.seed)
            model.save(model_path)
            pairs, _errors = load_pairs(config.pairs)
            if config.tokenprobs is None:
                refmodel_score_file(model, pairs, tokenprobs_path, config.context_limit)
            if config.generations is None:
                refmodel_generate_file(
                    model,
                    pairs,
                    generations_path,
                    samples=config.samples,
                    max_new_tokens=config.max_new_tokens,
                    temperature=config.temperature,
                    top_p=config.top_p,
                    seed=config.seed,
                    context_limit=config.context_limit,
                )

        outputs = [model_path]
        if config.tokenprobs is None:
            outputs.append(tokenprobs_path)
        if config.generations is None:
            outputs.append(generations_path)
        _run_stage(
            ctx,
            "scorer",
            {"corpus": corpus_digest, "pairs": pairs_digest},
            {
                "order": config.order,
                "alpha": config.alpha,
                "seed": config.seed,
                "temperature": config.temperature,
                "top_p": config.top_p,
                "samples": config.samples,
                "max_new_tokens": config.max_new_tokens,
                "context_limit": config.context_limit,
            },
            outputs,
            _scorer_stage,
        )

    if "score" in selected:
        if not tokenprobs_path.exists():
            raise StageError("score", f"tokenprobs file not found: {tokenprobs_path}")
        _run_stage(
            ctx,
            "score",
            {
                "tokenprobs": file_digest(tokenprobs_path),
                "categories": file_digest(categories_path),
                "pairs": pairs_digest,
            },
            {"per_category_n": config.per_category_n, "seed": config.seed},
            [verdicts_path, metrics_path],
            lambda: score_files(
                tokenprobs_path,
                categories_path,
                verdicts_path,
                metrics_path,
                pairs_path=config.pairs,
                per_category_n=config.per_category_n,
                seed=config.seed,
            ),
        )

    if "match" in selected:
        if not generations_path.exists():
            raise StageError("match", f"generations file not found: {generations_path}")
        _run_stage(
            ctx,
            "match",
            {"generations": file_digest(generations_path), "pairs": pairs_digest},
            {"match_mode": config.match_mode},
            [outcomes_path],
            lambda: match_files(generations_path, config.pairs, outcomes_path, config.match_mode),
        )

    if "report" in selected:
        manifest = _build_manifest(config, ctx.run_dir)
        _run_stage(
            ctx,
            "report",
            {
                "pairs": pairs_digest,
                "categories": file_digest(categories_path) if categories_path.exists() else "",
                "verdicts": file_digest(verdicts_path) if verdicts_path.exists() else "",
                "outcomes": file_digest(outcomes_path) if outcomes_path.exists() else "",
            },
            {"manifest": manifest.to_json()},
            [report_dir / "table1.csv", report_dir / "manifest.json"],
            lambda: write_report_dir(
                report_dir,
                config.pairs,
                categories_path,
                verdicts_path,
                outcomes_path,
                manifest,
            ),
        )

    return ctx.run_dir
