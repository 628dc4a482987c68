"""Bug-fix pair ingestion, exposure stratification, and summary statistics."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .jsonl import RecordError, read_valid

logger = logging.getLogger(__name__)

#: The 16 single-statement bug pattern names; anything else is bucketed
#: under OTHER.
KNOWN_CATEGORIES = frozenset(
    {
        "CHANGE_IDENTIFIER",
        "CHANGE_NUMERAL",
        "SWAP_BOOLEAN_LITERAL",
        "SWAP_ARGUMENTS",
        "CHANGE_MODIFIER",
        "CHANGE_UNARY_OPERATOR",
        "CHANGE_OPERATOR",
        "CHANGE_OPERAND",
        "MORE_SPECIFIC_IF",
        "LESS_SPECIFIC_IF",
        "CHANGE_CALLER_IN_FUNCTION_CALL",
        "DIFFERENT_METHOD_SAME_ARGS",
        "OVERLOAD_METHOD_MORE_ARGS",
        "OVERLOAD_METHOD_DELETED_ARGS",
        "ADD_THROWS_EXCEPTION",
        "DELETE_THROWS_EXCEPTION",
    }
)

OTHER_CATEGORY = "OTHER"


class ExposureCategory(str, Enum):
    """Which variants of a pair appear in the training corpus."""

    NEITHER = "Neither"
    BOTH = "Both"
    ONLY_BUG = "OnlyBug"
    ONLY_FIX = "OnlyFix"


#: Table ordering used everywhere categories are reported.
CATEGORY_ORDER = (
    ExposureCategory.NEITHER,
    ExposureCategory.BOTH,
    ExposureCategory.ONLY_BUG,
    ExposureCategory.ONLY_FIX,
)


def categorize(bug_seen: bool, fix_seen: bool) -> ExposureCategory:
    """Exhaustive truth table over the two seen booleans."""
    if bug_seen and fix_seen:
        return ExposureCategory.BOTH
    if bug_seen:
        return ExposureCategory.ONLY_BUG
    if fix_seen:
        return ExposureCategory.ONLY_FIX
    return ExposureCategory.NEITHER


def normalize_category_label(label: str) -> str:
    """Map a free-form bug-category label onto the known pattern names."""
    canon = label.strip().upper().replace(" ", "_").replace("-", "_")
    return canon if canon in KNOWN_CATEGORIES else OTHER_CATEGORY


@dataclass(frozen=True)
class BugFixPair:
    """One single-statement bug and its one-line fix.

    ``context_before`` is the source preceding the changed statement and
    is identical for both variants. The full file texts are optional;
    without them a short snippet cannot be padded soundly for membership
    queries.
    """

    pair_id: str
    bug_text: str
    fix_text: str
    context_before: str
    bug_category: str
    commits_until_fix: int
    source_file_bug: str | None = None
    source_file_fix: str | None = None

    def variant_text(self, variant: str) -> str:
        if variant == "bug":
            return self.bug_text
        if variant == "fix":
            return self.fix_text
        raise ValueError(f"unknown variant {variant!r}")

    def source_file(self, variant: str) -> str | None:
        return self.source_file_bug if variant == "bug" else self.source_file_fix


class DatasetError(ValueError):
    """Unusable dataset input (unreadable, empty, or all-invalid)."""


_REQUIRED_FIELDS = ("pair_id", "bug_text", "fix_text", "context_before", "bug_category")


def _validate_pair(record: object) -> BugFixPair:
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in record:
            raise ValueError(f"missing required field {name!r}")
        if not isinstance(record[name], str):
            raise ValueError(f"field {name!r} must be a string")
    commits = record.get("commits_until_fix", 0)
    if not isinstance(commits, int) or isinstance(commits, bool) or commits < 0:
        raise ValueError("field 'commits_until_fix' must be a non-negative integer")
    if record["bug_text"] == record["fix_text"]:
        raise ValueError("bug_text and fix_text must differ")
    for optional in ("source_file_bug", "source_file_fix"):
        value = record.get(optional)
        if value is not None and not isinstance(value, str):
            raise ValueError(f"field {optional!r} must be a string when present")
    return BugFixPair(
        pair_id=record["pair_id"],
        bug_text=record["bug_text"],
        fix_text=record["fix_text"],
        context_before=record["context_before"],
        bug_category=normalize_category_label(record["bug_category"]),
        commits_until_fix=commits,
        source_file_bug=record.get("source_file_bug"),
        source_file_fix=record.get("source_file_fix"),
    )


def load_pairs(path: str | Path) -> tuple[list[BugFixPair], list[RecordError]]:
    """Load bug-fix pairs from a JSONL file.

    Malformed records are collected into the returned error list rather
    than aborting the load; duplicate pair_ids keep the first occurrence.
    Raises :class:`DatasetError` when no valid pair remains.
    """
    pairs, errors = read_valid(path, _validate_pair)
    seen_ids: set[str] = set()
    unique: list[BugFixPair] = []
    for pair in pairs:
        if pair.pair_id in seen_ids:
            errors.append(RecordError(0, f"duplicate pair_id {pair.pair_id!r} (first kept)"))
            continue
        seen_ids.add(pair.pair_id)
        unique.append(pair)
    if not unique:
        raise DatasetError(f"no valid pairs in {path}")
    return unique, errors


def convert_manysstubs_record(record: dict, index: int) -> dict:
    """Map the public mined-pairs field names onto the pipeline schema.

    Best-effort shim: tolerates the handful of field spellings seen in
    the wild and derives the preceding context from the pre-fix file
    when a line number is available.
    """
    bug_text = record.get("before") or record.get("buggy_line") or record.get("bug_text")
    fix_text = record.get("after") or record.get("fixed_line") or record.get("fix_text")
    if bug_text is None or fix_text is None:
        raise ValueError("cannot find bug/fix statement fields")
    source_bug = record.get("sourceBeforeFix")
    source_fix = record.get("sourceAfterFix")
    context = record.get("context_before")
    if context is None and source_bug is not None:
        line_num = record.get("bugLineNum")
        if isinstance(line_num, int) and line_num > 0:
            context = "".join(source_bug.splitlines(keepends=True)[: line_num - 1])
        else:
            idx = source_bug.find(bug_text)
            context = source_bug[:idx] if idx >= 0 else ""
    pair_id = record.get("pair_id")
    if pair_id is None:
        project = record.get("projectName", "unknown")
        sha = record.get("fixCommitSHA1", "")[:12]
        pair_id = f"{project}:{sha}:{index}"
    commits = record.get("commits_until_fix")
    if commits is None:
        commits = record.get("commitsBetween", record.get("numCommits", 0))
    return {
        "pair_id": str(pair_id),
        "bug_text": bug_text,
        "fix_text": fix_text,
        "context_before": context or "",
        "bug_category": record.get("bugType", record.get("bug_category", OTHER_CATEGORY)),
        "commits_until_fix": int(commits),
        "source_file_bug": source_bug,
        "source_file_fix": source_fix,
    }


def stratify(
    pairs: Sequence[BugFixPair],
    reports: Mapping[tuple[str, str], Mapping],
    include_unsound: bool = False,
) -> dict[str, ExposureCategory]:
    """Assign each pair an exposure category from its two variant reports.

    ``reports`` maps (pair_id, variant) to a membership report carrying
    at least ``seen`` and ``unsound``. Pairs with an unsound variant are
    excluded unless ``include_unsound`` is set; a missing report raises.
    """
    categories: dict[str, ExposureCategory] = {}
    excluded = 0
    for pair in pairs:
        try:
            bug = reports[(pair.pair_id, "bug")]
            fix = reports[(pair.pair_id, "fix")]
        except KeyError as exc:
            raise DatasetError(
                f"pair {pair.pair_id!r} is missing a report for variant {exc.args[0][1]!r}"
            ) from None
        if not include_unsound and (bug["unsound"] or fix["unsound"]):
            excluded += 1
            continue
        categories[pair.pair_id] = categorize(bool(bug["seen"]), bool(fix["seen"]))
    if excluded:
        logger.info("excluded %d pairs with unsound membership queries", excluded)
    return categories


@dataclass(frozen=True)
class CategorySummary:
    count: int
    fraction: float
    mean_commits: float | None


@dataclass(frozen=True)
class ExposureSummary:
    """Per-category counts and mean bug lifetimes, plus a totals row."""

    per_category: dict[ExposureCategory, CategorySummary]
    total_count: int
    total_mean_commits: float | None


def summarize_exposure(
    pairs: Sequence[BugFixPair],
    categories: Mapping[str, ExposureCategory],
) -> ExposureSummary:
    """Counts, fractions of total, and mean commits-until-fix per category."""
    categorized = [p for p in pairs if p.pair_id in categories]
    if not categorized:
        raise DatasetError("no categorized pairs to summarize")
    total = len(categorized)
    per: dict[ExposureCategory, CategorySummary] = {}
    for cat in CATEGORY_ORDER:
        members = [p for p in categorized if categories[p.pair_id] is cat]
        mean = (
            sum(p.commits_until_fix for p in members) / len(members) if members else None
        )
        per[cat] = CategorySummary(len(members), len(members) / total, mean)
    overall = sum(p.commits_until_fix for p in categorized) / total
    return ExposureSummary(per_category=per, total_count=total, total_mean_commits=overall)


def sample_balanced(
    pairs: Sequence[BugFixPair],
    categories: Mapping[str, ExposureCategory],
    per_category_n: int,
    seed: int,
    which: Iterable[ExposureCategory] = CATEGORY_ORDER,
) -> list[BugFixPair]:
    """Uniform, seeded, without-replacement sample of each category.

    Categories smaller than the request are taken whole (with a warning),
    mirroring the equal-samples-per-condition protocol.
    """
    rng = random.Random(seed)
    chosen: list[BugFixPair] = []
    by_cat: dict[ExposureCategory, list[BugFixPair]] = {cat: [] for cat in which}
    for pair in sorted(pairs, key=lambda p: p.pair_id):
        cat = categories.get(pair.pair_id)
        if cat in by_cat:
            by_cat[cat].append(pair)
    for cat in which:
        members = by_cat[cat]
        if per_category_n >= len(members):
            if per_category_n > len(members):
                logger.warning(
                    "category %s has only %d pairs (requested %d); taking all",
                    cat.value,
                    len(members),
                    per_category_n,
                )
            chosen.extend(members)
        else:
            chosen.extend(rng.sample(members, per_category_n))
    return chosen
