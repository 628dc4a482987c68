"""Matching sampled completions against bug and fix variants.

Each pair's completions are matched by exact string comparison after
isolating the first generated statement; the (any_bug, any_fix) truth
table then yields four disjoint outcome categories whose per-stratum
fractions sum to one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .dataset import BugFixPair, ExposureCategory

logger = logging.getLogger(__name__)

EXPECTED_COMPLETIONS = 5

#: "line" truncates the completion at its first newline and trims both
#: sides before comparing; "substring" requires the trimmed target to
#: appear anywhere in the raw completion (sensitivity mode).
MATCH_MODES = ("line", "substring")


class MatchCategory(str, Enum):
    FIX_WITHOUT_BUGS = "FixWithoutBugs"
    BUG_WITHOUT_FIXES = "BugWithoutFixes"
    MIX_BUG_FIX = "MixBugFix"
    NO_BUG_NO_FIX = "NoBugNoFix"


OUTCOME_ORDER = (
    MatchCategory.FIX_WITHOUT_BUGS,
    MatchCategory.BUG_WITHOUT_FIXES,
    MatchCategory.MIX_BUG_FIX,
    MatchCategory.NO_BUG_NO_FIX,
)


@dataclass(frozen=True)
class GenerationRecord:
    """Sampled completions for one pair plus the decoding settings used."""

    pair_id: str
    completions: tuple[str, ...]
    decoding: Mapping[str, object]

    def __post_init__(self) -> None:
        if not self.completions:
            raise ValueError("completions must be non-empty")


def generation_from_record(record: dict) -> GenerationRecord:
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    if "pair_id" not in record:
        raise ValueError("missing required field 'pair_id'")
    completions = record.get("completions")
    if not isinstance(completions, list) or not completions:
        raise ValueError("field 'completions' must be a non-empty list")
    if not all(isinstance(c, str) for c in completions):
        raise ValueError("completions must be strings")
    decoding = record.get("decoding")
    if not isinstance(decoding, dict):
        raise ValueError("missing decoding metadata")
    if len(completions) != EXPECTED_COMPLETIONS:
        logger.warning(
            "pair %s has %d completions (expected %d)",
            record["pair_id"],
            len(completions),
            EXPECTED_COMPLETIONS,
        )
    return GenerationRecord(
        pair_id=record["pair_id"],
        completions=tuple(completions),
        decoding=decoding,
    )


def match_completion(completion: str, target: str, mode: str = "line") -> bool:
    """Exact comparison of the completion's first statement against the target."""
    if mode == "line":
        first_line = completion.split("\n", 1)[0]
        return first_line.strip() == target.strip()
    if mode == "substring":
        return target.strip() in completion
    raise ValueError(f"unknown match mode {mode!r}")


@dataclass(frozen=True)
class MatchOutcome:
    pair_id: str
    any_bug: bool
    any_fix: bool
    category: MatchCategory

    def to_record(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "any_bug": self.any_bug,
            "any_fix": self.any_fix,
            "category": self.category.value,
        }


def outcome_category(any_bug: bool, any_fix: bool) -> MatchCategory:
    if any_bug and any_fix:
        return MatchCategory.MIX_BUG_FIX
    if any_bug:
        return MatchCategory.BUG_WITHOUT_FIXES
    if any_fix:
        return MatchCategory.FIX_WITHOUT_BUGS
    return MatchCategory.NO_BUG_NO_FIX


def classify_outcome(
    record: GenerationRecord,
    pair: BugFixPair,
    mode: str = "line",
) -> MatchOutcome:
    """OR the per-completion matches and map through the truth table."""
    any_bug = any(match_completion(c, pair.bug_text, mode) for c in record.completions)
    any_fix = any(match_completion(c, pair.fix_text, mode) for c in record.completions)
    return MatchOutcome(
        pair_id=record.pair_id,
        any_bug=any_bug,
        any_fix=any_fix,
        category=outcome_category(any_bug, any_fix),
    )


@dataclass(frozen=True)
class StratumRates:
    """Outcome mix of one exposure stratum; fractions sum to one."""

    condition: ExposureCategory
    counts: dict[MatchCategory, int]
    total: int

    def fraction(self, outcome: MatchCategory) -> float | None:
        if self.total == 0:
            return None
        return self.counts[outcome] / self.total


def outcome_rates(
    outcomes: Sequence[MatchOutcome],
    categories: Mapping[str, ExposureCategory],
) -> dict[ExposureCategory, StratumRates]:
    """Fractions of the four outcomes within each exposure stratum.

    Outcomes whose pair has no exposure category are skipped; empty
    strata keep an explicit zero-total marker rather than 0/0 rates.
    """
    rates: dict[ExposureCategory, StratumRates] = {}
    skipped = 0
    grouped: dict[ExposureCategory, list[MatchOutcome]] = {}
    for outcome in outcomes:
        condition = categories.get(outcome.pair_id)
        if condition is None:
            skipped += 1
            continue
        grouped.setdefault(condition, []).append(outcome)
    if skipped:
        logger.info("skipped %d outcomes without an exposure category", skipped)
    for condition in ExposureCategory:
        members = grouped.get(condition, [])
        counts = {
            outcome: sum(1 for m in members if m.category is outcome)
            for outcome in OUTCOME_ORDER
        }
        rates[condition] = StratumRates(condition=condition, counts=counts, total=len(members))
    return rates
