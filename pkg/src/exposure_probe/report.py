"""Table and figure-data emission.

Every emitter is a pure function from computed statistics to CSV text
(plus a full-precision dict for the JSON sidecar), so report output is
byte-identical across reruns. CSV fractions are rendered with two
decimals; undefined cells carry an explicit marker instead of 0/0.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

from .dataset import CATEGORY_ORDER, ExposureCategory, ExposureSummary
from .genmatch import OUTCOME_ORDER, StratumRates
from .metrics import METRIC_NAMES, Preference, PreferenceRow, PreferenceVerdict

EMPTY_CELL = "—"

#: Display names used in the category-count table.
CATEGORY_LABELS = {
    ExposureCategory.NEITHER: "Neither seen",
    ExposureCategory.BOTH: "Both seen",
    ExposureCategory.ONLY_BUG: "Only Bug",
    ExposureCategory.ONLY_FIX: "Only Fix",
}

XOR_CONDITIONS = (ExposureCategory.ONLY_FIX, ExposureCategory.ONLY_BUG)
AND_NOR_CONDITIONS = (ExposureCategory.BOTH, ExposureCategory.NEITHER)


def _round_half_up(value: float) -> int:
    return int(value + 0.5)


def emit_exposure_table(summary: ExposureSummary) -> str:
    """Category / Count / #Commits / % table with a totals row."""
    lines = ["Category,Count,#Commits,%"]
    for category in CATEGORY_ORDER:
        cell = summary.per_category[category]
        commits = EMPTY_CELL if cell.mean_commits is None else str(_round_half_up(cell.mean_commits))
        pct = f"{_round_half_up(100 * cell.fraction)}%"
        lines.append(f"{CATEGORY_LABELS[category]},{cell.count},{commits},{pct}")
    total_commits = (
        EMPTY_CELL
        if summary.total_mean_commits is None
        else str(_round_half_up(summary.total_mean_commits))
    )
    lines.append(f"Total,{summary.total_count},{total_commits},")
    return "\n".join(lines) + "\n"


def exposure_table_sidecar(summary: ExposureSummary) -> dict:
    return {
        "categories": {
            cat.value: asdict(cell) for cat, cell in summary.per_category.items()
        },
        "total_count": summary.total_count,
        "total_mean_commits": summary.total_mean_commits,
    }


def _fraction_cell(value: float | None) -> str:
    return EMPTY_CELL if value is None else f"{value:.2f}"


def emit_preference_tables(rows: Sequence[PreferenceRow]) -> str:
    """Tidy preference table: one row per (metric, condition)."""
    lines = ["metric,condition,fix_fraction,bug_fraction,ties,n"]
    for row in rows:
        lines.append(
            f"{row.metric},{row.condition.value},"
            f"{_fraction_cell(row.fix_fraction)},{_fraction_cell(row.bug_fraction)},"
            f"{row.ties},{row.n}"
        )
    return "\n".join(lines) + "\n"


def preference_sidecar(rows: Sequence[PreferenceRow]) -> list[dict]:
    return [
        {
            "metric": row.metric,
            "condition": row.condition.value,
            "fix_fraction": row.fix_fraction,
            "bug_fraction": row.bug_fraction,
            "ties": row.ties,
            "n": row.n,
        }
        for row in rows
    ]


def category_breakdown(
    verdicts: Sequence[PreferenceVerdict],
    exposure: Mapping[str, ExposureCategory],
    bug_category: Mapping[str, str],
    conditions: Sequence[ExposureCategory] = XOR_CONDITIONS,
) -> list[dict]:
    """Fix/bug verdict counts per bug category, metric, and condition."""
    rows: list[dict] = []
    labels = sorted(set(bug_category.values()))
    for metric in METRIC_NAMES:
        for condition in conditions:
            for label in labels:
                relevant = [
                    v
                    for v in verdicts
                    if v.metric == metric
                    and exposure.get(v.pair_id) is condition
                    and bug_category.get(v.pair_id) == label
                ]
                if not relevant:
                    continue
                rows.append(
                    {
                        "metric": metric,
                        "condition": condition.value,
                        "bug_category": label,
                        "fix_count": sum(1 for v in relevant if v.preferred is Preference.FIX),
                        "bug_count": sum(1 for v in relevant if v.preferred is Preference.BUG),
                        "ties": sum(1 for v in relevant if v.preferred is Preference.TIE),
                    }
                )
    return rows


def emit_category_breakdown(rows: Sequence[dict]) -> str:
    lines = ["metric,condition,bug_category,fix_count,bug_count,ties"]
    for row in rows:
        lines.append(
            f"{row['metric']},{row['condition']},{row['bug_category']},"
            f"{row['fix_count']},{row['bug_count']},{row['ties']}"
        )
    return "\n".join(lines) + "\n"


def emit_generation_rates(rates: Mapping[ExposureCategory, StratumRates]) -> str:
    """Tidy outcome-rate table: one row per (condition, outcome)."""
    lines = ["condition,outcome,count,fraction"]
    for condition in CATEGORY_ORDER:
        stratum = rates[condition]
        for outcome in OUTCOME_ORDER:
            fraction = stratum.fraction(outcome)
            lines.append(
                f"{condition.value},{outcome.value},"
                f"{stratum.counts[outcome]},{_fraction_cell(fraction)}"
            )
    return "\n".join(lines) + "\n"


def generation_rates_sidecar(rates: Mapping[ExposureCategory, StratumRates]) -> list[dict]:
    return [
        {
            "condition": condition.value,
            "outcome": outcome.value,
            "count": rates[condition].counts[outcome],
            "fraction": rates[condition].fraction(outcome),
            "total": rates[condition].total,
        }
        for condition in CATEGORY_ORDER
        for outcome in OUTCOME_ORDER
    ]


@dataclass(frozen=True)
class ExperimentManifest:
    """Everything needed to re-run a pipeline invocation bit-identically
    with the reference model."""

    tool_version: str
    portrait_digest: str | None
    dataset_digest: str | None
    scorer: str
    decoding: Mapping[str, object]
    threshold: float
    seeds: Mapping[str, int]
    config: Mapping[str, object]

    def to_json(self) -> str:
        payload = {
            "tool_version": self.tool_version,
            "portrait_digest": self.portrait_digest,
            "dataset_digest": self.dataset_digest,
            "scorer": self.scorer,
            "decoding": dict(self.decoding),
            "threshold": self.threshold,
            "seeds": dict(self.seeds),
            "config": dict(self.config),
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
