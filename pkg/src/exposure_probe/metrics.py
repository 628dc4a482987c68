"""Likelihood-based preference metrics over token probability sequences.

Seven per-sequence statistics are computed for the bug and the fix
variant of a pair; each metric's orientation (higher- or lower-is-
preferred) then decides which variant the scoring model favours.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .dataset import ExposureCategory

logger = logging.getLogger(__name__)

#: Report row order for the metric tables.
METRIC_NAMES = (
    "length",
    "perplexity",
    "min_prob",
    "max_prob",
    "gini",
    "geometric_mean",
    "arithmetic_mean",
)

#: Metrics where the larger value marks the preferred variant; the rest
#: (perplexity, gini) prefer the smaller value.
HIGHER_PREFERRED = frozenset(
    {"length", "min_prob", "max_prob", "geometric_mean", "arithmetic_mean"}
)

DEFAULT_PROB_FLOOR = 1e-12


class Preference(str, Enum):
    FIX = "Fix"
    BUG = "Bug"
    TIE = "Tie"


@dataclass(frozen=True)
class TokenProbSequence:
    """Per-token conditional probabilities for one variant of one pair."""

    pair_id: str
    variant: str
    tokens: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.probs):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.probs)} probabilities"
            )
        if not self.probs:
            raise ValueError("sequence must contain at least one token")


def sequence_from_record(record: dict, prob_floor: float = DEFAULT_PROB_FLOOR) -> TokenProbSequence:
    """Validate one wire record carrying "probs" or "logprobs" (exactly one).

    Zero (or sub-floor) probabilities are clamped to ``prob_floor`` so the
    log-domain metrics stay finite; negative probabilities and values
    above one are rejected.
    """
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    for name in ("pair_id", "variant"):
        if name not in record:
            raise ValueError(f"missing required field {name!r}")
    if record["variant"] not in ("bug", "fix"):
        raise ValueError(f"variant must be 'bug' or 'fix', got {record['variant']!r}")
    has_probs = "probs" in record
    has_logprobs = "logprobs" in record
    if has_probs == has_logprobs:
        raise ValueError("exactly one of 'probs' or 'logprobs' is required")
    tokens = record.get("tokens")
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise ValueError("field 'tokens' must be a list of strings")
    raw = record["probs"] if has_probs else record["logprobs"]
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) for v in raw):
        raise ValueError("probability field must be a list of numbers")
    probs: list[float] = []
    clamped = 0
    for value in raw:
        p = math.exp(value) if has_logprobs else float(value)
        if p < 0.0:
            raise ValueError(f"negative probability {p}")
        if p > 1.0:
            raise ValueError(f"probability {p} above 1")
        if p < prob_floor:
            p = prob_floor
            clamped += 1
        probs.append(p)
    if clamped:
        logger.warning(
            "pair %s %s: clamped %d probabilities to the %g floor",
            record["pair_id"],
            record["variant"],
            clamped,
            prob_floor,
        )
    return TokenProbSequence(
        pair_id=record["pair_id"],
        variant=record["variant"],
        tokens=tuple(tokens),
        probs=tuple(probs),
    )


@dataclass(frozen=True)
class MetricVector:
    """The seven per-sequence statistics."""

    length: int
    perplexity: float
    min_prob: float
    max_prob: float
    gini: float
    geometric_mean: float
    arithmetic_mean: float

    def value(self, metric_name: str) -> float:
        if metric_name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {metric_name!r}")
        return getattr(self, metric_name)

    def to_record(self, pair_id: str, variant: str) -> dict:
        record = {"pair_id": pair_id, "variant": variant}
        for name in METRIC_NAMES:
            record[name] = getattr(self, name)
        return record


def metric_vector(seq: TokenProbSequence) -> MetricVector:
    """Compute all seven metrics for one sequence.

    Perplexity and the geometric mean accumulate in log space so
    64-token products cannot underflow.
    """
    probs = seq.probs
    n = len(probs)
    for p in probs:
        if not (0.0 < p <= 1.0):
            raise ValueError(f"probability {p} outside (0, 1]")
    log_sum = sum(math.log(p) for p in probs)
    mean = sum(probs) / n
    if n == 1:
        gini = 0.0
    else:
        abs_diff = sum(abs(a - b) for a in probs for b in probs)
        gini = abs_diff / (2 * n * n * mean)
    return MetricVector(
        length=n,
        perplexity=math.exp(-log_sum / n),
        min_prob=min(probs),
        max_prob=max(probs),
        gini=gini,
        geometric_mean=math.exp(log_sum / n),
        arithmetic_mean=mean,
    )


@dataclass(frozen=True)
class PreferenceVerdict:
    pair_id: str
    metric: str
    preferred: Preference

    def to_record(self) -> dict:
        return {"pair_id": self.pair_id, "metric": self.metric, "preferred": self.preferred.value}


def prefer(
    bug_metrics: MetricVector,
    fix_metrics: MetricVector,
    metric_name: str,
    pair_id: str = "",
) -> PreferenceVerdict:
    """Pick the preferred variant from one metric's orientation."""
    bug_value = bug_metrics.value(metric_name)
    fix_value = fix_metrics.value(metric_name)
    if bug_value == fix_value:
        preferred = Preference.TIE
    elif metric_name in HIGHER_PREFERRED:
        preferred = Preference.FIX if fix_value > bug_value else Preference.BUG
    else:
        preferred = Preference.FIX if fix_value < bug_value else Preference.BUG
    return PreferenceVerdict(pair_id=pair_id, metric=metric_name, preferred=preferred)


def score_pair(
    pair_id: str,
    bug_seq: TokenProbSequence,
    fix_seq: TokenProbSequence,
) -> tuple[MetricVector, MetricVector, list[PreferenceVerdict]]:
    """Metric vectors for both variants plus one verdict per metric."""
    bug_vec = metric_vector(bug_seq)
    fix_vec = metric_vector(fix_seq)
    verdicts = [prefer(bug_vec, fix_vec, name, pair_id) for name in METRIC_NAMES]
    return bug_vec, fix_vec, verdicts


@dataclass(frozen=True)
class PreferenceRow:
    """One cell group of the preference tables: the share of non-tie
    verdicts favouring each variant under one exposure condition."""

    metric: str
    condition: ExposureCategory
    fix_fraction: float | None
    bug_fraction: float | None
    ties: int
    n: int


def preference_table(
    verdicts: Sequence[PreferenceVerdict],
    categories: Mapping[str, ExposureCategory],
    condition: ExposureCategory,
) -> list[PreferenceRow]:
    """Fix/bug fractions per metric over the pairs in one exposure condition.

    Fractions are over non-tie verdicts and sum to one; ties are counted
    separately. An empty condition yields explicit empty cells, never 0/0.
    """
    rows: list[PreferenceRow] = []
    in_condition = [v for v in verdicts if categories.get(v.pair_id) is condition]
    for name in METRIC_NAMES:
        relevant = [v for v in in_condition if v.metric == name]
        fix = sum(1 for v in relevant if v.preferred is Preference.FIX)
        bug = sum(1 for v in relevant if v.preferred is Preference.BUG)
        ties = sum(1 for v in relevant if v.preferred is Preference.TIE)
        decided = fix + bug
        rows.append(
            PreferenceRow(
                metric=name,
                condition=condition,
                fix_fraction=fix / decided if decided else None,
                bug_fraction=bug / decided if decided else None,
                ties=ties,
                n=len(relevant),
            )
        )
    return rows
