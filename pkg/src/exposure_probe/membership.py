"""Padded membership queries against a portrait.

A query is sound only when it is long enough to be guaranteed to contain
one complete stored window regardless of stride alignment, i.e. at least
stride + width - 1 tokens. Shorter snippets are padded from both sides
with surrounding document context before querying.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import BugFixPair, ExposureCategory, categorize
from .portrait import CanonicalStream, Portrait, PortraitParams, canonicalize, window_starts

DEFAULT_THRESHOLD = 0.9


class MembershipError(ValueError):
    """Query construction failed (bad span, missing snippet, no context)."""


def min_sound_length(params: PortraitParams) -> int:
    """Shortest query length guaranteed to contain a stored window."""
    return params.stride + params.width - 1


@dataclass(frozen=True)
class PaddedQuery:
    """A snippet extended with document context up to the sound length.

    Spans are half-open [start, end) positions in the document's
    canonical stream; ``unsound`` marks queries the document could not
    pad far enough.
    """

    snippet_span: tuple[int, int]
    padded_span: tuple[int, int]
    sample_len: int
    query_text: str
    unsound: bool

    @property
    def padded_len(self) -> int:
        return self.padded_span[1] - self.padded_span[0]


def pad_query(
    document: CanonicalStream,
    snippet_span: tuple[int, int],
    params: PortraitParams,
) -> PaddedQuery:
    """Extend ``snippet_span`` alternately left and right, one token at a
    time starting left, until the sound length is reached or the document
    is exhausted; a side that runs out hands the remainder to the other.
    """
    start, end = snippet_span
    length = len(document)
    if not (0 <= start <= end <= length):
        raise MembershipError(
            f"snippet span ({start}, {end}) out of bounds for document of {length} tokens"
        )
    sample_len = end - start
    target = min_sound_length(params)
    lo, hi = start, end
    grow_left = True
    while hi - lo < target and (lo > 0 or hi < length):
        if grow_left:
            if lo > 0:
                lo -= 1
            elif hi < length:
                hi += 1
        else:
            if hi < length:
                hi += 1
            elif lo > 0:
                lo -= 1
        grow_left = not grow_left
    return PaddedQuery(
        snippet_span=(start, end),
        padded_span=(lo, hi),
        sample_len=sample_len,
        query_text=document.chars[lo:hi],
        unsound=hi - lo < target,
    )


@dataclass(frozen=True)
class ExposureReport:
    """Result of sliding a width-sized window across one padded query."""

    hit_window_count: int
    expected_aligned_count: int
    exposure_score: float
    coverage_fraction: float
    seen: bool
    unsound: bool

    def to_record(self, pair_id: str, variant: str) -> dict:
        return {
            "pair_id": pair_id,
            "variant": variant,
            "hits": self.hit_window_count,
            "expected": self.expected_aligned_count,
            "score": self.exposure_score,
            "coverage": self.coverage_fraction,
            "seen": self.seen,
            "unsound": self.unsound,
        }


def report_from_record(record: dict) -> ExposureReport:
    return ExposureReport(
        hit_window_count=record["hits"],
        expected_aligned_count=record["expected"],
        exposure_score=record["score"],
        coverage_fraction=record["coverage"],
        seen=record["seen"],
        unsound=record["unsound"],
    )


def query_exposure(
    portrait: Portrait,
    query: PaddedQuery,
    threshold: float = DEFAULT_THRESHOLD,
) -> ExposureReport:
    """Count hit windows over every one-token-shifted position of the query.

    The exposure score normalizes raw hits by the number of windows the
    stride grid would store for a text of this length (anchored at the
    query start), so duplicated corpus content can push it above 1.
    """
    params = portrait.params
    text = query.query_text
    length = len(text)
    w = params.width
    if length < w:
        return ExposureReport(
            hit_window_count=0,
            expected_aligned_count=1,
            exposure_score=0.0,
            coverage_fraction=0.0,
            seen=False,
            unsound=True,
        )
    expected = len(window_starts(length, params))
    hits = []
    for pos in range(length - w + 1):
        if portrait.contains(text[pos : pos + w]):
            hits.append(pos)
    covered = 0
    last_end = 0
    for pos in hits:
        lo = max(pos, last_end)
        covered += max(0, pos + w - lo)
        last_end = max(last_end, pos + w)
    score = len(hits) / expected
    unsound = query.unsound or length < min_sound_length(params)
    return ExposureReport(
        hit_window_count=len(hits),
        expected_aligned_count=expected,
        exposure_score=score,
        coverage_fraction=covered / length,
        seen=score >= threshold and not unsound,
        unsound=unsound,
    )


def locate_snippet(document: CanonicalStream, snippet: str, context: str = "") -> tuple[int, int]:
    """Find the canonical span of ``snippet`` inside ``document``.

    Tries context + snippet first so repeated statements resolve to the
    right occurrence; falls back to the first occurrence of the snippet
    alone.
    """
    snippet_canon = canonicalize(snippet).chars
    if not snippet_canon:
        raise MembershipError("snippet is empty after canonicalization")
    context_canon = canonicalize(context).chars
    if context_canon:
        idx = document.chars.find(context_canon + snippet_canon)
        if idx >= 0:
            start = idx + len(context_canon)
            return start, start + len(snippet_canon)
    idx = document.chars.find(snippet_canon)
    if idx < 0:
        raise MembershipError("snippet does not occur in the document")
    return idx, idx + len(snippet_canon)


def variant_query(
    pair: BugFixPair,
    variant: str,
    params: PortraitParams,
) -> PaddedQuery:
    """Build the padded query for one variant of a pair.

    Uses the variant-matched full file when available; otherwise the
    preceding context plus the statement stands in as the document, so
    padding can only extend left.
    """
    source = pair.source_file(variant)
    text = pair.variant_text(variant)
    if source is not None:
        document = canonicalize(source)
        span = locate_snippet(document, text, pair.context_before)
    else:
        document = canonicalize(pair.context_before + text)
        snippet_len = len(canonicalize(text).chars)
        if snippet_len == 0:
            raise MembershipError("snippet is empty after canonicalization")
        span = (len(document) - snippet_len, len(document))
    return pad_query(document, span, params)


def classify_pair(
    portrait: Portrait,
    pair: BugFixPair,
    threshold: float = DEFAULT_THRESHOLD,
) -> tuple[ExposureReport, ExposureReport, ExposureCategory]:
    """Query both variants and assign the four-way exposure category."""
    bug_report = query_exposure(portrait, variant_query(pair, "bug", portrait.params), threshold)
    fix_report = query_exposure(portrait, variant_query(pair, "fix", portrait.params), threshold)
    return bug_report, fix_report, categorize(bug_report.seen, fix_report.seen)
