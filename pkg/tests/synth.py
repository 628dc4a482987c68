"""Synthetic corpus and pair builders shared across the test suite.

Everything is driven by an explicit random.Random so fixtures are
reproducible; planted pairs embed a variant (with its full surrounding
file) into corpus documents so membership ground truth is known by
construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from exposure_probe.dataset import BugFixPair, ExposureCategory

# Canonical-safe characters (no spaces or newlines).
CANONICAL_ALPHABET = (
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_=+-*;(){}."
)

WORD_CHARS = "abcdefghijklmnopqrstuvwxyz"


def rand_canonical(rng: random.Random, n: int) -> str:
    """Random canonical text: n tokens, no spaces or newlines."""
    return "".join(rng.choice(CANONICAL_ALPHABET) for _ in range(n))


def rand_word(rng: random.Random, lo: int = 3, hi: int = 9) -> str:
    return "".join(rng.choice(WORD_CHARS) for _ in range(rng.randint(lo, hi)))


def rand_code_lines(rng: random.Random, n_lines: int) -> str:
    """Java-ish lines with spaces and trailing newlines."""
    lines = []
    for _ in range(n_lines):
        lines.append(f"{rand_word(rng)} {rand_word(rng)} = {rand_word(rng)}{rng.randint(0, 99)};")
    return "".join(line + "\n" for line in lines)


@dataclass
class PlantedPair:
    """A pair with known ground truth: which variants the corpus holds."""

    pair: BugFixPair
    category: ExposureCategory
    bug_doc: str
    fix_doc: str


def make_planted_pair(
    rng: random.Random,
    pair_id: str,
    category: ExposureCategory,
    bug_category: str = "CHANGE_OPERATOR",
    commits: int | None = None,
    context_lines: int = 12,
    trailer_lines: int = 8,
) -> PlantedPair:
    """Build a pair whose variants sit mid-file with ample context, so
    padded queries are balanced and sound."""
    context = rand_code_lines(rng, context_lines)
    trailer = rand_code_lines(rng, trailer_lines)
    name = rand_word(rng, 6, 10)
    # The variants differ in their first and last few characters so that
    # no 50-token window of one variant's padded query can fall entirely
    # inside text shared with the other variant's document; the head also
    # carries the pair-unique name so short-context language models keep
    # the pair identity while generating the line.
    bug_text = f"bug{name}({name} + 1);"
    fix_text = f"fix{name}({name} - 2);"
    bug_doc = context + bug_text + "\n" + trailer
    fix_doc = context + fix_text + "\n" + trailer
    pair = BugFixPair(
        pair_id=pair_id,
        bug_text=bug_text,
        fix_text=fix_text,
        context_before=context,
        bug_category=bug_category,
        commits_until_fix=commits if commits is not None else rng.randint(0, 50),
        source_file_bug=bug_doc,
        source_file_fix=fix_doc,
    )
    return PlantedPair(pair=pair, category=category, bug_doc=bug_doc, fix_doc=fix_doc)


def corpus_for(
    planted: list[PlantedPair],
    rng: random.Random,
    background_docs: int = 20,
    copies: int = 1,
) -> list[tuple[str, str]]:
    """Corpus documents realizing each pair's exposure category."""
    docs: list[tuple[str, str]] = []
    for item in planted:
        bug_in = item.category in (ExposureCategory.ONLY_BUG, ExposureCategory.BOTH)
        fix_in = item.category in (ExposureCategory.ONLY_FIX, ExposureCategory.BOTH)
        for copy in range(copies):
            if bug_in:
                docs.append((f"{item.pair.pair_id}/bug/{copy}", item.bug_doc))
            if fix_in:
                docs.append((f"{item.pair.pair_id}/fix/{copy}", item.fix_doc))
    for i in range(background_docs):
        docs.append((f"background/{i}", rand_code_lines(rng, rng.randint(6, 14))))
    return docs


def pair_to_record(pair: BugFixPair) -> dict:
    record = {
        "pair_id": pair.pair_id,
        "bug_text": pair.bug_text,
        "fix_text": pair.fix_text,
        "context_before": pair.context_before,
        "bug_category": pair.bug_category,
        "commits_until_fix": pair.commits_until_fix,
    }
    if pair.source_file_bug is not None:
        record["source_file_bug"] = pair.source_file_bug
    if pair.source_file_fix is not None:
        record["source_file_fix"] = pair.source_file_fix
    return record
