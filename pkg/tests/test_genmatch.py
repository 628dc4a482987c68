import itertools
import math
import random

import pytest

from exposure_probe.dataset import BugFixPair, ExposureCategory
from exposure_probe.genmatch import (
    OUTCOME_ORDER,
    GenerationRecord,
    MatchCategory,
    MatchOutcome,
    classify_outcome,
    generation_from_record,
    match_completion,
    outcome_category,
    outcome_rates,
)


def pair(bug="return x + 1;", fix="return x - 1;"):
    return BugFixPair(
        pair_id="p",
        bug_text=bug,
        fix_text=fix,
        context_before="",
        bug_category="CHANGE_OPERATOR",
        commits_until_fix=0,
    )


def record(completions, pair_id="p"):
    return GenerationRecord(
        pair_id=pair_id,
        completions=tuple(completions),
        decoding={"temperature": 0.8, "top_p": 0.95, "max_new_tokens": 64, "context_limit": 2048},
    )


class TestMatchCompletion:
    def test_truncates_at_first_line(self):
        assert match_completion("return x + 1;\nint y = 2;", "return x + 1;")

    def test_inequality(self):
        assert not match_completion("return x - 1;", "return x + 1;")

    def test_whitespace_trimmed(self):
        # Oracle: an independent trim-and-compare agrees.
        completion, target = "  return x + 1;  ", "return x + 1;"
        oracle = completion.strip() == target.strip()
        assert match_completion(completion, target) == oracle is True

    def test_substring_mode(self):
        completion = "int z = 0; return x + 1; // done"
        assert not match_completion(completion, "return x + 1;", mode="line")
        assert match_completion(completion, "return x + 1;", mode="substring")

    def test_substring_mode_no_truncation(self):
        completion = "filler\nreturn x + 1;\nmore"
        assert match_completion(completion, "return x + 1;", mode="substring")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            match_completion("a", "a", mode="fuzzy")


class TestClassifyOutcome:
    def test_truth_table(self):
        cases = {
            (True, False): MatchCategory.BUG_WITHOUT_FIXES,
            (False, True): MatchCategory.FIX_WITHOUT_BUGS,
            (True, True): MatchCategory.MIX_BUG_FIX,
            (False, False): MatchCategory.NO_BUG_NO_FIX,
        }
        for (any_bug, any_fix), want in cases.items():
            assert outcome_category(any_bug, any_fix) is want

    def test_bug_only_completions(self):
        outcome = classify_outcome(record(["return x + 1;", "noise", "noise", "noise", "noise"]), pair())
        assert outcome.category is MatchCategory.BUG_WITHOUT_FIXES

    def test_mixed_completions(self):
        outcome = classify_outcome(
            record(["return x + 1;", "return x - 1;", "noise", "noise", "noise"]), pair()
        )
        assert outcome.category is MatchCategory.MIX_BUG_FIX

    def test_no_matches(self):
        outcome = classify_outcome(record(["a", "b", "c", "d", "e"]), pair())
        assert outcome.category is MatchCategory.NO_BUG_NO_FIX
        assert not outcome.any_bug and not outcome.any_fix

    def test_permutation_invariant(self):
        completions = ["return x + 1;", "return x - 1;", "noise", "x", "y"]
        baseline = classify_outcome(record(completions), pair()).category
        for perm in itertools.permutations(completions):
            assert classify_outcome(record(list(perm)), pair()).category is baseline


class TestGenerationRecords:
    def test_valid_record(self):
        parsed = generation_from_record(
            {"pair_id": "p", "completions": ["a"] * 5, "decoding": {"temperature": 0.8}}
        )
        assert len(parsed.completions) == 5

    def test_non_five_completions_flagged_but_accepted(self, caplog):
        with caplog.at_level("WARNING"):
            parsed = generation_from_record(
                {"pair_id": "p", "completions": ["a", "b"], "decoding": {}}
            )
        assert len(parsed.completions) == 2
        assert "expected 5" in caplog.text

    def test_empty_completions_rejected(self):
        with pytest.raises(ValueError):
            generation_from_record({"pair_id": "p", "completions": [], "decoding": {}})

    def test_missing_decoding_rejected(self):
        with pytest.raises(ValueError, match="decoding"):
            generation_from_record({"pair_id": "p", "completions": ["a"]})


class TestOutcomeRates:
    def outcomes(self, spec):
        """spec: list of (pair_id, category)."""
        return [
            MatchOutcome(
                pair_id=pair_id,
                any_bug=category in (MatchCategory.BUG_WITHOUT_FIXES, MatchCategory.MIX_BUG_FIX),
                any_fix=category in (MatchCategory.FIX_WITHOUT_BUGS, MatchCategory.MIX_BUG_FIX),
                category=category,
            )
            for pair_id, category in spec
        ]

    def test_one_of_each(self):
        spec = [(f"p{i}", outcome) for i, outcome in enumerate(OUTCOME_ORDER)]
        categories = {f"p{i}": ExposureCategory.ONLY_BUG for i in range(4)}
        rates = outcome_rates(self.outcomes(spec), categories)
        stratum = rates[ExposureCategory.ONLY_BUG]
        for outcome in OUTCOME_ORDER:
            assert stratum.fraction(outcome) == 0.25

    def test_all_no_match(self):
        spec = [(f"p{i}", MatchCategory.NO_BUG_NO_FIX) for i in range(10)]
        categories = {f"p{i}": ExposureCategory.NEITHER for i in range(10)}
        stratum = outcome_rates(self.outcomes(spec), categories)[ExposureCategory.NEITHER]
        assert stratum.fraction(MatchCategory.NO_BUG_NO_FIX) == 1.0
        assert stratum.fraction(MatchCategory.MIX_BUG_FIX) == 0.0

    def test_fractions_sum_to_one(self):
        rng = random.Random(50)
        spec = []
        categories = {}
        for i in range(200):
            spec.append((f"p{i}", rng.choice(list(MatchCategory))))
            categories[f"p{i}"] = rng.choice(list(ExposureCategory))
        rates = outcome_rates(self.outcomes(spec), categories)
        for stratum in rates.values():
            if stratum.total:
                total = sum(stratum.fraction(o) for o in OUTCOME_ORDER)
                assert math.isclose(total, 1.0, abs_tol=1e-9)

    def test_empty_stratum_marker(self):
        rates = outcome_rates([], {})
        for stratum in rates.values():
            assert stratum.total == 0
            assert stratum.fraction(MatchCategory.MIX_BUG_FIX) is None

    def test_uncategorized_outcomes_skipped(self):
        spec = [("known", MatchCategory.MIX_BUG_FIX), ("unknown", MatchCategory.MIX_BUG_FIX)]
        categories = {"known": ExposureCategory.BOTH}
        rates = outcome_rates(self.outcomes(spec), categories)
        assert rates[ExposureCategory.BOTH].total == 1
