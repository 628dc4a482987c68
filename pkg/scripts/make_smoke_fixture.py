#!/usr/bin/env python3
"""Regenerate the bundled smoke fixture under fixtures/smoke/.

The fixture is a small fully-synthetic corpus plus twelve bug-fix pairs,
three per exposure category, with the variant ground truth planted into
the corpus documents. Deterministic: rerunning this script reproduces
identical files.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import random  # noqa: E402

from synth import corpus_for, make_planted_pair, pair_to_record  # noqa: E402

from exposure_probe.dataset import CATEGORY_ORDER  # noqa: E402


def main() -> None:
    out_dir = ROOT / "fixtures" / "smoke"
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(2024)
    planted = []
    i = 0
    for category in CATEGORY_ORDER:
        for _ in range(3):
            planted.append(make_planted_pair(rng, f"smoke-{i:02d}", category))
            i += 1
    docs = corpus_for(planted, rng, background_docs=15)

    with open(out_dir / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc_id, content in docs:
            fh.write(json.dumps({"id": doc_id, "content": content}, sort_keys=True) + "\n")
    with open(out_dir / "pairs.jsonl", "w", encoding="utf-8") as fh:
        for item in planted:
            fh.write(json.dumps(pair_to_record(item.pair), sort_keys=True) + "\n")

    config = {
        "corpus": "fixtures/smoke/corpus.jsonl",
        "pairs": "fixtures/smoke/pairs.jsonl",
        "out": "smoke-run",
        "target_fpr": 1e-9,
        "seed": 7,
    }
    (out_dir / "run.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    print(f"wrote fixture to {out_dir}")


if __name__ == "__main__":
    main()
