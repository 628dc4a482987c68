"""Thin HTTP client for the service, used by the CLI's --server mode."""

from __future__ import annotations

from typing import Sequence

import httpx

from ..dataset import BugFixPair


class ServiceClient:
    """Talks to a running exposure-probe service."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def health(self) -> dict:
        response = self._client.get("/health")
        response.raise_for_status()
        return response.json()

    def classify_pairs(
        self,
        portrait_name: str,
        pairs: Sequence[BugFixPair],
        threshold: float = 0.9,
        batch_size: int = 100,
    ) -> list[dict]:
        """Classify pairs remotely; returns records in the exposure.jsonl
        wire shape (two per pair)."""
        records: list[dict] = []
        for start in range(0, len(pairs), batch_size):
            batch = pairs[start : start + batch_size]
            payload = {
                "pairs": [
                    {
                        "pair_id": p.pair_id,
                        "bug_text": p.bug_text,
                        "fix_text": p.fix_text,
                        "context_before": p.context_before,
                        "bug_category": p.bug_category,
                        "commits_until_fix": p.commits_until_fix,
                        "source_file_bug": p.source_file_bug,
                        "source_file_fix": p.source_file_fix,
                    }
                    for p in batch
                ],
                "threshold": threshold,
            }
            response = self._client.post(f"/portraits/{portrait_name}/classify", json=payload)
            response.raise_for_status()
            for result in response.json()["results"]:
                for variant in ("bug", "fix"):
                    report = result[variant]
                    records.append(
                        {
                            "pair_id": result["pair_id"],
                            "variant": variant,
                            "hits": report["hits"],
                            "expected": report["expected"],
                            "score": report["score"],
                            "coverage": report["coverage"],
                            "seen": report["seen"],
                            "unsound": report["unsound"],
                        }
                    )
        return records
