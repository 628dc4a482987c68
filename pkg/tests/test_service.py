import random

import pytest
from fastapi.testclient import TestClient

from exposure_probe.dataset import ExposureCategory
from exposure_probe.membership import classify_pair
from exposure_probe.portrait import PortraitParams, build_portrait, save_portrait
from exposure_probe.service import create_app

from synth import corpus_for, make_planted_pair, pair_to_record


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("service")
    rng = random.Random(200)
    planted = [
        make_planted_pair(rng, f"svc-{i}", category)
        for i, category in enumerate(
            [
                ExposureCategory.ONLY_BUG,
                ExposureCategory.ONLY_FIX,
                ExposureCategory.BOTH,
                ExposureCategory.NEITHER,
            ]
        )
    ]
    docs = corpus_for(planted, rng, background_docs=5)
    params = PortraitParams.sized(400, width=50, stride=50, target_fpr=1e-9)
    portrait = build_portrait(docs, params)
    portrait_path = tmp_path / "svc.xpdp"
    save_portrait(portrait, portrait_path)
    return {"portrait": portrait, "path": portrait_path, "planted": planted}


@pytest.fixture()
def client(world):
    app = create_app({"main": str(world["path"])})
    return TestClient(app)


class TestHealthAndPortraits:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"

    def test_preloaded_portrait_listed(self, client):
        body = client.get("/portraits").json()
        assert [p["name"] for p in body] == ["main"]
        assert body[0]["width"] == 50

    def test_unknown_portrait_404(self, client):
        assert client.get("/portraits/nope").status_code == 404

    def test_load_portrait_endpoint(self, client, world):
        response = client.post(
            "/portraits/load", json={"name": "second", "path": str(world["path"])}
        )
        assert response.status_code == 200
        assert client.get("/portraits/second").status_code == 200

    def test_load_missing_file_400(self, client):
        response = client.post("/portraits/load", json={"name": "x", "path": "/nope.xpdp"})
        assert response.status_code == 400


class TestQueryEndpoints:
    def test_whole_text_query_seen(self, client, world):
        planted = world["planted"][0]  # OnlyBug
        response = client.post(
            "/portraits/main/query",
            json={"documents": [{"text": planted.bug_doc}], "threshold": 0.9},
        )
        report = response.json()["reports"][0]
        assert report["seen"] is True
        assert report["hits"] >= 1

    def test_snippet_span_query(self, client, world):
        planted = world["planted"][0]
        from exposure_probe.portrait import canonicalize
        from exposure_probe.membership import locate_snippet

        stream = canonicalize(planted.bug_doc)
        start, end = locate_snippet(stream, planted.pair.bug_text, planted.pair.context_before)
        response = client.post(
            "/portraits/main/query",
            json={
                "documents": [
                    {"text": planted.bug_doc, "snippet_start": start, "snippet_end": end}
                ]
            },
        )
        assert response.json()["reports"][0]["seen"] is True

    def test_classify_matches_local(self, client, world):
        payload = {
            "pairs": [pair_to_record(item.pair) for item in world["planted"]],
            "threshold": 0.9,
        }
        response = client.post("/portraits/main/classify", json=payload)
        assert response.status_code == 200
        results = {r["pair_id"]: r for r in response.json()["results"]}
        for item in world["planted"]:
            _bug, _fix, local_category = classify_pair(world["portrait"], item.pair)
            assert results[item.pair.pair_id]["category"] == local_category.value

    def test_bad_span_422(self, client):
        response = client.post(
            "/portraits/main/query",
            json={"documents": [{"text": "short", "snippet_start": 0, "snippet_end": 99}]},
        )
        assert response.status_code == 422


class TestScoringEndpoints:
    def test_metrics_score(self, client):
        response = client.post(
            "/metrics/score",
            json={
                "records": [
                    {
                        "pair_id": "p",
                        "variant": "bug",
                        "tokens": ["a", "b"],
                        "probs": [0.5, 0.5],
                    }
                ]
            },
        )
        metric = response.json()["metrics"][0]
        assert metric["perplexity"] == pytest.approx(2.0)
        assert metric["gini"] == 0.0

    def test_metrics_score_invalid_422(self, client):
        response = client.post(
            "/metrics/score",
            json={
                "records": [
                    {"pair_id": "p", "variant": "bug", "tokens": ["a"], "probs": [1.7]}
                ]
            },
        )
        assert response.status_code == 422

    def test_prefer_endpoint(self, client):
        bug = {"pair_id": "p", "variant": "bug", "tokens": ["a"], "probs": [0.2]}
        fix = {"pair_id": "p", "variant": "fix", "tokens": ["a"], "probs": [0.9]}
        response = client.post("/metrics/prefer", json={"bug": bug, "fix": fix})
        verdicts = {v["metric"]: v["preferred"] for v in response.json()["verdicts"]}
        assert verdicts["arithmetic_mean"] == "Fix"
        assert verdicts["perplexity"] == "Fix"
        assert verdicts["length"] == "Tie"

    def test_match_endpoint(self, client):
        response = client.post(
            "/match",
            json={
                "pair_id": "p",
                "bug_text": "return x + 1;",
                "fix_text": "return x - 1;",
                "completions": ["return x + 1;\nmore", "noise"],
            },
        )
        body = response.json()
        assert body["any_bug"] is True
        assert body["category"] == "BugWithoutFixes"


class TestThinClient:
    def test_cli_query_via_server(self, world, tmp_path, monkeypatch):
        # Point the CLI thin client at an in-process test application.
        from exposure_probe import cli
        from exposure_probe.service import client as client_module

        app = create_app({"default": str(world["path"])})

        def patched_init(self, base_url, timeout=60.0):
            self._client = TestClient(app)

        monkeypatch.setattr(client_module.ServiceClient, "__init__", patched_init)
        pairs_path = tmp_path / "pairs.jsonl"
        from exposure_probe.jsonl import write_records

        write_records(pairs_path, [pair_to_record(i.pair) for i in world["planted"]])
        out_path = tmp_path / "exposure.jsonl"
        code = cli.main([
            "portrait", "query", "--server", "http://testserver",
            "--in", str(pairs_path), "--out", str(out_path),
        ])
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert len(lines) == 2 * len(world["planted"])
