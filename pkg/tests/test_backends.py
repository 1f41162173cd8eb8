"""Backends: mock closed-loop behavior, fault soundness, HTTP transport."""

import json

import httpx
import pytest

from tripcraft import synth
from tripcraft.backends import (
    MOCK_FAULTS,
    BackendConfig,
    CredentialMissing,
    MockInfeasible,
    TransportFailure,
    plan_with_backend,
    run_batch,
    suppressed_constraints,
)
from tripcraft.constraints import check_plan
from tripcraft.ingest import parse_plan
from tripcraft.promptgen import PromptRevision, default_rule_blocks

from conftest import make_query


@pytest.fixture(scope="module")
def demo():
    bundle, queries = synth.make_demo_dataset(seed=3, n_train=6, n_validation=0)
    return bundle, queries


def fails_of(text, q, bundle):
    parsed = parse_plan(text, q)
    outcomes = check_plan(parsed, q, bundle)
    return {o.constraint_id for o in outcomes if o.status == "fail"}, parsed


class TestMock:
    def test_no_fault_output_parses_and_passes(self, demo):
        bundle, queries = demo
        cfg = BackendConfig()
        for q in queries:
            text = plan_with_backend("(prompt)", q, bundle, cfg)
            failed, parsed = fails_of(text, q, bundle)
            assert parsed.delivered
            assert failed == set()

    def test_mock_is_deterministic(self, demo):
        bundle, queries = demo
        cfg = BackendConfig(fault_profile={"diverse-attractions": 0.5}, seed=11)
        q = queries[0]
        assert plan_with_backend("p", q, bundle, cfg) == plan_with_backend("p", q, bundle, cfg)

    @pytest.mark.parametrize("fault_id", sorted(MOCK_FAULTS))
    def test_fault_at_probability_one_fails_exactly_the_documented_set(self, demo, fault_id):
        bundle, queries = demo
        cfg = BackendConfig(fault_profile={fault_id: 1.0})
        q = queries[0]
        text = plan_with_backend("(prompt)", q, bundle, cfg)
        failed, parsed = fails_of(text, q, bundle)
        assert parsed.delivered
        assert failed == set(MOCK_FAULTS[fault_id])

    def test_fault_at_probability_zero_is_clean(self, demo):
        bundle, queries = demo
        cfg = BackendConfig(fault_profile={"budget": 0.0})
        q = queries[0]
        failed, _ = fails_of(plan_with_backend("p", q, bundle, cfg), q, bundle)
        assert failed == set()

    def test_prompt_sensitive_mode_suppresses_named_faults(self, demo):
        bundle, queries = demo
        q = queries[0]
        cfg = BackendConfig(fault_profile={"diverse-attractions": 1.0}, prompt_sensitive=True)
        plain = plan_with_backend("no exemplars here", q, bundle, cfg)
        assert "diverse-attractions" in fails_of(plain, q, bundle)[0]
        prompt = "...\nViolated constraints: diverse-attractions\n..."
        fixed = plan_with_backend(prompt, q, bundle, cfg)
        assert fails_of(fixed, q, bundle)[0] == set()

    def test_unknown_fault_id_rejected(self):
        with pytest.raises(ValueError):
            BackendConfig(fault_profile={"room-service": 1.0}).validate()

    def test_mock_infeasible_bubbles_up(self, demo):
        bundle, _ = demo
        from tripcraft.model import ReferenceBundle

        empty = ReferenceBundle()
        q = make_query()
        with pytest.raises(MockInfeasible):
            plan_with_backend("p", q, empty, BackendConfig())

    def test_suppression_parser(self):
        prompt = "Violated constraints: budget, cuisine\nother\nViolated constraints: budget"
        assert suppressed_constraints(prompt) == frozenset({"budget", "cuisine"})


class TestHttpBackend:
    def _cfg(self, **over):
        defaults = dict(
            kind="http-llm",
            endpoint="https://llm.example/v1/chat/completions",
            model="test-model",
            credential_env="TRIPCRAFT_TEST_KEY",
            max_retries=2,
        )
        defaults.update(over)
        return BackendConfig(**defaults)

    def test_credential_missing(self, demo, monkeypatch):
        monkeypatch.delenv("TRIPCRAFT_TEST_KEY", raising=False)
        bundle, queries = demo
        with pytest.raises(CredentialMissing):
            plan_with_backend("p", queries[0], bundle, self._cfg())

    def test_returns_model_text_verbatim(self, demo, monkeypatch):
        monkeypatch.setenv("TRIPCRAFT_TEST_KEY", "sk-123")
        bundle, queries = demo
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["auth"] = request.headers.get("Authorization")
            seen["body"] = json.loads(request.content)
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "Day 1:\nnot a real plan"}}]}
            )

        text = plan_with_backend(
            "THE PROMPT", queries[0], bundle, self._cfg(),
            transport=httpx.MockTransport(handler),
        )
        assert text == "Day 1:\nnot a real plan"
        assert seen["auth"] == "Bearer sk-123"
        assert seen["body"]["messages"] == [{"role": "user", "content": "THE PROMPT"}]
        assert seen["body"]["model"] == "test-model"

    def test_retries_transient_failures_then_succeeds(self, demo, monkeypatch):
        monkeypatch.setenv("TRIPCRAFT_TEST_KEY", "sk-123")
        bundle, queries = demo
        calls = {"n": 0}
        naps = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(503, text="overloaded")
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        text = plan_with_backend(
            "p", queries[0], bundle, self._cfg(),
            transport=httpx.MockTransport(handler), sleep=naps.append,
        )
        assert text == "ok"
        assert calls["n"] == 3
        assert naps == [1, 2]  # exponential backoff from 1s

    def test_gives_up_after_max_retries(self, demo, monkeypatch):
        monkeypatch.setenv("TRIPCRAFT_TEST_KEY", "sk-123")
        bundle, queries = demo

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(503, text="still down")

        with pytest.raises(TransportFailure):
            plan_with_backend(
                "p", queries[0], bundle, self._cfg(),
                transport=httpx.MockTransport(handler), sleep=lambda s: None,
            )

    def test_permanent_4xx_fails_without_retry(self, demo, monkeypatch):
        monkeypatch.setenv("TRIPCRAFT_TEST_KEY", "sk-123")
        bundle, queries = demo
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            return httpx.Response(401, text="bad key")

        with pytest.raises(TransportFailure):
            plan_with_backend(
                "p", queries[0], bundle, self._cfg(),
                transport=httpx.MockTransport(handler), sleep=lambda s: None,
            )
        assert calls["n"] == 1


class TestRunBatch:
    def _revision(self):
        return PromptRevision(index=0, rule_blocks=default_rule_blocks())

    def test_three_queries_three_parseable_texts(self, demo):
        bundle, queries = demo
        items = run_batch(queries[:3], bundle, self._revision(), BackendConfig(), {})
        assert [i.query_id for i in items] == [q.id for q in queries[:3]]
        for q, item in zip(queries[:3], items):
            assert item.error is None
            assert parse_plan(item.text, q).delivered

    def test_empty_batch(self, demo):
        bundle, _ = demo
        assert run_batch([], bundle, self._revision(), BackendConfig(), {}) == []

    def test_transport_failure_captured_per_item(self, demo, monkeypatch):
        monkeypatch.setenv("TRIPCRAFT_TEST_KEY", "sk-123")
        bundle, queries = demo

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(500, text="boom")

        cfg = BackendConfig(
            kind="http-llm",
            endpoint="https://llm.example/x",
            credential_env="TRIPCRAFT_TEST_KEY",
            max_retries=0,
        )
        items = run_batch(
            queries[:1], bundle, self._revision(), cfg, {},
            transport=httpx.MockTransport(handler),
        )
        assert len(items) == 1
        assert items[0].text == ""
        assert "TransportFailure" in items[0].error
