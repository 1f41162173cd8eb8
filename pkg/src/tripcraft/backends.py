"""Planning-agent backends: a deterministic scripted mock and an HTTP LLM client.

The mock plans directly from (query, bundle) with the beam solver, then
applies seeded fault injections so evaluation runs have controllable
failure modes. In prompt-sensitive mode it suppresses faults for any
constraint named in the prompt's exemplar section, giving the refinement
loop a measurable response to prompt changes without any network.

The HTTP client is transport only: it sends the prompt as a single user
message to a chat-completion style endpoint and returns the model text
verbatim, retrying transient failures with exponential backoff.
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import httpx

from .ingest import render_plan_text
from .model import ItemRef, Plan, ReferenceBundle, TravelQuery
from .promptgen import PromptRevision, render_prompt
from .solver import Infeasible, SearchConfig, generate_plan

logger = logging.getLogger(__name__)

BACKEND_KINDS = ("scripted-mock", "http-llm")

# Fault ids the mock knows how to inject, with the checkers each one breaks.
# within-sandbox faults invent an attraction (free, so nothing else fails);
# budget faults invent an overpriced restaurant, which also trips
# within-sandbox because costing cannot resolve it.
MOCK_FAULTS: dict[str, tuple[str, ...]] = {
    "diverse-attractions": ("diverse-attractions",),
    "diverse-restaurants": ("diverse-restaurants",),
    "within-sandbox": ("within-sandbox",),
    "budget": ("budget", "within-sandbox"),
}


class BackendError(Exception):
    pass


class CredentialMissing(BackendError):
    def __init__(self, env_var: str):
        super().__init__(f"credential environment variable {env_var!r} is not set")
        self.env_var = env_var


class TransportFailure(BackendError):
    pass


class MockInfeasible(BackendError):
    def __init__(self, query_id: str, why: Infeasible):
        super().__init__(f"mock backend found no base plan for {query_id}: {why.explanation}")
        self.query_id = query_id
        self.why = why


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "scripted-mock"
    # scripted-mock
    fault_profile: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    prompt_sensitive: bool = False
    # http-llm
    endpoint: str = ""
    model: str = ""
    timeout_s: float = 60.0
    max_retries: int = 3
    credential_env: str = "TRIPCRAFT_API_KEY"
    decoding: dict[str, object] = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        for cid, prob in self.fault_profile.items():
            if cid not in MOCK_FAULTS:
                raise ValueError(f"unknown fault id {cid!r}; choose from {sorted(MOCK_FAULTS)}")
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"fault probability for {cid} must be in [0, 1], got {prob}")
        if self.kind == "http-llm" and not self.endpoint:
            raise ValueError("http-llm backend requires an endpoint")

    def fingerprint_dict(self) -> dict:
        """Config as stable data for run records; never includes credentials."""
        return {
            "kind": self.kind,
            "fault_profile": {k: self.fault_profile[k] for k in sorted(self.fault_profile)},
            "seed": self.seed,
            "prompt_sensitive": self.prompt_sensitive,
            "endpoint": self.endpoint,
            "model": self.model,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
            "credential_env": self.credential_env,
            "decoding": {k: self.decoding[k] for k in sorted(self.decoding)},
        }


# --------------------------------------------------------------------------
# Fault injection

def _fault_diverse_attractions(plan: Plan, q: TravelQuery, b: ReferenceBundle) -> Plan:
    """Copy one day's attraction onto a later day that shares a city with it."""
    for i, src in enumerate(plan.days):
        if src.attraction is None:
            continue
        for j, dst in enumerate(plan.days):
            if j != i and src.attraction.city in dst.city.cities:
                days = list(plan.days)
                days[j] = replace(dst, attraction=src.attraction)
                return Plan(query_id=plan.query_id, days=tuple(days))
    return plan


def _fault_diverse_restaurants(plan: Plan, q: TravelQuery, b: ReferenceBundle) -> Plan:
    """Serve the same restaurant twice on the first day with two meals."""
    for i, entry in enumerate(plan.days):
        meals = list(entry.meals())
        if len(meals) >= 2:
            days = list(plan.days)
            days[i] = replace(entry, **{meals[1][0]: meals[0][1]})
            return Plan(query_id=plan.query_id, days=tuple(days))
    return plan


def _fault_within_sandbox(plan: Plan, q: TravelQuery, b: ReferenceBundle) -> Plan:
    """Visit an attraction that does not exist (free, so only the sandbox breaks)."""
    entry = plan.days[0]
    days = list(plan.days)
    days[0] = replace(entry, attraction=ItemRef("Phantom Falls Overlook", entry.city.end))
    return Plan(query_id=plan.query_id, days=tuple(days))


def _fault_budget(plan: Plan, q: TravelQuery, b: ReferenceBundle) -> Plan:
    """Book a nonexistent restaurant; unresolvable costing fails the budget check."""
    entry = plan.days[0]
    days = list(plan.days)
    days[0] = replace(entry, dinner=ItemRef("Gold Leaf Tasting Room", entry.city.end))
    return Plan(query_id=plan.query_id, days=tuple(days))


_FAULT_MUTATIONS: dict[str, Callable[[Plan, TravelQuery, ReferenceBundle], Plan]] = {
    "diverse-attractions": _fault_diverse_attractions,
    "diverse-restaurants": _fault_diverse_restaurants,
    "within-sandbox": _fault_within_sandbox,
    "budget": _fault_budget,
}

_EXEMPLAR_CONSTRAINTS_RE = re.compile(r"^Violated constraints:\s*(.+)$", re.MULTILINE)


def suppressed_constraints(prompt: str) -> frozenset[str]:
    """Constraint ids named in the prompt's exemplar section."""
    ids: set[str] = set()
    for match in _EXEMPLAR_CONSTRAINTS_RE.finditer(prompt):
        ids.update(part.strip() for part in match.group(1).split(",") if part.strip())
    return frozenset(ids)


def _mock_plan(
    prompt: str, q: TravelQuery, b: ReferenceBundle, cfg: BackendConfig
) -> str:
    base = generate_plan(q, b, SearchConfig(strategy="beam"))
    if isinstance(base, Infeasible):
        raise MockInfeasible(q.id, base)
    plan = base

    active = dict(cfg.fault_profile)
    if cfg.prompt_sensitive:
        for cid in suppressed_constraints(prompt):
            active.pop(cid, None)

    rng = random.Random(f"{cfg.seed}:{q.id}")
    for cid in sorted(active):
        if rng.random() < active[cid]:
            plan = _FAULT_MUTATIONS[cid](plan, q, b)
    return render_plan_text(plan)


# --------------------------------------------------------------------------
# HTTP LLM client

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


def _http_plan(
    prompt: str,
    cfg: BackendConfig,
    transport: Optional[httpx.BaseTransport] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    credential = os.environ.get(cfg.credential_env)
    if not credential:
        raise CredentialMissing(cfg.credential_env)
    payload = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        **cfg.decoding,
    }
    headers = {"Authorization": f"Bearer {credential}"}
    attempts = cfg.max_retries + 1
    last_error = "no attempt made"
    with httpx.Client(transport=transport, timeout=cfg.timeout_s) as client:
        for attempt in range(attempts):
            if attempt:
                sleep(2 ** (attempt - 1))
            try:
                logger.debug(
                    "llm request attempt %d to %s (auth redacted): %s",
                    attempt + 1, cfg.endpoint, json.dumps(payload)[:2000],
                )
                response = client.post(cfg.endpoint, json=payload, headers=headers)
            except httpx.TransportError as exc:
                last_error = f"transport error: {exc}"
                continue
            if response.status_code in _RETRYABLE_STATUS:
                last_error = f"status {response.status_code}"
                continue
            if response.status_code != 200:
                raise TransportFailure(
                    f"endpoint returned status {response.status_code}: {response.text[:500]}"
                )
            try:
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportFailure(f"unexpected response shape: {exc}") from exc
    raise TransportFailure(f"gave up after {attempts} attempts; last failure: {last_error}")


def plan_with_backend(
    prompt: str,
    q: TravelQuery,
    b: ReferenceBundle,
    cfg: BackendConfig,
    transport: Optional[httpx.BaseTransport] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    """Produce raw plan text for one query via the configured backend."""
    cfg.validate()
    if cfg.kind == "scripted-mock":
        return _mock_plan(prompt, q, b, cfg)
    return _http_plan(prompt, cfg, transport=transport, sleep=sleep)


# --------------------------------------------------------------------------
# Batch execution

@dataclass(frozen=True)
class BatchItem:
    query_id: str
    text: str
    error: Optional[str] = None


def run_batch(
    queries: Sequence[TravelQuery],
    b: ReferenceBundle,
    revision: PromptRevision,
    cfg: BackendConfig,
    exemplars,
    registry=None,
    parallelism: int = 4,
    transport: Optional[httpx.BaseTransport] = None,
    prompt_for: Optional[Callable[[TravelQuery], str]] = None,
) -> list[BatchItem]:
    """One output per query, input order preserved; per-item failures are
    captured as empty text with the failure reason, never aborting the batch."""
    cfg.validate()

    def render(q: TravelQuery) -> str:
        if prompt_for is not None:
            return prompt_for(q)
        return render_prompt(revision, q, b, exemplars, registry)

    def run_one(q: TravelQuery) -> BatchItem:
        try:
            text = plan_with_backend(render(q), q, b, cfg, transport=transport)
            return BatchItem(query_id=q.id, text=text)
        except BackendError as exc:
            return BatchItem(query_id=q.id, text="", error=f"{type(exc).__name__}: {exc}")

    if not queries:
        return []
    workers = max(1, min(parallelism, len(queries)))
    if workers == 1 or cfg.kind == "scripted-mock":
        return [run_one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, queries))
