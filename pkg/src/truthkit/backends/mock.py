"""Deterministic scripted backend for offline runs and tests.

A script is an ordered rule list; each incoming request is fingerprinted by
call kind plus its identifying fields and matched against the rules in order,
first match wins. An unmatched request raises ScriptMissError -- the mock
never invents a default answer.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DatasetError, ScriptMissError
from ..types import ChatMessage, GenerationConfig, GenerationRecord
from .base import Backend, ModelSpec
from .entailment import EntailmentProvider, EntailmentVerdict, parse_label_or_protocol_error
from .evidence import EvidenceProvider
from .similarity import SimilarityProvider

KINDS = ("chat", "sample", "entail", "similarity", "evidence")


@dataclass(frozen=True)
class Rule:
    kind: str
    match: dict
    response: dict

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DatasetError(f"unknown script rule kind {self.kind!r}")


def _contains_all(haystack: str, needles) -> bool:
    if isinstance(needles, str):
        needles = [needles]
    return all(n in haystack for n in needles)


@dataclass
class MockScript:
    rules: list[Rule] = field(default_factory=list)

    @staticmethod
    def from_rules(raw_rules: list[dict]) -> "MockScript":
        return MockScript(
            [Rule(r["kind"], dict(r.get("match", {})), dict(r["response"])) for r in raw_rules]
        )

    @staticmethod
    def load(path: str | Path) -> "MockScript":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DatasetError(f"cannot load mock fixture {path}: {exc}") from exc
        if isinstance(data, dict):
            data = data.get("rules", [])
        if not isinstance(data, list):
            raise DatasetError(f"mock fixture {path} must hold a rule list")
        return MockScript.from_rules(data)

    def dump(self, path: str | Path) -> None:
        payload = [
            {"kind": r.kind, "match": r.match, "response": r.response} for r in self.rules
        ]
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))

    def lookup(self, kind: str, **request) -> dict:
        for rule in self.rules:
            if rule.kind == kind and self._matches(rule.match, kind, request):
                return rule.response
        raise ScriptMissError(f"no script rule for {kind} request: {_describe(request)}")

    def _matches(self, match: dict, kind: str, request: dict) -> bool:
        if kind in ("chat", "sample"):
            messages = request["messages"]
            last_user = next((m.content for m in reversed(messages) if m.role == "user"), "")
            system = "\n".join(m.content for m in messages if m.role == "system")
            if "user_contains" in match and not _contains_all(last_user, match["user_contains"]):
                return False
            if "user_equals" in match and last_user != match["user_equals"]:
                return False
            if "system_contains" in match and not _contains_all(system, match["system_contains"]):
                return False
            if "sample_index" in match and request.get("sample_index") != match["sample_index"]:
                return False
            return True
        if kind == "entail":
            for key in ("context", "premise", "hypothesis"):
                if key in match and request[key] != match[key]:
                    return False
            return True
        if kind == "similarity":
            if "a" in match or "b" in match:
                want = {match.get("a"), match.get("b")} - {None}
                got = {request["a"], request["b"]}
                return want <= got
            return True
        if kind == "evidence":
            if "claim" in match and request["claim"] != match["claim"]:
                return False
            if "claim_contains" in match and not _contains_all(
                request["claim"], match["claim_contains"]
            ):
                return False
            return True
        return False


def _describe(request: dict) -> str:
    parts = []
    for key, value in request.items():
        if key == "messages":
            last = next((m.content for m in reversed(value) if m.role == "user"), "")
            parts.append(f"last_user={last!r}")
        else:
            parts.append(f"{key}={value!r}")
    return ", ".join(parts)


def _record_from_response(response: dict) -> GenerationRecord:
    finish = response.get("finish_reason", "stop")
    top = response.get("top_logprobs")
    if "tokens" in response and response["tokens"] is not None:
        pairs = [(t, float(lp)) for t, lp in response["tokens"]]
        return GenerationRecord.from_tokens(
            pairs,
            finish_reason=finish,
            text=response.get("text"),
            top_logprobs=[dict(d) for d in top] if top else None,
        )
    return GenerationRecord(
        text=response.get("text", ""),
        finish_reason=finish,
        top_logprobs=tuple(dict(d) for d in top) if top else None,
    )


class MockBackend(Backend):
    """Scripted chat transport. Lookups are serialized, so concurrency never
    changes responses; the call log supports assertions on call counts."""

    def __init__(self, script: MockScript):
        self.script = script
        self.calls: list[tuple[str, int | None]] = []
        self._lock = threading.Lock()

    def _lookup(self, kind: str, **request) -> dict:
        with self._lock:
            self.calls.append((kind, request.get("sample_index")))
            return self.script.lookup(kind, **request)

    def chat_complete(
        self,
        spec: ModelSpec,
        messages: list[ChatMessage],
        config: GenerationConfig,
        *,
        temperature: float | None = None,
        max_new_tokens: int | None = None,
        top_logprobs: int | None = None,
    ) -> GenerationRecord:
        response = self._lookup("chat", messages=messages)
        return _record_from_response(response)

    def sample_n(
        self,
        spec: ModelSpec,
        messages: list[ChatMessage],
        config: GenerationConfig,
        n: int,
    ) -> list[GenerationRecord]:
        if n < 1:
            raise ValueError("n must be >= 1")
        records = []
        for i in range(n):
            response = self._lookup("sample", messages=messages, sample_index=i)
            records.append(_record_from_response(response))
        return records

    def sample_calls(self) -> int:
        return sum(1 for kind, _ in self.calls if kind == "sample")


class ScriptedEntailment(EntailmentProvider):
    def __init__(self, script: MockScript):
        self.script = script

    def entail(self, context: str, premise: str, hypothesis: str) -> EntailmentVerdict:
        self._check_args(premise, hypothesis)
        response = self.script.lookup(
            "entail", context=context, premise=premise, hypothesis=hypothesis
        )
        label = parse_label_or_protocol_error(str(response["label"]))
        return EntailmentVerdict(label, raw_text=response.get("raw_text", response["label"]))


class ScriptedSimilarity(SimilarityProvider):
    def __init__(self, script: MockScript):
        self.script = script

    def similarity(self, a: str, b: str) -> float:
        response = self.script.lookup("similarity", a=a, b=b)
        return float(response["value"])


class ScriptedEvidence(EvidenceProvider):
    def __init__(self, script: MockScript):
        self.script = script

    def fetch_evidence(self, claim: str) -> list[str]:
        self._check_claim(claim)
        try:
            response = self.script.lookup("evidence", claim=claim)
        except ScriptMissError:
            return []
        return list(response.get("passages", []))


def entailment_table_rules(table: dict[tuple[str, str], str]) -> list[dict]:
    """Rules scripting an explicit (premise, hypothesis) -> label verdict table."""
    return [
        {
            "kind": "entail",
            "match": {"premise": prem, "hypothesis": hyp},
            "response": {"label": label},
        }
        for (prem, hyp), label in table.items()
    ]
