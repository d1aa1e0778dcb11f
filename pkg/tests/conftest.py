"""Shared fixtures: scripted mock backends and record builders."""

import pytest

from truthkit.backends import MockBackend, MockScript, ModelHandle, ModelSpec, ScriptedEntailment
from truthkit.types import GenerationConfig, GenerationRecord


@pytest.fixture
def spec():
    return ModelSpec(model_name="mock-model")


@pytest.fixture
def config():
    return GenerationConfig(seed=7)


def record(text=None, logprobs=None, finish="stop", top_logprobs=None):
    """Record builder: pass logprobs as [(token, lp), ...] or a bare text."""
    if logprobs is not None:
        return GenerationRecord.from_tokens(
            logprobs, finish_reason=finish, text=text, top_logprobs=top_logprobs
        )
    return GenerationRecord(
        text=text or "",
        finish_reason=finish,
        top_logprobs=tuple(top_logprobs) if top_logprobs else None,
    )


def chat_rule(user_contains, text=None, tokens=None, top_logprobs=None, finish_reason="stop"):
    response = {"finish_reason": finish_reason}
    if text is not None:
        response["text"] = text
    if tokens is not None:
        response["tokens"] = tokens
    if top_logprobs is not None:
        response["top_logprobs"] = top_logprobs
    return {"kind": "chat", "match": {"user_contains": user_contains}, "response": response}


def sample_rule(user_contains, index, text=None, tokens=None):
    response = {}
    if text is not None:
        response["text"] = text
    if tokens is not None:
        response["tokens"] = tokens
    return {
        "kind": "sample",
        "match": {"user_contains": user_contains, "sample_index": index},
        "response": response,
    }


def entail_rule(premise, hypothesis, label, context=None):
    match = {"premise": premise, "hypothesis": hypothesis}
    if context is not None:
        match["context"] = context
    return {"kind": "entail", "match": match, "response": {"label": label}}


def entail_rules_from_groups(groups):
    """Full ordered-pair verdict table: same group ENTAIL, different CONTRADICT."""
    group_of = {}
    for gid, members in enumerate(groups):
        for text in members:
            group_of[text] = gid
    texts = [t for members in groups for t in members]
    rules = []
    for a in texts:
        for b in texts:
            label = "ENTAIL" if group_of[a] == group_of[b] else "CONTRADICT"
            rules.append(entail_rule(a, b, label))
    return rules


def make_backend(rules):
    return MockBackend(MockScript.from_rules(rules))


def make_handle(rules, spec=None):
    backend = make_backend(rules)
    return ModelHandle(backend, spec or ModelSpec(model_name="mock-model")), backend


def scripted_entailment(rules):
    return ScriptedEntailment(MockScript.from_rules(rules))


class SequentialBackend:
    """Replies with canned texts in call order, whatever the prompt."""

    def __init__(self, texts):
        self._texts = iter(texts)

    def chat_complete(self, spec, messages, config, **kw):
        return GenerationRecord(text=next(self._texts))

    def sample_n(self, spec, messages, config, n):
        return [self.chat_complete(spec, messages, config) for _ in range(n)]


def sequential_handle(texts, spec=None):
    return ModelHandle(SequentialBackend(texts), spec or ModelSpec(model_name="seq"))
