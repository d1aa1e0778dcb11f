"""OpenAI-compatible chat-completions client with logprobs and n-sampling."""

from __future__ import annotations

import logging
import os
import time

import requests

from ..errors import BackendError, EndpointConfigError, ProtocolError
from ..types import ChatMessage, GenerationConfig, GenerationRecord, TokenInfo
from .base import Backend, ModelSpec

logger = logging.getLogger(__name__)


class OpenAiHttpBackend(Backend):
    """Speaks the chat-completions JSON schema to any compatible endpoint.

    Transport failures and 5xx responses are retried with exponential backoff
    (at most 1 + max_retries attempts); 4xx responses are configuration errors
    and fail immediately.
    """

    def __init__(self, max_retries: int = 2, backoff: float = 0.5, session=None):
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()

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
        payload = self._payload(spec, messages, config, temperature, max_new_tokens, top_logprobs)
        body = self._request(spec, payload)
        choices = self._choices(body, expected=1)
        return _parse_choice(choices[0])

    def sample_n(
        self,
        spec: ModelSpec,
        messages: list[ChatMessage],
        config: GenerationConfig,
        n: int,
    ) -> list[GenerationRecord]:
        if n < 1:
            raise ValueError("n must be >= 1")
        payload = self._payload(
            spec, messages, config, temperature=config.sampling_temperature,
            max_new_tokens=None, top_logprobs=None,
        )
        payload["n"] = n
        body = self._request(spec, payload)
        choices = self._choices(body, expected=n)
        ordered: list = [None] * n
        for pos, choice in enumerate(choices):
            index = choice.get("index", pos)
            if 0 <= index < n and ordered[index] is None:
                ordered[index] = _parse_choice(choice)
        missing = [i for i, rec in enumerate(ordered) if rec is None]
        if missing:
            raise BackendError(f"sampling returned no choice for indices {missing}")
        return ordered

    def _payload(self, spec, messages, config, temperature, max_new_tokens, top_logprobs):
        payload = {
            "model": spec.model_name,
            "messages": [m.to_dict() for m in messages],
            "temperature": config.temperature if temperature is None else temperature,
            "max_tokens": config.max_new_tokens if max_new_tokens is None else max_new_tokens,
            "seed": config.seed,
        }
        if spec.supports_logprobs:
            payload["logprobs"] = True
            if top_logprobs is not None:
                payload["top_logprobs"] = top_logprobs
        return payload

    def _request(self, spec: ModelSpec, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(spec.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        attempts = 1 + self.max_retries
        last_error = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self.session.post(
                    spec.endpoint_url, json=payload, headers=headers,
                    timeout=spec.request_timeout,
                )
            except requests.RequestException as exc:
                last_error = f"transport failure: {exc}"
                logger.warning("attempt %d/%d failed: %s", attempt + 1, attempts, last_error)
                continue
            if 400 <= resp.status_code < 500:
                raise EndpointConfigError(
                    f"endpoint rejected the request (HTTP {resp.status_code}): {resp.text[:300]}"
                )
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                logger.warning("attempt %d/%d failed: %s", attempt + 1, attempts, last_error)
                continue
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"response body is not JSON: {exc}") from exc
        raise BackendError(
            f"request failed after {attempts} attempts: {last_error}", attempts=attempts
        )

    @staticmethod
    def _choices(body: dict, expected: int) -> list[dict]:
        try:
            choices = body["choices"]
        except (KeyError, TypeError) as exc:
            raise ProtocolError("response body has no 'choices'") from exc
        if not isinstance(choices, list) or len(choices) < 1:
            raise ProtocolError("response 'choices' is empty")
        return choices


def _parse_choice(choice: dict) -> GenerationRecord:
    try:
        message = choice["message"]
        text = message.get("content") or ""
    except (KeyError, TypeError) as exc:
        raise ProtocolError("choice has no message content") from exc
    finish = choice.get("finish_reason") or "stop"
    if finish not in ("stop", "length"):
        finish = "stop"

    logprobs = choice.get("logprobs") or {}
    content = logprobs.get("content") or []
    tokens = []
    top: list[dict[str, float]] = []
    has_top = False
    for item in content:
        try:
            tokens.append(TokenInfo(item["token"], float(item["logprob"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed logprob entry: {item!r}") from exc
        alts = {a["token"]: float(a["logprob"]) for a in item.get("top_logprobs") or []}
        has_top = has_top or bool(alts)
        top.append(alts)

    if tokens and "".join(t.token_text for t in tokens) != text:
        # some endpoints detokenize differently; trust the tokens, keep text consistent
        text = "".join(t.token_text for t in tokens)
    return GenerationRecord(
        text=text,
        tokens=tuple(tokens),
        cumulative_logprob=sum(t.logprob for t in tokens),
        finish_reason=finish,
        top_logprobs=tuple(top) if has_top else None,
    )
