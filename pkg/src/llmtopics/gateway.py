"""Uniform chat-completion access: a remote HTTP JSON backend and a
deterministic scripted mock, behind one retrying, concurrency-bounded API.

Every request/response pair (including failed attempts) can be appended
to a JSON-lines run log so metric computation can be replayed offline.
The credential travels only in the transport header, never in a body or
log entry.
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import requests

from .errors import (
    AuthError,
    LlmTopicsError,
    MalformedBackendReply,
    RateLimited,
    Truncated,
)
from .validation import check_non_negative_int, check_positive_int

FINISH_COMPLETE = "complete"
FINISH_TRUNCATED = "truncated"
FINISH_ERROR = "error"

BACKEND_KINDS = ("http", "mock")


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    user_message: str
    system_message: str | None = None
    temperature: float = 0.0
    max_output_tokens: int = 1024
    seed: int | None = None

    def __post_init__(self):
        if not self.user_message:
            raise ValueError("user_message must be non-empty")
        if not math.isfinite(self.temperature) or self.temperature < 0:
            raise ValueError("temperature must be finite and >= 0")
        check_positive_int(self.max_output_tokens, "max_output_tokens")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "user_message": self.user_message,
            "system_message": self.system_message,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str = FINISH_COMPLETE
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.finish_reason == FINISH_COMPLETE and not self.text:
            raise ValueError("a complete response must carry text")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "finish_reason": self.finish_reason,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }


class TransientBackendError(LlmTopicsError):
    """Retryable failure: rate limit, server error, or network timeout."""


class MockBackend:
    """Scripted, fully deterministic backend for tests and offline runs.

    The script may be:

    * a string: every request gets this reply;
    * a list: replies consumed in request-arrival order;
    * a dict: first key found as a substring of the user message wins;
      its value is a reply or a list of replies consumed per match;
    * a callable ``f(request) -> reply``.

    A reply is a string, a ChatResponse, or an Exception instance (which
    is raised). ``latency`` seconds of sleep inside the in-flight window
    make concurrency observable; ``max_in_flight`` records the high-water
    mark of simultaneous requests.
    """

    def __init__(self, script=None, default: str | None = None, latency: float = 0.0):
        self.script = script
        self.default = default
        self.latency = latency
        self.calls: list[ChatRequest] = []
        self.max_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()

    def _pick_reply(self, request: ChatRequest):
        script = self.script
        if script is None:
            reply = self.default
        elif isinstance(script, str) or isinstance(script, (ChatResponse, Exception)):
            reply = script
        elif isinstance(script, dict):
            reply = self.default
            for pattern, value in script.items():
                if pattern in request.user_message:
                    if isinstance(value, list):
                        reply = value.pop(0) if len(value) > 1 else value[0]
                    else:
                        reply = value
                    break
        elif isinstance(script, list):
            reply = script.pop(0) if len(script) > 1 else (script[0] if script else None)
        elif callable(script):
            reply = script(request)
        else:
            raise TypeError(f"unsupported mock script type {type(script).__name__}")
        if reply is None:
            raise MalformedBackendReply("mock backend has no reply for this request")
        return reply

    def respond(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.calls.append(request)
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
            reply = self._pick_reply(request)
        try:
            if self.latency:
                time.sleep(self.latency)
            if isinstance(reply, Exception):
                raise reply
            if isinstance(reply, ChatResponse):
                return reply
            return ChatResponse(text=reply, finish_reason=FINISH_COMPLETE)
        finally:
            with self._lock:
                self._in_flight -= 1


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"
    endpoint_url: str | None = None
    api_key_env_var: str = "LLMTOPICS_API_KEY"
    max_concurrent: int = 4
    max_retries: int = 3
    retry_backoff: tuple[float, ...] = (1.0, 2.0, 4.0)
    timeout: float = 120.0
    mock: MockBackend | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"kind must be one of {BACKEND_KINDS}")
        if self.kind == "http" and not self.endpoint_url:
            raise ValueError("http backends require endpoint_url")
        check_positive_int(self.max_concurrent, "max_concurrent")
        check_non_negative_int(self.max_retries, "max_retries")


def default_transport(url: str, headers: dict, payload: dict, timeout: float):
    """POST a chat-completions payload; network failures become retryable."""
    try:
        response = requests.post(url, headers=headers, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise TransientBackendError(f"transport failure: {exc}") from exc
    try:
        body = response.json()
    except ValueError:
        body = response.text
    return response.status_code, body


class RunLogger:
    """Append-only JSON-lines log of every request/response attempt."""

    def __init__(self, path, clock=time.time):
        self.path = path
        self.clock = clock
        self._lock = threading.Lock()

    def log(self, request: ChatRequest, attempt: int,
            response: ChatResponse | None = None, error: str | None = None):
        entry = {
            "timestamp": self.clock(),
            "attempt": attempt,
            "request": request.to_dict(),
            "response": response.to_dict() if response is not None else None,
            "error": error,
        }
        line = json.dumps(entry, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")


class ChatGateway:
    """Retry, rate-limit, and concurrency control around one backend."""

    def __init__(self, config: BackendConfig, log_path=None,
                 transport=default_transport, sleeper=time.sleep, clock=time.time):
        if config.kind == "mock" and config.mock is None:
            raise ValueError("mock backends need a MockBackend instance in config.mock")
        self.config = config
        self.transport = transport
        self.sleeper = sleeper
        self.logger = RunLogger(log_path, clock=clock) if log_path else None
        self._gate = threading.BoundedSemaphore(config.max_concurrent)

    def _log(self, request, attempt, response=None, error=None):
        if self.logger is not None:
            self.logger.log(request, attempt, response=response, error=error)

    def _http_attempt(self, request: ChatRequest, api_key: str) -> ChatResponse:
        messages = []
        if request.system_message:
            messages.append({"role": "system", "content": request.system_message})
        messages.append({"role": "user", "content": request.user_message})
        payload = {
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        headers = {
            "Authorization": f"Bearer {api_key}",
            "Content-Type": "application/json",
        }
        status, body = self.transport(
            self.config.endpoint_url, headers, payload, self.config.timeout
        )
        if status in (401, 403):
            raise AuthError(f"backend rejected the credential (HTTP {status})")
        if status == 429 or status >= 500:
            raise TransientBackendError(f"HTTP {status}")
        if status != 200:
            raise MalformedBackendReply(f"unexpected HTTP {status}: {str(body)[:200]}")
        try:
            choice = body["choices"][0]
            text = choice["message"]["content"]
            finish = choice.get("finish_reason", "stop")
            usage = body.get("usage", {})
            prompt_tokens = int(usage.get("prompt_tokens", 0))
            completion_tokens = int(usage.get("completion_tokens", 0))
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedBackendReply(f"cannot parse completion body: {exc}") from exc
        finish_reason = FINISH_TRUNCATED if finish == "length" else FINISH_COMPLETE
        return ChatResponse(
            text=text, finish_reason=finish_reason,
            prompt_tokens=prompt_tokens, completion_tokens=completion_tokens,
        )

    def _attempt(self, request: ChatRequest, api_key: str | None) -> ChatResponse:
        if self.config.kind == "mock":
            return self.config.mock.respond(request)
        return self._http_attempt(request, api_key)

    def complete(self, request: ChatRequest) -> ChatResponse:
        """One completion with retry on transient failures.

        Total attempts = max_retries + 1; backoff sleeps follow the
        configured schedule (last entry repeats).
        """
        api_key = None
        if self.config.kind == "http":
            api_key = os.environ.get(self.config.api_key_env_var)
            if not api_key:
                raise AuthError(
                    f"environment variable {self.config.api_key_env_var} is not set"
                )
        max_attempts = self.config.max_retries + 1
        with self._gate:
            for attempt in range(1, max_attempts + 1):
                try:
                    response = self._attempt(request, api_key)
                except TransientBackendError as exc:
                    self._log(request, attempt, error=f"{exc.error_class}: {exc}")
                    if attempt == max_attempts:
                        raise RateLimited(
                            f"retries exhausted after {attempt} attempts: {exc}"
                        ) from exc
                    backoff = self.config.retry_backoff
                    if backoff:
                        self.sleeper(backoff[min(attempt - 1, len(backoff) - 1)])
                    continue
                except LlmTopicsError as exc:
                    self._log(request, attempt, error=f"{exc.error_class}: {exc}")
                    raise
                self._log(request, attempt, response=response)
                if response.finish_reason == FINISH_TRUNCATED:
                    error = Truncated("completion stopped before finishing")
                    error.response = response
                    raise error
                return response
        raise AssertionError("unreachable")

    def complete_many(self, requests_list) -> list:
        """Complete a batch; slot i of the result matches request i.

        A failed request occupies its own slot as the raised error object
        instead of poisoning the batch.
        """
        requests_list = list(requests_list)
        if not requests_list:
            raise ValueError("complete_many needs at least one request")
        results: list = [None] * len(requests_list)
        workers = min(self.config.max_concurrent, len(requests_list))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(self.complete, request): i
                for i, request in enumerate(requests_list)
            }
            for future in as_completed(futures):
                slot = futures[future]
                try:
                    results[slot] = future.result()
                except LlmTopicsError as exc:
                    results[slot] = exc
        return results


def complete(request: ChatRequest, config: BackendConfig, **gateway_kwargs) -> ChatResponse:
    return ChatGateway(config, **gateway_kwargs).complete(request)


def complete_many(requests_list, config: BackendConfig, **gateway_kwargs) -> list:
    return ChatGateway(config, **gateway_kwargs).complete_many(requests_list)
