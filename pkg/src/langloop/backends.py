"""Chat-completion backends: scripted rules, transcript replay, and HTTP.

All three expose the same ``complete(messages) -> text`` surface so the
orchestrator never branches on which one is configured. Transcripts are
JSON Lines keyed by a content digest of the request, which makes replay
robust to cosmetic changes (key order) but strict about content.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import BackendUnavailable, IoFailure, NoRuleMatched, ReplayMiss

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    text: str = ""
    images: tuple[bytes, ...] = ()

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"chat role must be one of {ROLES}, got {self.role!r}")
        if self.role == "system" and self.images:
            raise ValueError("system messages carry no images")
        if not self.text and not self.images:
            raise ValueError("message text may be empty only when images are present")


@dataclass(frozen=True)
class ChatExchange:
    """One request/response pair, as observed by a recorder."""

    request: tuple[ChatMessage, ...]
    response_text: str
    backend_id: str
    latency_s: float


def canonical_digest(messages: Sequence[ChatMessage]) -> str:
    """Content hash of a request: roles, texts, and image byte hashes."""
    payload = [
        [m.role, m.text, [hashlib.sha256(img).hexdigest() for img in m.images]]
        for m in messages
    ]
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class Backend(Protocol):
    backend_id: str

    def complete(self, messages: Sequence[ChatMessage]) -> str: ...


def complete(messages: Sequence[ChatMessage], backend: Backend) -> str:
    """Validate the request shape and hand it to the backend."""
    if not messages:
        raise ValueError("messages must be non-empty")
    if messages[0].role != "system":
        raise ValueError("first message must have role 'system'")
    return backend.complete(messages)


# --- scripted ---

@dataclass(frozen=True)
class ScriptedRule:
    """Regex over the final user message, with capture expansion in the reply."""

    pattern: re.Pattern[str]
    template: str

    @classmethod
    def from_dict(cls, raw: dict) -> "ScriptedRule":
        return cls(pattern=re.compile(raw["match"], re.DOTALL), template=raw["response"])


class ScriptedBackend:
    """Deterministic stand-in for a model; first matching rule wins."""

    def __init__(self, rules: Sequence[ScriptedRule], backend_id: str = "scripted"):
        self.rules = list(rules)
        self.backend_id = backend_id

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        final_user = next((m for m in reversed(messages) if m.role == "user"), None)
        if final_user is None:
            raise NoRuleMatched("no user message to match against")
        for rule in self.rules:
            m = rule.pattern.search(final_user.text)
            if m:
                return m.expand(rule.template)
        raise NoRuleMatched(f"no rule matched: {final_user.text[:120]!r}")


def load_rules(path: str | Path) -> list[ScriptedRule]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read rules file {path}: {exc}") from exc
    return [ScriptedRule.from_dict(entry) for entry in raw]


# --- replay ---

class ReplayBackend:
    """Replays recorded responses in order, per request digest."""

    def __init__(self, transcript_path: str | Path, backend_id: str = "replay"):
        self.backend_id = backend_id
        self._lock = threading.Lock()
        self._queues: dict[str, deque[str]] = {}
        try:
            text = Path(transcript_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read transcript {transcript_path}: {exc}") from exc
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            self._queues.setdefault(rec["digest"], deque()).append(rec["response"])

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        digest = canonical_digest(messages)
        with self._lock:
            queue = self._queues.get(digest)
            if not queue:
                raise ReplayMiss(f"no recorded response for digest {digest[:12]}")
            return queue.popleft()


# --- recording ---

class TranscriptRecorder:
    """Wraps a backend and appends every exchange to a JSONL transcript."""

    def __init__(self, inner: Backend, sink: str | Path):
        self.inner = inner
        self.backend_id = inner.backend_id
        self.exchanges: list[ChatExchange] = []
        self._lock = threading.Lock()
        try:
            self._fh = open(sink, "a", encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot open transcript sink {sink}: {exc}") from exc

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        started = time.monotonic()
        response = self.inner.complete(messages)
        latency = time.monotonic() - started
        record = {
            "digest": canonical_digest(messages),
            "request": [
                {
                    "role": m.role,
                    "text": m.text,
                    "image_hashes": [hashlib.sha256(i).hexdigest() for i in m.images],
                }
                for m in messages
            ],
            "response": response,
        }
        with self._lock:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._fh.flush()
            self.exchanges.append(
                ChatExchange(tuple(messages), response, self.backend_id, latency)
            )
        return response

    def close(self) -> None:
        self._fh.close()


def record_session(inner: Backend, sink: str | Path) -> TranscriptRecorder:
    return TranscriptRecorder(inner, sink)


# --- HTTP (OpenAI-compatible wire protocol) ---

class HttpBackend:
    """Client for a ``POST {base_url}/chat/completions`` endpoint.

    Retries transport failures (connection errors, 5xx) with exponential
    backoff, never content-level failures. The API key is read from the
    configured environment variable at call time.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout_s: float = 60.0,
        max_attempts: int = 3,
        temperature: float | None = None,
        backend_id: str = "http",
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.max_attempts = max_attempts
        self.temperature = temperature
        self.backend_id = backend_id

    def _wire_message(self, m: ChatMessage) -> dict:
        if not m.images:
            return {"role": m.role, "content": m.text}
        parts: list[dict] = []
        if m.text:
            parts.append({"type": "text", "text": m.text})
        for img in m.images:
            url = "data:image/png;base64," + base64.b64encode(img).decode("ascii")
            parts.append({"type": "image_url", "image_url": {"url": url}})
        return {"role": m.role, "content": parts}

    def _body(self, messages: Sequence[ChatMessage]) -> dict:
        body: dict = {
            "model": self.model,
            "messages": [self._wire_message(m) for m in messages],
        }
        if self.temperature is not None:
            body["temperature"] = self.temperature
        return body

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        import os

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = self._body(messages)
        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                resp = requests.post(url, json=body, headers=headers, timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
                time.sleep(0.25 * (2**attempt))
                continue
            if resp.status_code >= 500:
                last_error = BackendUnavailable(f"server error {resp.status_code}")
                time.sleep(0.25 * (2**attempt))
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(
                    f"chat endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendUnavailable(f"malformed completion payload: {exc}") from exc
            if not isinstance(text, str) or not text:
                raise BackendUnavailable("completion payload had empty content")
            return text
        raise BackendUnavailable(
            f"chat endpoint unreachable after {self.max_attempts} attempts: {last_error}"
        )
