"""Chat-completion backends: one live HTTP client, one deterministic
scripted client for tests and replay, and a recording wrapper that turns
live sessions into replayable transcripts.

Every call is single-turn and stateless: the prompt is the whole
conversation. Memory between iterations travels inside the prompt (the
rolling summary), never as chat history.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Protocol

import httpx

from .errors import (
    AuthFailure,
    NonSuccessStatus,
    StorageFailure,
    Timeout,
    TransportFailure,
)

REDACTION = "[REDACTED]"


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings. The secret itself is never stored here, only
    the name of the environment variable that holds it."""

    endpoint_url: str
    model_name: str
    credential_env_var: str = "STAGECOACH_API_KEY"
    timeout: float = 120.0
    max_retries: int = 2
    temperature: Optional[float] = None


class ChatProvider(Protocol):
    def chat(self, prompt: str) -> str: ...


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class HttpChatProvider:
    """Live backend: HTTPS POST of a single-message conversation.

    Transport failures (including timeouts) are retried idempotently up to
    ``max_retries`` extra attempts; non-2xx responses are not retried.
    """

    def __init__(self, config: ProviderConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self._transport = transport

    def chat(self, prompt: str) -> str:
        secret = os.environ.get(self.config.credential_env_var)
        if not secret:
            raise AuthFailure(
                f"environment variable {self.config.credential_env_var} is not set"
            )
        body: dict = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.config.temperature is not None:
            body["temperature"] = self.config.temperature
        headers = {"Authorization": f"Bearer {secret}"}
        last_exc: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            try:
                with httpx.Client(
                    timeout=self.config.timeout, transport=self._transport
                ) as client:
                    response = client.post(
                        self.config.endpoint_url, json=body, headers=headers
                    )
            except httpx.TimeoutException as exc:
                last_exc = exc
                continue
            except httpx.TransportError as exc:
                last_exc = exc
                continue
            if response.status_code // 100 != 2:
                raise NonSuccessStatus(response.status_code, response.text[:200])
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise TransportFailure(f"malformed provider response: {exc}") from exc
        if isinstance(last_exc, httpx.TimeoutException):
            raise Timeout(str(last_exc)) from last_exc
        raise TransportFailure(str(last_exc)) from last_exc


class ScriptedProvider:
    """Deterministic backend: each call consumes exactly one canned entry,
    in order. Calls are serialized internally so concurrent use preserves
    transcript order."""

    def __init__(self, responses: Iterable[str], expected_hashes: Optional[list[Optional[str]]] = None):
        self._responses = list(responses)
        self._hashes = expected_hashes or [None] * len(self._responses)
        self._pos = 0
        self._lock = threading.Lock()
        self.seen_prompts: list[str] = []

    @classmethod
    def from_transcript(cls, path: str | Path, verify_hashes: bool = True) -> "ScriptedProvider":
        responses: list[str] = []
        hashes: list[Optional[str]] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            responses.append(entry["response"])
            hashes.append(entry.get("prompt_sha256") if verify_hashes else None)
        return cls(responses, hashes)

    @property
    def remaining(self) -> int:
        with self._lock:
            return len(self._responses) - self._pos

    def chat(self, prompt: str) -> str:
        with self._lock:
            if self._pos >= len(self._responses):
                raise TransportFailure("transcript exhausted")
            expected = self._hashes[self._pos]
            if expected is not None and prompt_sha256(prompt) != expected:
                raise TransportFailure(
                    f"transcript prompt mismatch at entry {self._pos + 1}"
                )
            response = self._responses[self._pos]
            self._pos += 1
            self.seen_prompts.append(prompt)
            return response


class FileTranscriptProvider:
    """Replays a JSONL transcript across process invocations: the position
    persists in a sidecar file so consecutive CLI commands consume
    consecutive entries of one recorded session."""

    def __init__(self, path: str | Path, verify_hashes: bool = True):
        self.path = Path(path)
        self._entries: list[dict] = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                self._entries.append(json.loads(line))
        self._verify = verify_hashes
        self._pos_path = self.path.with_suffix(self.path.suffix + ".pos")
        self._lock = threading.Lock()

    def _position(self) -> int:
        if self._pos_path.exists():
            return int(self._pos_path.read_text(encoding="utf-8").strip() or 0)
        return 0

    def chat(self, prompt: str) -> str:
        with self._lock:
            pos = self._position()
            if pos >= len(self._entries):
                raise TransportFailure("transcript exhausted")
            entry = self._entries[pos]
            expected = entry.get("prompt_sha256") if self._verify else None
            if expected is not None and prompt_sha256(prompt) != expected:
                raise TransportFailure(f"transcript prompt mismatch at entry {pos + 1}")
            self._pos_path.write_text(str(pos + 1), encoding="utf-8")
            return entry["response"]


class RecordingProvider:
    """Wraps any provider and appends one {prompt_sha256, response} JSONL
    entry per call, so live sessions become replayable fixtures. Secrets
    passed in ``redact`` are scrubbed from stored responses; prompts are
    stored only as hashes."""

    def __init__(self, inner: ChatProvider, path: str | Path, redact: Iterable[str] = ()):
        self.inner = inner
        self.path = Path(path)
        self._redact = [s for s in redact if s]
        self._lock = threading.Lock()

    def chat(self, prompt: str) -> str:
        response = self.inner.chat(prompt)
        stored = response
        for secret in self._redact:
            stored = stored.replace(secret, REDACTION)
        entry = {"prompt_sha256": prompt_sha256(prompt), "response": stored}
        try:
            with self._lock:
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(entry, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise StorageFailure(f"cannot write transcript {self.path}: {exc}") from exc
        return response


def record_mode(inner: ChatProvider, path: str | Path, redact: Iterable[str] = ()) -> RecordingProvider:
    return RecordingProvider(inner, path, redact)
