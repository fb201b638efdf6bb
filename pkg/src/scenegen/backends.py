"""Planner backends: remote chat endpoint, transcript replay, and recording.

The deterministic rule-based mock lives in ``mock_backend``; everything here
is transport plumbing. A backend is anything with
``complete(system_prompt, user_prompt) -> str``.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Protocol

import httpx

from .errors import BackendError, ReplayError
from .prompts import stage_of_prompt

ENV_URL = "SCENEGEN_LLM_URL"
ENV_API_KEY = "SCENEGEN_LLM_API_KEY"
ENV_MODEL = "SCENEGEN_LLM_MODEL"

REMOTE_TIMEOUT_S = 60.0


class PlannerBackend(Protocol):
    def complete(self, system_prompt: str, user_prompt: str) -> str: ...


class RemoteBackend:
    """OpenAI-style chat-completions client, configured via environment.

    Sampling temperature is pinned to 0 so reruns are as reproducible as the
    remote model allows.
    """

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        client: httpx.Client | None = None,
    ):
        self.url = url or os.environ.get(ENV_URL)
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL)
        if not self.url:
            raise BackendError(f"remote backend needs an endpoint URL ({ENV_URL})")
        if not self.model:
            raise BackendError(f"remote backend needs a model name ({ENV_MODEL})")
        self._client = client or httpx.Client(timeout=REMOTE_TIMEOUT_S)

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_prompt},
            ],
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._client.post(self.url, json=body, headers=headers)
            response.raise_for_status()
            doc = response.json()
            return doc["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise BackendError(f"remote backend request failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(f"remote backend returned an unexpected payload: {exc}") from exc


class ReplayBackend:
    """Replays a recorded JSONL transcript of {stage, request, response} rows."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.exists():
            raise ReplayError(f"transcript not found: {self.path}")
        self._records = []
        with self.path.open() as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    self._records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ReplayError(f"{self.path}:{line_no}: bad transcript line: {exc}") from exc
        self._cursor = 0
        self._lock = threading.Lock()

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        del system_prompt
        stage = stage_of_prompt(user_prompt)
        with self._lock:
            if self._cursor >= len(self._records):
                raise ReplayError(f"transcript exhausted after {self._cursor} calls")
            record = self._records[self._cursor]
            self._cursor += 1
        if record.get("stage") != stage:
            raise ReplayError(
                f"transcript divergence at call {self._cursor}: "
                f"recorded stage {record.get('stage')!r}, requested {stage!r}"
            )
        return record["response"]


class RecordingBackend:
    """Wraps another backend and appends each exchange to a JSONL transcript."""

    def __init__(self, inner: PlannerBackend, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        response = self.inner.complete(system_prompt, user_prompt)
        record = {
            "stage": stage_of_prompt(user_prompt),
            "request": user_prompt,
            "response": response,
        }
        with self._lock:
            with self.path.open("a") as fh:
                fh.write(json.dumps(record) + "\n")
        return response


class ScriptedBackend:
    """Returns canned responses in order; used to exercise the repair loop."""

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self.requests: list[tuple[str, str]] = []
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.requests)

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        with self._lock:
            self.requests.append((system_prompt, user_prompt))
            if not self._responses:
                raise BackendError("scripted backend ran out of responses")
            if len(self._responses) == 1:
                return self._responses[0]
            return self._responses.pop(0)
