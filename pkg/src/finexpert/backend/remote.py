"""Remote text-generation client.

Speaks the chat-completion-style streaming protocol documented in
docs/interface.md: one POST to {base_url}/v1/generate with a JSON body, the
response a server-sent-event stream of incremental deltas. Any server that
implements that small contract works; tests run against a local stub.

Connection-level failures on idempotent requests are retried at most
``max_retries`` times with exponential backoff, but never after a chunk has
already been delivered downstream.
"""

from __future__ import annotations

import json
import os
import time
from typing import Iterator

import requests

from .base import (
    AdapterUnknown,
    BackendError,
    BackendUnavailable,
    Completion,
    GenerationBackend,
    GenerationRequest,
    StreamItem,
)


class RemoteBackend(GenerationBackend):
    def __init__(
        self,
        base_url: str,
        model: str = "default",
        api_key_env: str | None = None,
        timeout_s: float = 30.0,
        max_retries: int = 2,
        backoff_s: float = 0.5,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.session = session or requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def generate_stream(self, request: GenerationRequest) -> Iterator[StreamItem]:
        payload = {
            "model": self.model,
            "adapter": request.adapter.id if request.adapter else None,
            "messages": [{"role": "user", "content": request.prompt}],
            "stream": True,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "stop": request.stop_sequences,
        }
        attempt = 0
        while True:
            try:
                yield from self._stream_once(payload)
                return
            except _RetryableFailure as exc:
                # never retry once a chunk reached the consumer: a replayed
                # request would duplicate delivered text
                if exc.delivered or attempt >= self.max_retries:
                    raise BackendUnavailable(str(exc.cause)) from exc.cause
                attempt += 1
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))

    def _stream_once(self, payload: dict) -> Iterator[StreamItem]:
        delivered = False
        try:
            response = self.session.post(
                f"{self.base_url}/v1/generate",
                data=json.dumps(payload),
                headers=self._headers(),
                stream=True,
                timeout=self.timeout_s,
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise _RetryableFailure(exc, delivered=False)

        with response:
            if response.status_code == 404:
                raise AdapterUnknown(f"server rejected adapter {payload.get('adapter')!r}")
            if response.status_code >= 500:
                raise _RetryableFailure(
                    BackendError(f"server error {response.status_code}"), delivered=False
                )
            if response.status_code != 200:
                raise BackendError(f"unexpected status {response.status_code}: {response.text[:200]}")
            response.encoding = "utf-8"  # the wire format is UTF-8 JSON frames
            try:
                for line in response.iter_lines(decode_unicode=True):
                    if not line or not line.startswith("data:"):
                        continue
                    data = line[len("data:") :].strip()
                    if data == "[DONE]":
                        break
                    frame = json.loads(data)
                    if frame.get("delta"):
                        delivered = True
                        yield frame["delta"]
                    if frame.get("finish_reason"):
                        usage = dict(frame.get("usage") or {})
                        usage.setdefault("adapter", payload.get("adapter") or "")
                        yield Completion(finish_reason=frame["finish_reason"], usage=usage)
                        return
            except (requests.ConnectionError, requests.Timeout, requests.exceptions.ChunkedEncodingError) as exc:
                raise _RetryableFailure(exc, delivered=delivered)
        # stream ended without an explicit finish frame
        yield Completion(finish_reason="stop", usage={"adapter": payload.get("adapter") or ""})

    def health(self) -> bool:
        try:
            response = self.session.get(f"{self.base_url}/v1/health", timeout=self.timeout_s)
            return response.status_code == 200
        except requests.RequestException:
            return False


class _RetryableFailure(Exception):
    def __init__(self, cause: Exception, delivered: bool):
        super().__init__(str(cause))
        self.cause = cause
        self.delivered = delivered
