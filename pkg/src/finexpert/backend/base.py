"""Generation backend contract.

A backend turns a GenerationRequest into a stream of text chunks followed by
exactly one Completion record. Backends are shareable read-only handles;
per-request state is private, so concurrent generate_stream calls are fine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


class BackendError(Exception):
    pass


class BackendUnavailable(BackendError):
    pass


class AdapterUnknown(BackendError):
    pass


@dataclass(frozen=True)
class AdapterRef:
    """Opaque label selecting expert behavior at the serving side.

    The remote backend passes it through (the actual low-rank weight swap is
    the server's job); the mock backend uses it to select a script.
    """

    id: str
    metadata: dict = field(default_factory=dict, compare=False)

    @staticmethod
    def none() -> "AdapterRef":
        return AdapterRef(id="")


@dataclass
class GenerationRequest:
    prompt: str
    adapter: AdapterRef | None = None
    stop_sequences: list[str] = field(default_factory=list)
    max_tokens: int = 512
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if any(not s for s in self.stop_sequences):
            raise ValueError("stop sequences must be non-empty strings")


@dataclass
class Completion:
    finish_reason: str  # stop | length | error
    usage: dict = field(default_factory=dict)


StreamItem = Union[str, Completion]


class GenerationBackend:
    """Interface; see MockBackend and RemoteBackend."""

    def generate_stream(self, request: GenerationRequest) -> Iterator[StreamItem]:
        raise NotImplementedError

    def health(self) -> bool:
        return True
