"""Generation backends: deterministic mock and remote HTTP client."""

from .adapters import AdapterRegistry, activate_adapter
from .base import (
    AdapterRef,
    AdapterUnknown,
    BackendError,
    BackendUnavailable,
    Completion,
    GenerationBackend,
    GenerationRequest,
    StreamItem,
)
from .mock import MockBackend, MockRule, MockScript
from .remote import RemoteBackend

__all__ = [
    "AdapterRef",
    "AdapterRegistry",
    "AdapterUnknown",
    "BackendError",
    "BackendUnavailable",
    "Completion",
    "GenerationBackend",
    "GenerationRequest",
    "MockBackend",
    "MockRule",
    "MockScript",
    "RemoteBackend",
    "StreamItem",
    "activate_adapter",
]
