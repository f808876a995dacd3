"""Expert -> adapter binding."""

from __future__ import annotations

from .base import AdapterRef, AdapterUnknown


class AdapterRegistry:
    """Immutable map from expert id to the adapter that serves it."""

    def __init__(self, bindings: dict[str, AdapterRef]):
        self._bindings = dict(bindings)

    def __contains__(self, expert) -> bool:
        return _key(expert) in self._bindings

    def ids(self) -> dict[str, str]:
        return {k: v.id for k, v in self._bindings.items()}

    def get(self, expert) -> AdapterRef:
        key = _key(expert)
        if key not in self._bindings:
            raise AdapterUnknown(f"no adapter registered for expert {key!r}")
        return self._bindings[key]


def _key(expert) -> str:
    return getattr(expert, "value", expert)


def activate_adapter(registry: AdapterRegistry, expert) -> AdapterRef:
    """Select the adapter bound to an expert.

    The swap itself happens server-side per request; activation is observable
    in completion usage metadata, which echoes the adapter id.
    """
    return registry.get(expert)
