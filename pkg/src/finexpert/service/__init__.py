"""HTTP service, chat engine, sessions, configuration, and the CLI."""

from .config import ConfigError, ServiceConfig, config_from_dict, load_config
from .engine import ChatEngine
from .events import EVENT_TYPES, ChatEvent
from .sessions import ChatSession, SessionStore

__all__ = [
    "ChatEngine",
    "ChatEvent",
    "ChatSession",
    "ConfigError",
    "EVENT_TYPES",
    "ServiceConfig",
    "SessionStore",
    "config_from_dict",
    "load_config",
]
