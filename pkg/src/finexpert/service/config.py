"""Service configuration: one declarative JSON file, validated at startup.

Unknown keys are rejected so typos fail loudly. Secrets never live in the
file; the remote backend reads its key from the environment variable named
by ``backend.remote.api_key_env``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(Exception):
    pass


def _check_keys(section: str, data: dict, cls) -> None:
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")


@dataclass
class ListenConfig:
    host: str = "127.0.0.1"
    port: int = 8710


@dataclass
class MockBackendConfig:
    script_path: str | None = None  # default script
    scripts: dict = field(default_factory=dict)  # adapter id -> script path
    chunk_size: int = 8


@dataclass
class RemoteBackendConfig:
    base_url: str = "http://127.0.0.1:8000"
    model: str = "default"
    api_key_env: str = "FINEXPERT_API_KEY"
    timeout_s: float = 30.0
    max_retries: int = 2


@dataclass
class BackendConfig:
    kind: str = "mock"  # mock | remote
    mock: MockBackendConfig = field(default_factory=MockBackendConfig)
    remote: RemoteBackendConfig = field(default_factory=RemoteBackendConfig)


@dataclass
class ExpertsConfig:
    profiles_path: str | None = None


@dataclass
class KbConfig:
    index_dir: str | None = None
    top_k: int = 3
    threshold: float = 0.0
    noise_prob: float = 0.25
    guarantee_prob: float = 1.0
    max_chunk_tokens: int = 256


@dataclass
class FactoryConfig:
    seeds_path: str | None = None
    templates_path: str | None = None
    teacher_script_path: str | None = None
    budget: int = 10_000
    n_turns: int = 3
    category_mix: dict = field(default_factory=dict)
    noise_prob: float = 0.25
    guarantee_prob: float = 1.0
    top_k: int = 3


@dataclass
class EvalConfig:
    few_shot_k: int = 5
    judge: str = "mock"  # mock | remote
    judge_script_path: str | None = None
    tolerance: float = 1e-6


@dataclass
class LimitsConfig:
    max_calls: int = 8
    max_tokens: int = 2048


@dataclass
class ServiceConfig:
    listen: ListenConfig = field(default_factory=ListenConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    experts: ExpertsConfig = field(default_factory=ExpertsConfig)
    kb: KbConfig = field(default_factory=KbConfig)
    factory: FactoryConfig = field(default_factory=FactoryConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    sessions_dir: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "listen": ListenConfig,
    "backend": BackendConfig,
    "experts": ExpertsConfig,
    "kb": KbConfig,
    "factory": FactoryConfig,
    "eval": EvalConfig,
    "limits": LimitsConfig,
}


def config_from_dict(data: dict) -> ServiceConfig:
    _check_keys("config", data, ServiceConfig)
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name not in data:
            continue
        section = data[name]
        if not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be an object")
        if name == "backend":
            _check_keys("backend", section, BackendConfig)
            sub = dict(section)
            if "mock" in sub:
                _check_keys("backend.mock", sub["mock"], MockBackendConfig)
                sub["mock"] = MockBackendConfig(**sub["mock"])
            if "remote" in sub:
                _check_keys("backend.remote", sub["remote"], RemoteBackendConfig)
                sub["remote"] = RemoteBackendConfig(**sub["remote"])
            kwargs[name] = BackendConfig(**sub)
        else:
            _check_keys(name, section, cls)
            kwargs[name] = cls(**section)
    if "sessions_dir" in data:
        kwargs["sessions_dir"] = data["sessions_dir"]
    config = ServiceConfig(**kwargs)
    _validate(config)
    return config


def _validate(config: ServiceConfig) -> None:
    if config.backend.kind not in ("mock", "remote"):
        raise ConfigError(f"backend.kind must be mock or remote, got {config.backend.kind!r}")
    if config.kb.top_k < 1:
        raise ConfigError("kb.top_k must be >= 1")
    if not 0.0 <= config.kb.noise_prob <= 1.0:
        raise ConfigError("kb.noise_prob must be in [0, 1]")
    if config.limits.max_tokens < 1:
        raise ConfigError("limits.max_tokens must be >= 1")
    if config.limits.max_calls < 0:
        raise ConfigError("limits.max_calls must be >= 0")
    if config.eval.judge not in ("mock", "remote"):
        raise ConfigError("eval.judge must be mock or remote")
    mix = config.factory.category_mix
    if mix and abs(sum(mix.values()) - 1.0) > 1e-9:
        raise ConfigError("factory.category_mix must sum to 1")


def load_config(path: str | Path) -> ServiceConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return config_from_dict(data)
