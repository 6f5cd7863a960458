"""Application configuration: a YAML file with sections paths / train /
synth / lexrank / service, path overrides from ASPECTSUM_* environment
variables, and final overrides from CLI flags.

Precedence, lowest to highest: dataclass defaults, YAML file,
environment, explicit overrides.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .mil import TrainConfig
from .summarizer import LexRankConfig
from .synthesis import SynthConfig

# environment variable suffix -> AppConfig path field
_ENV_PATHS = {
    "CORPUS": "corpus_path",
    "ASPECTS": "aspects_path",
    "EMBEDDINGS": "embeddings_path",
    "MODEL": "model_path",
    "DATASET": "dataset_path",
    "EVAL": "eval_path",
}
_PATH_KEYS = {"corpus": "corpus_path", "aspects": "aspects_path",
              "embeddings": "embeddings_path", "model": "model_path",
              "dataset": "dataset_path", "eval": "eval_path"}


@dataclass
class AppConfig:
    corpus_path: Path | None = None
    aspects_path: Path | None = None
    embeddings_path: Path | None = None
    model_path: Path | None = None
    dataset_path: Path | None = None
    eval_path: Path | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    lexrank: LexRankConfig = field(default_factory=LexRankConfig)
    host: str = "127.0.0.1"
    port: int = 8080

    def require(self, *fields: str) -> None:
        """Check that the named *_path fields are set and exist on disk."""
        for name in fields:
            value = getattr(self, name)
            if not value:
                flag = "--" + name.removesuffix("_path").replace("_", "-")
                raise ConfigError(f"missing required path {name} (set {flag} "
                                  f"or ASPECTSUM_{name.removesuffix('_path').upper()})")
            if not Path(value).exists():
                raise ConfigError(f"{name} does not exist: {value}")


def _build_section(cls, data: dict, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path=None, env: dict | None = None,
                overrides: dict | None = None) -> AppConfig:
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        raw = Path(path).read_text(encoding="utf-8")
        loaded = yaml.safe_load(raw)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: config root must be a mapping")
        data = loaded

    known_sections = {"paths", "train", "synth", "lexrank", "service"}
    unknown = set(data) - known_sections
    if unknown:
        raise ConfigError(f"{path}: unknown sections {sorted(unknown)}")

    config = AppConfig()
    paths = data.get("paths", {})
    if not isinstance(paths, dict):
        raise ConfigError(f"{path}: 'paths' must be a mapping")
    for key, value in paths.items():
        if key not in _PATH_KEYS:
            raise ConfigError(f"{path}: unknown path key {key!r}")
        setattr(config, _PATH_KEYS[key], Path(str(value)))

    if "train" in data:
        config.train = _build_section(TrainConfig, data["train"], "train")
    if "synth" in data:
        config.synth = _build_section(SynthConfig, data["synth"], "synth")
    if "lexrank" in data:
        config.lexrank = _build_section(LexRankConfig, data["lexrank"], "lexrank")
    service = data.get("service", {})
    if not isinstance(service, dict) or set(service) - {"host", "port"}:
        raise ConfigError(f"{path}: 'service' allows only host and port")
    config.host = str(service.get("host", config.host))
    config.port = int(service.get("port", config.port))

    for suffix, attr in _ENV_PATHS.items():
        value = env.get(f"ASPECTSUM_{suffix}")
        if value:
            setattr(config, attr, Path(value))

    for attr, value in (overrides or {}).items():
        if value is None:
            continue
        if not hasattr(config, attr):
            raise ConfigError(f"unknown config override {attr!r}")
        setattr(config, attr, Path(value) if attr.endswith("_path") else value)
    return config
