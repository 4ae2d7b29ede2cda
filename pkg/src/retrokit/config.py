"""Run configuration merged from file, environment, and flags.

Precedence: command-line flags beat environment variables beat the
config file.  The fully resolved mapping is embedded in every report for
provenance.  TOML files are read with tomllib/tomli; ``.ini``/``.cfg``
files with configparser (flat key=value under a ``[retrokit]`` section).
"""

from __future__ import annotations

import configparser
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "RETROKIT_"

_KNOWN_KEYS = {
    "seed": int,
    "workers": int,
    "k": int,
    "oracle": str,
    "offline": bool,
    "endpoint": str,
    "api_key": str,
    "model": str,
    "temperature": float,
    "max_tokens": int,
    "presence_penalty": float,
    "frequency_penalty": float,
    "variants_per_instance": int,
    "queue_capacity": int,
    "consumers": int,
    "per_consumer_concurrency": int,
}

_DEFAULTS = {
    "seed": 0,
    "workers": 1,
    "k": 100,
    "oracle": "template",
    "offline": False,
}


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def __getitem__(self, key: str):
        return self.values[key]

    def as_dict(self) -> dict:
        return dict(sorted(self.values.items()))


def _coerce(key: str, raw):
    kind = _KNOWN_KEYS.get(key)
    if kind is None or isinstance(raw, kind):
        return raw
    if kind is bool:
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    return kind(raw)


def _read_file(path: Path) -> dict:
    if path.suffix in (".ini", ".cfg"):
        parser = configparser.ConfigParser()
        parser.read(path)
        section = "retrokit" if parser.has_section("retrokit") else parser.default_section
        return dict(parser[section])
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    flat: dict = {}
    for key, value in data.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def _read_env(environ) -> dict:
    out = {}
    for key in _KNOWN_KEYS:
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            out[key] = raw
    return out


def resolve_config(
    config_path: str | None = None,
    flags: dict | None = None,
    environ=None,
) -> RunConfig:
    """Merge defaults < file < environment < flags (None flags ignored)."""
    environ = os.environ if environ is None else environ
    values: dict = dict(_DEFAULTS)
    if config_path:
        values.update(_read_file(Path(config_path)))
    values.update(_read_env(environ))
    for key, value in (flags or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig(
        values={k: _coerce(k, v) for k, v in values.items()}
    )
