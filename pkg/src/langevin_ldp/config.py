"""Experiment configuration files.

A config is a JSON document ``{"command": ..., "params": {...}}``.  Parameter
names are the long option names of the subcommand with dashes replaced by
underscores, so any command line can be written down and replayed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigurationError

__all__ = ["ExperimentConfig"]

_TOP_KEYS = {"command", "params"}


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, list):
        return [_plain(v) for v in value]
    return value


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    def validate(self, allowed):
        """Reject parameters not in ``allowed``; returns ``self``."""
        unknown = sorted(set(self.params) - set(allowed))
        if unknown:
            raise ConfigurationError(
                f"unknown key(s) for {self.command!r}: {', '.join(unknown)}")
        return self

    def to_dict(self):
        return {"command": self.command,
                "params": {k: _plain(v) for k, v in sorted(self.params.items())}}

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = sorted(set(data) - _TOP_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown top-level key(s): {', '.join(unknown)}")
        if "command" not in data:
            raise ConfigurationError("config lacks 'command'")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ConfigurationError("'params' must be an object")
        return cls(str(data["command"]), dict(params))

    @classmethod
    def loads(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.loads(fh.read())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
