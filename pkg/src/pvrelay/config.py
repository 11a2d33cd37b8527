"""Flat ``key = value`` configuration files.

Lines are ``key = value``; ``#`` starts a comment.  Keys are grouped by
prefix:

``synth.*``     generator constants (:class:`pvrelay.synth.SynthParams`)
``sweep.*``     corpus axes (:class:`pvrelay.synth.SweepConfig`)
``pipeline.*``  training and inference settings (:class:`pvrelay.pipeline.PipelineConfig`)

Values are parsed by the type of the field's default: numbers, booleans
(``true``/``false``), ``none``, comma-separated tuples, and per-location
tables written ``f1:5.0, f2:5.5, ...``.
"""
from __future__ import annotations

import dataclasses
from typing import Any


class ConfigError(ValueError):
    pass


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{line_no}: expected 'key = value'")
        key = key.strip()
        if key in out:
            raise ConfigError(f"{source}:{line_no}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load(path) -> dict[str, str]:
    try:
        with open(path) as fh:
            return parse_text(fh.read(), str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _scalar(text: str, like: Any):
    t = text.strip()
    if t.lower() == "none":
        return None
    if isinstance(like, bool):
        if t.lower() in ("true", "yes", "1"):
            return True
        if t.lower() in ("false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {t!r}")
    if isinstance(like, int):
        return int(t)
    if isinstance(like, float):
        return float(t)
    if like is None:
        for conv in (int, float):
            try:
                return conv(t)
            except ValueError:
                pass
    return t


def coerce(text: str, default: Any):
    """Parse ``text`` into the type suggested by ``default``."""
    if isinstance(default, dict):
        table = dict(default)
        like = next(iter(default.values()), 0.0)
        for item in text.split(","):
            k, sep, v = item.partition(":")
            if not sep:
                raise ValueError(f"table entry {item!r} lacks ':'")
            table[k.strip()] = _scalar(v, like)
        return table
    if isinstance(default, tuple):
        like = default[0] if default else None
        if not text.strip():
            return ()
        return tuple(_scalar(v, like) for v in text.split(","))
    return _scalar(text, default)


def apply(obj, prefix: str, values: dict[str, str]):
    """Return a copy of dataclass ``obj`` with every ``prefix.field`` override applied."""
    fields = {f.name: f for f in dataclasses.fields(obj)}
    updates = {}
    for key, text in values.items():
        if not key.startswith(prefix + "."):
            continue
        name = key[len(prefix) + 1:]
        if name not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            updates[name] = coerce(text, getattr(obj, name))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    try:
        return dataclasses.replace(obj, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def check_known(values: dict[str, str], prefixes=("synth", "sweep", "pipeline")) -> None:
    for key in values:
        if key.split(".", 1)[0] not in prefixes:
            raise ConfigError(f"unknown config key {key!r}")
