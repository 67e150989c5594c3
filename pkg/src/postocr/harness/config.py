"""Flat ``key = value`` configuration files.

One setting per line, UTF-8. Blank lines and lines starting with ``#`` are
ignored; keys are option names with or without leading dashes, and ``-`` and
``_`` are interchangeable (``window-size = 20`` and ``window_size=20`` are the
same). Values are taken verbatim after stripping surrounding whitespace and
are parsed like the matching command-line flag, which always wins over the
file.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    pass


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    return parse_config(text, str(path))
