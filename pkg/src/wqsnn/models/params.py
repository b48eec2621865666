"""Loading and overriding the packaged benchmark parameter defaults."""

from __future__ import annotations

import configparser
from importlib import resources
from pathlib import Path


def _read(path: str | Path | None = None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(default_section="defaults", inline_comment_prefixes=("#",))
    if path is None:
        cp.read_string(resources.files("wqsnn.models").joinpath("defaults.cfg").read_text())
    else:
        cp.read(path)
    return cp


def load_params(kind: str, overrides: dict[str, float] | None = None,
                path: str | Path | None = None) -> dict[str, float]:
    """Parameters of one benchmark model as floats, with overrides applied."""
    cp = _read(path)
    if not cp.has_section(kind):
        raise KeyError(f"no defaults for model {kind!r}")
    params = {k: float(v) for k, v in cp.items(kind)}
    for key, value in (overrides or {}).items():
        if key not in params:
            raise KeyError(f"unknown parameter {key!r} for model {kind!r}")
        params[key] = float(value)
    return params


def parse_overrides(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected KEY=VALUE, got {item!r}")
        out[key.strip()] = float(value)
    return out
