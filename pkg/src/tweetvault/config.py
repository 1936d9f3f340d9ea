"""Plain `key = value` config files; CLI flags take precedence."""

from __future__ import annotations

from pathlib import Path
from typing import Union


def parse_kv_file(path: Union[str, Path]) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and `#` comments ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out
