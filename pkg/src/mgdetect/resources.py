"""Access to bundled data files (confusable table, lexicons).

MGDETECT_DATA_DIR overrides the bundled directory; files are looked up by
name inside it. Loaders cache aggressively, so the override must be set
before first use within a process.
"""

from __future__ import annotations

import os
from importlib.resources import files
from pathlib import Path


def data_text(name: str) -> str:
    root = os.environ.get("MGDETECT_DATA_DIR")
    if root:
        return Path(root, name).read_text(encoding="utf-8")
    return (files("mgdetect.data") / name).read_text(encoding="utf-8")


def lexicon_lines(name: str) -> tuple[str, ...]:
    """Non-empty, non-comment lines of a bundled lexicon, stripped."""
    out = []
    for line in data_text(name).splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return tuple(out)
