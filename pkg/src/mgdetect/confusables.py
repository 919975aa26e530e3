"""Confusable-character table: loading, validation, and folding.

The table ships as a versioned TSV (`data/confusables.tsv`). It drives two
inverse operations: the homoglyph attack (Latin -> lookalike, in attacks)
and defensive folding (lookalike -> Latin, here). Folding is total and
idempotent because no replacement character is itself a source and every
replacement maps back to exactly one source.
"""

from __future__ import annotations

import functools

from .resources import data_text


@functools.lru_cache(maxsize=None)
def confusable_table() -> dict[str, tuple[str, ...]]:
    table: dict[str, tuple[str, ...]] = {}
    for raw in data_text("confusables.tsv").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        source, _, repl = line.partition("\t")
        replacements = tuple(r for r in repl.split(",") if r)
        if len(source) != 1 or not replacements:
            raise ValueError(f"bad confusables line: {raw!r}")
        if any(len(r) != 1 for r in replacements) or source in replacements:
            raise ValueError(f"bad confusables line: {raw!r}")
        if source in table:
            raise ValueError(f"duplicate confusables source: {source!r}")
        table[source] = replacements
    return table


@functools.lru_cache(maxsize=None)
def fold_table() -> dict[str, str]:
    inverse: dict[str, str] = {}
    for source, replacements in confusable_table().items():
        for repl in replacements:
            if repl in inverse:
                raise ValueError(f"replacement {repl!r} maps to multiple sources")
            inverse[repl] = source
    return inverse


def fold_confusables(text: str) -> str:
    """Map every known lookalike character back to its Latin source."""
    table = fold_table()
    if not any(ch in table for ch in text):
        return text
    return "".join(table.get(ch, ch) for ch in text)
