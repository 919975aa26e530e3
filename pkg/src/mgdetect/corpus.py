"""Corpus ingestion, splits, and example-unit construction.

The input format is JSON Lines: one record per line with the fields of
`Record`. All text is normalized to NFC at parse time so that later
character-level operations (homoglyph injection and folding) are measurable
and reproducible. Everything in this module is a pure function of its
inputs and an explicit seed; records and units are immutable once built.
"""

from __future__ import annotations

import json
import math
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import ParseError, SplitError
from .rng import SplitMix64, derive_seed

LANGUAGES = ("fr", "en")
UNIT_KINDS = ("qa", "full", "sentence")
VARIANTS = ("raw", "misspelled", "homoglyph")

# Joining token between question and answer for qa units. A blank line is
# neutral: it is not a token any particular model family uses.
QA_SEPARATOR = "\n\n"


class Label(str, Enum):
    HUMAN = "human"
    MACHINE = "machine"


@dataclass(frozen=True)
class Record:
    """One question with its human-written and machine-generated answers."""

    id: str
    question: str
    human_answers: tuple[str, ...]
    machine_answers: tuple[str, ...]
    language: str = "fr"
    source_tag: str = ""
    translation_quality: int | None = None

    def __post_init__(self) -> None:
        if self.language not in LANGUAGES:
            raise ValueError(f"unknown language {self.language!r}")
        if not self.human_answers and not self.machine_answers:
            raise ValueError("record has no answers")
        tq = self.translation_quality
        if tq is not None and not (1 <= tq <= 5):
            raise ValueError(f"translation_quality {tq} outside [1,5]")

    def answers(self, label: Label) -> tuple[str, ...]:
        return self.human_answers if label is Label.HUMAN else self.machine_answers


@dataclass(frozen=True)
class ExampleUnit:
    """One labeled classification instance."""

    text: str
    label: Label
    unit_kind: str
    record_id: str
    variant: str = "raw"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("unit text is empty")
        if self.unit_kind not in UNIT_KINDS:
            raise ValueError(f"unknown unit kind {self.unit_kind!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class Split:
    train: tuple[Record, ...]
    valid: tuple[Record, ...]
    test: tuple[Record, ...]


class UnitBuild(NamedTuple):
    units: list[ExampleUnit]
    skipped_empty: int


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _parse_answers(obj: dict, key: str, line_no: int) -> tuple[str, ...]:
    raw = obj.get(key, [])
    if isinstance(raw, str):
        raw = [raw]
    if not isinstance(raw, list) or any(not isinstance(a, str) for a in raw):
        raise ParseError(line_no, f"{key} must be a list of strings")
    return tuple(_nfc(a) for a in raw)


def parse_record(obj: dict, line_no: int, fallback_id: str) -> Record:
    if not isinstance(obj, dict):
        raise ParseError(line_no, "record is not an object")
    question = obj.get("question")
    if not isinstance(question, str):
        raise ParseError(line_no, "missing or non-string 'question'")
    rec_id = obj.get("id")
    if rec_id is None:
        rec_id = fallback_id
    elif not isinstance(rec_id, str):
        rec_id = str(rec_id)
    tq = obj.get("translation_quality")
    if tq is not None and not isinstance(tq, int):
        raise ParseError(line_no, "translation_quality must be an integer")
    try:
        return Record(
            id=rec_id,
            question=_nfc(question),
            human_answers=_parse_answers(obj, "human_answers", line_no),
            machine_answers=_parse_answers(obj, "machine_answers", line_no),
            language=obj.get("language", "fr"),
            source_tag=obj.get("source_tag", ""),
            translation_quality=tq,
        )
    except ValueError as exc:
        raise ParseError(line_no, str(exc)) from exc


def parse_corpus(stream: Iterable[str]) -> list[Record]:
    """Parse JSON Lines into records, in input order.

    Blank lines are skipped but still counted for line numbering. Records
    without an explicit id get "line-<n>". A repeated explicit id is an
    error: downstream joins (splits, per-record correlation) key on it.
    """
    records: list[Record] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(line_no, f"invalid JSON ({exc.msg})") from exc
        rec = parse_record(obj, line_no, fallback_id=f"line-{line_no}")
        if rec.id in seen_ids:
            raise ParseError(line_no, f"duplicate record id {rec.id!r}")
        seen_ids.add(rec.id)
        records.append(rec)
    return records


def parse_corpus_file(path) -> list[Record]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus(fh)


def write_corpus(records: Iterable[Record], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "id": rec.id,
                "question": rec.question,
                "human_answers": list(rec.human_answers),
                "machine_answers": list(rec.machine_answers),
                "language": rec.language,
                "source_tag": rec.source_tag,
            }
            if rec.translation_quality is not None:
                obj["translation_quality"] = rec.translation_quality
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
            n += 1
    return n


def _pick_balanced_test(shuffled: list[Record], test_pairs: int) -> tuple[list[Record], list[Record]]:
    """Greedy selection of test records keeping human/machine answer totals
    within +-1 of each other.

    Records are bucketed by their answer-count delta (humans minus machines),
    each bucket in shuffled order. Each step takes from the bucket whose
    delta moves the running balance closest to zero; ties prefer the
    opposite sign of the current balance, then the smaller |delta|.
    """
    buckets: dict[int, list[Record]] = {}
    for rec in shuffled:
        delta = len(rec.human_answers) - len(rec.machine_answers)
        buckets.setdefault(delta, []).append(rec)
    heads = {d: 0 for d in buckets}

    picked: list[Record] = []
    balance = 0
    for _ in range(test_pairs):
        available = [d for d in buckets if heads[d] < len(buckets[d])]
        best = min(
            available,
            key=lambda d: (abs(balance + d), 0 if balance * d < 0 else 1, abs(d), d),
        )
        picked.append(buckets[best][heads[best]])
        heads[best] += 1
        balance += best

    if abs(balance) > 1:
        missing = "human" if balance < 0 else "machine"
        raise SplitError(
            f"cannot balance test answers within +-1 (short of {missing} answers, "
            f"imbalance {balance})"
        )
    picked_ids = {rec.id for rec in picked}
    rest = [rec for rec in shuffled if rec.id not in picked_ids]
    return picked, rest


def build_split(records: list[Record], test_pairs: int, valid_fraction: float, seed: int) -> Split:
    """Carve out a balanced test set, then split the rest into train/valid.

    The remainder keeps its seeded shuffle order; validation takes the first
    ceil(valid_fraction * remaining) records. Deterministic in (records, seed).
    """
    if test_pairs > len(records):
        raise SplitError(f"test_pairs {test_pairs} exceeds corpus size {len(records)}")
    if not (0.0 < valid_fraction < 1.0):
        raise SplitError(f"valid_fraction {valid_fraction} outside (0,1)")
    if test_pairs > 0:
        if not any(rec.human_answers for rec in records):
            raise SplitError("cannot balance test set: class human absent")
        if not any(rec.machine_answers for rec in records):
            raise SplitError("cannot balance test set: class machine absent")

    shuffled = list(records)
    SplitMix64(derive_seed(seed, 0)).shuffle(shuffled)

    test, rest = _pick_balanced_test(shuffled, test_pairs)
    n_valid = math.ceil(valid_fraction * len(rest))
    valid = rest[:n_valid]
    train = rest[n_valid:]
    return Split(train=tuple(train), valid=tuple(valid), test=tuple(test))


# French abbreviations whose trailing period never ends a sentence. Multi-word
# entries ("p. ex.") are matched against the text tail, so their internal
# periods are guarded too.
ABBREVIATIONS = (
    "M.",
    "MM.",
    "Mme.",
    "Mlle.",
    "Dr.",
    "St.",
    "etc.",
    "cf.",
    "p. ex.",
    "ex.",
    "env.",
    "chap.",
    "vol.",
    "n°.",
)

_TERMINALS = ".!?…"


def _is_guarded(text: str, period_pos: int) -> bool:
    head = text[: period_pos + 1]
    return any(head.endswith(abbr) for abbr in ABBREVIATIONS)


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence segmentation.

    A boundary is a terminal mark (. ! ? ...) followed by whitespace and an
    uppercase letter or digit, unless the mark belongs to a guarded
    abbreviation. Segments partition the input: re-joining them with single
    spaces and collapsing whitespace reproduces the collapsed input.
    """
    segments: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINALS:
            # Consume a run of terminal marks ("?!", "..."), split after it.
            j = i
            while j + 1 < n and text[j + 1] in _TERMINALS:
                j += 1
            k = j + 1
            while k < n and text[k].isspace():
                k += 1
            follows = k < n and (text[k].isupper() or text[k].isdigit())
            guarded = ch == "." and i == j and _is_guarded(text, i)
            if follows and k > j + 1 and not guarded:
                seg = text[start : j + 1].strip()
                if seg:
                    segments.append(seg)
                start = k
            i = j + 1
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        segments.append(tail)
    return segments


def build_units(records: list[Record], kind: str) -> UnitBuild:
    """Build classification units from records.

    qa: question + blank line + answer, one unit per answer.
    full: the answer text alone, one unit per answer.
    sentence: one unit per sentence of each answer.

    Answers that are empty after trimming are skipped and tallied.
    """
    if kind not in UNIT_KINDS:
        raise ValueError(f"unknown unit kind {kind!r}")
    units: list[ExampleUnit] = []
    skipped = 0
    for rec in records:
        for label in (Label.HUMAN, Label.MACHINE):
            for answer in rec.answers(label):
                if not answer.strip():
                    skipped += 1
                    continue
                if kind == "qa":
                    units.append(
                        ExampleUnit(
                            text=rec.question + QA_SEPARATOR + answer,
                            label=label,
                            unit_kind="qa",
                            record_id=rec.id,
                        )
                    )
                elif kind == "full":
                    units.append(
                        ExampleUnit(text=answer, label=label, unit_kind="full", record_id=rec.id)
                    )
                else:
                    for sent in split_sentences(answer):
                        units.append(
                            ExampleUnit(
                                text=sent, label=label, unit_kind="sentence", record_id=rec.id
                            )
                        )
    return UnitBuild(units=units, skipped_empty=skipped)


def read_units(path) -> list[ExampleUnit]:
    units = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                units.append(
                    ExampleUnit(
                        text=obj["text"],
                        label=Label(obj["label"]),
                        unit_kind=obj["unit_kind"],
                        record_id=obj["record_id"],
                        variant=obj.get("variant", "raw"),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(line_no, f"bad unit: {exc}") from exc
    return units


def write_units(units: Iterable[ExampleUnit], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for u in units:
            fh.write(
                json.dumps(
                    {
                        "text": u.text,
                        "label": u.label.value,
                        "unit_kind": u.unit_kind,
                        "record_id": u.record_id,
                        "variant": u.variant,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            n += 1
    return n
