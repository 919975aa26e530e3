"""Sparse text features: hashed n-grams plus stylometric cue slots.

A feature vector is the concatenation of (a) character and word n-gram
counts hashed into a power-of-two table and (b) six fixed stylometric cue
slots appended after the hashed region. Extraction is a pure function of
(text, config); the config fingerprint travels with every vector so a
model trained under one config cannot silently score vectors from another.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .confusables import fold_confusables
from .corpus import split_sentences
from .hashing import fingerprint as _text_fingerprint
from .resources import lexicon_lines

# Cue slot order is part of the model format; never reorder.
CUE_NAMES = (
    "conditional",
    "hedging",
    "impersonal",
    "list_structure",
    "punct_irregular",
    "personal",
)
CUE_SLOT_COUNT = len(CUE_NAMES)


@dataclass(frozen=True)
class FeatureConfig:
    char_ngram_range: tuple[int, int] = (2, 4)
    word_ngram_range: tuple[int, int] = (1, 2)
    hash_dimension: int = 1 << 18
    lowercase: bool = True
    fold_confusables: bool = False
    use_stylometric: bool = True

    def __post_init__(self) -> None:
        cmin, cmax = self.char_ngram_range
        wmin, wmax = self.word_ngram_range
        if not (1 <= cmin <= cmax and 1 <= wmin <= wmax):
            raise ValueError("n-gram ranges require 1 <= min <= max")
        dim = self.hash_dimension
        if dim < 1024 or dim & (dim - 1):
            raise ValueError("hash_dimension must be a power of two >= 1024")

    @property
    def total_dimension(self) -> int:
        return self.hash_dimension + (CUE_SLOT_COUNT if self.use_stylometric else 0)

    def canonical(self) -> str:
        return (
            "char={}-{};word={}-{};dim={};lower={};fold={};cues={}".format(
                self.char_ngram_range[0],
                self.char_ngram_range[1],
                self.word_ngram_range[0],
                self.word_ngram_range[1],
                self.hash_dimension,
                int(self.lowercase),
                int(self.fold_confusables),
                int(self.use_stylometric),
            )
        )

    def fingerprint(self) -> str:
        return _config_fingerprint(self)


@functools.lru_cache(maxsize=None)
def _config_fingerprint(config: FeatureConfig) -> str:
    return _text_fingerprint(config.canonical())


@dataclass(frozen=True, eq=False)
class FeatureVector:
    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64, parallel to indices
    config_fingerprint: str
    dimension: int

    def to_text(self) -> str:
        """Sparse debug serialization, one `index:weight` line per entry."""
        pairs = zip(self.indices.tolist(), self.values.tolist())
        return "\n".join(f"{i}:{v!r}" for i, v in pairs)

    def l2_norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values.tolist()))


def extract(text: str, config: FeatureConfig, normalize: bool = False) -> FeatureVector:
    """Hashed n-gram counts (plus cue slots) for one text.

    Transform order: confusable folding (optional), cue rates on the folded
    text with case intact, lowercasing (optional), n-gram hashing. With
    normalize=True the whole vector is scaled to unit L2 norm.
    """
    if not text.strip():
        raise ValueError("cannot extract features from empty text")
    work = fold_confusables(text) if config.fold_confusables else text
    cues = stylometric_cues(work) if config.use_stylometric else None
    base = work.lower() if config.lowercase else work
    counts = _kernels.ngram_bucket_counts(
        base,
        config.char_ngram_range[0],
        config.char_ngram_range[1],
        config.word_ngram_range[0],
        config.word_ngram_range[1],
        config.hash_dimension - 1,
    )
    idx = sorted(counts)
    val = [float(counts[i]) for i in idx]
    if cues is not None:
        for slot, name in enumerate(CUE_NAMES):
            rate = cues[name]
            if rate != 0.0:
                idx.append(config.hash_dimension + slot)
                val.append(rate)
    if normalize and val:
        norm = math.sqrt(math.fsum(v * v for v in val))
        if norm > 0.0:
            val = [v / norm for v in val]
    return FeatureVector(
        indices=np.asarray(idx, dtype=np.int64),
        values=np.asarray(val, dtype=np.float64),
        config_fingerprint=config.fingerprint(),
        dimension=config.total_dimension,
    )


# --- stylometric cues ----------------------------------------------------

_CONDITIONAL_SUFFIXES = ("rait", "raient", "riez", "rions")
_WORD_RE = re.compile(r"[a-zà-öø-ÿœæ]+")
_LIST_ITEM_RE = re.compile(r"^\s*(?:\d+[.)]|[-•*])\s+")
# comma directly followed by a letter; digit pairs like 1,5 are numbers
_COMMA_NO_SPACE_RE = re.compile(r",(?=[^\s\d,.;:!?])")


def _normalize_apostrophes(text: str) -> str:
    return text.replace("’", "'").replace("ʼ", "'")


@functools.lru_cache(maxsize=None)
def _hedging_phrases() -> tuple[str, ...]:
    return lexicon_lines("hedging_fr.txt")


@functools.lru_cache(maxsize=None)
def _personal_phrases() -> tuple[str, ...]:
    return lexicon_lines("personal_fr.txt")


@functools.lru_cache(maxsize=None)
def _impersonal_openers() -> tuple[str, ...]:
    return lexicon_lines("impersonal_fr.txt")


@functools.lru_cache(maxsize=None)
def _stopwords() -> frozenset[str]:
    return frozenset(lexicon_lines("stopwords_fr.txt"))


def stylometric_cues(text: str) -> dict[str, float]:
    """Six per-1000-character cue rates; all zeros for empty text.

    conditional: tokens with conditional-mood endings. hedging / personal:
    lexicon phrase occurrences, case-insensitive. impersonal: sentences
    opening with an impersonal lead-in, case-sensitive. list_structure:
    enumerated/dashed lines and colon-terminated lead-in lines.
    punct_irregular: double spaces, missing space after a comma, unmatched
    parentheses or quotes.
    """
    n = len(text)
    if n == 0:
        return dict.fromkeys(CUE_NAMES, 0.0)
    norm = _normalize_apostrophes(text)
    lower = norm.lower()

    conditional = 0
    for token in _WORD_RE.findall(lower):
        if token.endswith(_CONDITIONAL_SUFFIXES):
            conditional += 1
    hedging = sum(lower.count(phrase) for phrase in _hedging_phrases())
    personal = sum(lower.count(phrase) for phrase in _personal_phrases())

    openers = _impersonal_openers()
    impersonal = 0
    for sentence in split_sentences(norm):
        if sentence.lstrip("«\"'- (").startswith(openers):
            impersonal += 1

    list_structure = 0
    for line in norm.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if _LIST_ITEM_RE.match(line) or stripped.endswith(":"):
            list_structure += 1

    punct = norm.count("  ")
    punct += len(_COMMA_NO_SPACE_RE.findall(norm))
    punct += abs(norm.count("(") - norm.count(")"))
    punct += abs(norm.count("«") - norm.count("»"))
    punct += norm.count('"') % 2

    scale = 1000.0 / n
    return {
        "conditional": conditional * scale,
        "hedging": hedging * scale,
        "impersonal": impersonal * scale,
        "list_structure": list_structure * scale,
        "punct_irregular": punct * scale,
        "personal": personal * scale,
    }


# --- question/answer overlap ---------------------------------------------

_OVERLAP_TOKEN_RE = re.compile(r"[0-9a-zà-öø-ÿœæ]+(?:-[0-9a-zà-öø-ÿœæ]+)*")


def _content_tokens(text: str) -> set[str]:
    lower = _normalize_apostrophes(text).lower().replace("'", " ")
    stop = _stopwords()
    tokens = set()
    for match in _OVERLAP_TOKEN_RE.findall(lower):
        token = match.replace("-", "")
        if token and token not in stop:
            tokens.add(token)
    return tokens


def question_overlap(question: str, answer: str) -> float:
    """Share of the question's content tokens that reappear in the answer.

    Lowercased, diacritics preserved, hyphenated compounds joined
    (wi-fi -> wifi), stopwords removed. Empty question content -> 0.0.
    """
    q_tokens = _content_tokens(question)
    if not q_tokens:
        return 0.0
    a_tokens = _content_tokens(answer)
    return len(q_tokens & a_tokens) / len(q_tokens)


__all__ = [
    "CUE_NAMES",
    "CUE_SLOT_COUNT",
    "FeatureConfig",
    "FeatureVector",
    "extract",
    "fold_confusables",
    "question_overlap",
    "stylometric_cues",
]
