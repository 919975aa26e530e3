"""Character-level adversarial perturbations and training-mix construction.

Determinism protocol
--------------------
All randomness comes from SplitMix64 streams (see rng). A perturbation is
fully determined by (kind, rate, seed, text, stream index): the stream seed
is derive_seed(seed, stream_index), and draws happen one candidate site at
a time, in text order. Batch operations give unit i the stream index i, so
units can be perturbed in parallel with identical results.

Homoglyph: every character with an entry in the confusable table is a
candidate site. One uniform draw decides replacement (probability = rate);
on a hit, a second draw picks among the character's confusables. Character
count and all non-candidate characters (whitespace included) are untouched.

Misspelling: candidate sites are whitespace tokens of length >= 3. One draw
decides perturbation; on a hit, further draws pick an action among
{swap adjacent interior characters, delete an interior character,
substitute an interior character with a keyboard neighbor, insert a
keyboard neighbor after an interior character} and its position. First and
last characters of the token and the whitespace structure are never
touched. An action that is infeasible at the drawn site (swap on a 3-char
token, no keyboard neighbor for the drawn character) leaves the token
unchanged; the draws are still consumed, keeping streams aligned.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .confusables import confusable_table
from .corpus import ExampleUnit
from .errors import VariantError
from .rng import SplitMix64, derive_seed

ATTACK_KINDS = ("misspelling", "homoglyph")

# Default per-site rate: corrupts visibly while staying readable.
DEFAULT_RATE = 0.3

# Keyboard adjacency, letters only, distance 1. AZERTY is the default for
# French text; QWERTY is selectable. Characters without an entry (accented
# letters, digits, punctuation) get no substitute/insert neighbors.
AZERTY_NEIGHBORS = {
    "a": "zq",
    "z": "aes",
    "e": "zrd",
    "r": "etf",
    "t": "ryg",
    "y": "tuh",
    "u": "yij",
    "i": "uok",
    "o": "ipl",
    "p": "olm",
    "q": "asw",
    "s": "qdzx",
    "d": "sfec",
    "f": "dgrv",
    "g": "fhtb",
    "h": "gjyn",
    "j": "hkun",
    "k": "jli",
    "l": "kmo",
    "m": "lp",
    "w": "xq",
    "x": "wcs",
    "c": "xvd",
    "v": "cbf",
    "b": "vng",
    "n": "bhj",
}

QWERTY_NEIGHBORS = {
    "q": "wa",
    "w": "qes",
    "e": "wrd",
    "r": "etf",
    "t": "ryg",
    "y": "tuh",
    "u": "yij",
    "i": "uok",
    "o": "ipl",
    "p": "ol",
    "a": "qsz",
    "s": "adwx",
    "d": "sfec",
    "f": "dgrv",
    "g": "fhtb",
    "h": "gjyn",
    "j": "hkum",
    "k": "jli",
    "l": "kop",
    "z": "asx",
    "x": "zcs",
    "c": "xvd",
    "v": "cbf",
    "b": "vng",
    "n": "bmh",
    "m": "njk",
}

KEYBOARDS = {"azerty": AZERTY_NEIGHBORS, "qwerty": QWERTY_NEIGHBORS}


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    rate: float
    seed: int

    def __post_init__(self) -> None:
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if not (0.0 <= self.rate <= 1.0):
            raise ValueError(f"rate {self.rate} outside [0,1]")


def apply_homoglyph(text: str, spec: PerturbationSpec, stream_index: int = 0) -> str:
    if spec.kind != "homoglyph":
        raise ValueError(f"spec kind is {spec.kind!r}, expected homoglyph")
    table = confusable_table()
    rng = SplitMix64(derive_seed(spec.seed, stream_index))
    out = []
    for ch in text:
        repls = table.get(ch)
        if repls is not None and rng.next_float() < spec.rate:
            out.append(repls[rng.next_below(len(repls))])
        else:
            out.append(ch)
    return "".join(out)


_SWAP, _DELETE, _SUBSTITUTE, _INSERT = range(4)


def _match_case(repl: str, original: str) -> str:
    return repl.upper() if original.isupper() else repl


def _perturb_token(token: str, rng: SplitMix64, neighbors: dict[str, str]) -> str:
    n = len(token)
    action = rng.next_below(4)
    if action == _SWAP:
        if n < 4:
            return token
        p = 1 + rng.next_below(n - 3)
        chars = list(token)
        chars[p], chars[p + 1] = chars[p + 1], chars[p]
        return "".join(chars)
    p = 1 + rng.next_below(n - 2)
    if action == _DELETE:
        return token[:p] + token[p + 1 :]
    keys = neighbors.get(token[p].lower())
    if not keys:
        rng.next_u64()  # burn the choice draw to keep the stream aligned
        return token
    key = keys[rng.next_below(len(keys))]
    if action == _SUBSTITUTE:
        return token[:p] + _match_case(key, token[p]) + token[p + 1 :]
    return token[: p + 1] + _match_case(key, token[p]) + token[p + 1 :]


def apply_misspelling(
    text: str, spec: PerturbationSpec, stream_index: int = 0, keyboard: str = "azerty"
) -> str:
    if spec.kind != "misspelling":
        raise ValueError(f"spec kind is {spec.kind!r}, expected misspelling")
    neighbors = KEYBOARDS[keyboard]
    rng = SplitMix64(derive_seed(spec.seed, stream_index))
    parts = re.split(r"(\s+)", text)
    for idx, part in enumerate(parts):
        if len(part) >= 3 and not part.isspace():
            if rng.next_float() < spec.rate:
                parts[idx] = _perturb_token(part, rng, neighbors)
    return "".join(parts)


def apply_attack(
    text: str, spec: PerturbationSpec, stream_index: int = 0, keyboard: str = "azerty"
) -> str:
    if spec.kind == "homoglyph":
        return apply_homoglyph(text, spec, stream_index)
    return apply_misspelling(text, spec, stream_index, keyboard)


_VARIANT_FOR_KIND = {"misspelling": "misspelled", "homoglyph": "homoglyph"}


def _perturbed_unit(
    unit: ExampleUnit, spec: PerturbationSpec, stream_index: int, keyboard: str
) -> ExampleUnit:
    return ExampleUnit(
        text=apply_attack(unit.text, spec, stream_index, keyboard),
        label=unit.label,
        unit_kind=unit.unit_kind,
        record_id=unit.record_id,
        variant=_VARIANT_FOR_KIND[spec.kind],
    )


def perturb_testset(
    units: list[ExampleUnit], kind: str, rate: float, seed: int, keyboard: str = "azerty"
) -> list[ExampleUnit]:
    """Perturb every unit, preserving order; unit i uses stream index i."""
    spec = PerturbationSpec(kind=kind, rate=rate, seed=seed)
    return [_perturbed_unit(u, spec, i, keyboard) for i, u in enumerate(units)]


def build_training_mix(
    units: list[ExampleUnit],
    seed: int,
    misspell_rate: float = DEFAULT_RATE,
    homoglyph_rate: float = DEFAULT_RATE,
    keyboard: str = "azerty",
) -> list[ExampleUnit]:
    """Noise-augmented training set: all raw units, plus a misspelled copy of
    half of them and a homoglyphed copy of the other half.

    The halves partition the input (seeded shuffle, first ceil(N/2) indices
    to misspelling), so the output has exactly floor(N/2)+ceil(N/2) extra
    units and the label histogram doubles exactly. Perturbed copies keep
    their unit's original index as stream index and are emitted in ascending
    input order after the raw block.
    """
    for u in units:
        if u.variant != "raw":
            raise VariantError(f"training mix expects raw units, got {u.variant!r}")
    n = len(units)
    order = list(range(n))
    SplitMix64(derive_seed(seed, 0)).shuffle(order)
    cut = (n + 1) // 2
    ms_idx = sorted(order[:cut])
    hg_idx = sorted(order[cut:])

    ms_spec = PerturbationSpec("misspelling", misspell_rate, derive_seed(seed, 1))
    hg_spec = PerturbationSpec("homoglyph", homoglyph_rate, derive_seed(seed, 2))
    out = list(units)
    out.extend(_perturbed_unit(units[i], ms_spec, i, keyboard) for i in ms_idx)
    out.extend(_perturbed_unit(units[i], hg_spec, i, keyboard) for i in hg_idx)
    return out
