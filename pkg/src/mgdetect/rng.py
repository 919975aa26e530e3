"""Deterministic, platform-independent randomness.

Every random decision in this toolkit flows through SplitMix64, a 64-bit
generator defined purely over integer arithmetic, so the same seed produces
the same bytes on any interpreter, OS, or architecture. Library PRNGs are
deliberately avoided: their stream definitions differ across ecosystems and
versions, which would break the reproducibility contract.

Stream derivation: independent streams are obtained with `derive_seed`,
which mixes an integer path (e.g. per-unit index, per-epoch index) into the
base seed. Consumers draw "one decision per candidate site, in order", so
parallel processing over units cannot change results.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche mix of a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, *path: int) -> int:
    """Derive an independent stream seed from a base seed and an index path."""
    s = seed & _MASK64
    for p in path:
        s = mix64(s ^ mix64(p & _MASK64))
    return s


class SplitMix64:
    """Sequential SplitMix64 stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1), using the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo reduction; the bias is ~n/2^64
        and irrelevant at the n used here (table sizes, token lengths)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, descending."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
