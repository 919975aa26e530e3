"""String hashing for feature buckets and config fingerprints.

The bucket hash is FNV-1a (64-bit) over UTF-8 bytes, reduced modulo the
(power-of-two) hash dimension. FNV-1a is fixed here as the wire protocol:
any reimplementation in another language must reproduce bucket indices
bit-for-bit. The compiled kernel inlines the same loop; a test pins the two
against each other.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# Domain prefixes keep char n-grams and word n-grams in separate hash
# families even when their bytes coincide.
CHAR_DOMAIN = b"c\x00"
WORD_DOMAIN = b"w\x00"


def fnv1a64(data: bytes, h: int = FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def bucket(domain: bytes, gram: str, dim: int) -> int:
    """Feature bucket index for one n-gram. dim must be a power of two."""
    return fnv1a64(gram.encode("utf-8"), fnv1a64(domain)) & (dim - 1)


def fingerprint(text: str) -> str:
    """16-hex-digit fingerprint of a canonical description string."""
    return format(fnv1a64(text.encode("utf-8")), "016x")
