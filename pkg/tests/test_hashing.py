"""FNV-1a hashing and bucket tests.

Known values are the published FNV-1a 64-bit test vectors: the empty
string hashes to the offset basis, "a" to 0xAF63DC4C8601EC8C, and
"foobar" to 0x85944171F73967E8.
"""

from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from mgdetect.hashing import (
    CHAR_DOMAIN,
    FNV_OFFSET,
    FNV_PRIME,
    WORD_DOMAIN,
    bucket,
    fingerprint,
    fnv1a64,
)

KNOWN_VECTORS = (
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"foobar", 0x85944171F73967E8),
)


def test_known_vectors():
    for data, expected in KNOWN_VECTORS:
        assert fnv1a64(data) == expected


def test_offset_and_prime_constants():
    assert FNV_OFFSET == 0xCBF29CE484222325
    assert FNV_PRIME == 0x100000001B3


def _reference_fnv(data: bytes, h: int) -> int:
    # independent expression of the algorithm, one multiply spelled out
    for b in data:
        h = h ^ b
        h = (h * 0x100000001B3) % (1 << 64)
    return h


@given(st.binary(max_size=256))
def test_matches_reference_loop(data):
    assert fnv1a64(data) == _reference_fnv(data, 0xCBF29CE484222325)


@given(st.binary(max_size=64), st.binary(max_size=64))
def test_chaining_equals_concatenation(a, b):
    assert fnv1a64(b, fnv1a64(a)) == fnv1a64(a + b)


@given(st.text(max_size=32), st.integers(min_value=10, max_value=20))
def test_bucket_range_and_domains(gram, dim_log):
    dim = 1 << dim_log
    for domain in (CHAR_DOMAIN, WORD_DOMAIN):
        idx = bucket(domain, gram, dim)
        assert 0 <= idx < dim


def test_bucket_equals_seeded_hash():
    dim = 1 << 18
    for gram in ("ab", "les", "wi-fi", "été"):
        expected = _reference_fnv(
            gram.encode("utf-8"), _reference_fnv(CHAR_DOMAIN, 0xCBF29CE484222325)
        ) & (dim - 1)
        assert bucket(CHAR_DOMAIN, gram, dim) == expected


def test_domain_separation_example():
    # same bytes, different family: these particular grams land apart
    dim = 1 << 18
    grams = ["le", "la", "de", "un", "et", "en", "ou"]
    assert any(
        bucket(CHAR_DOMAIN, g, dim) != bucket(WORD_DOMAIN, g, dim) for g in grams
    )


def test_fingerprint_format():
    fp = fingerprint("char=2-4;word=1-2")
    assert len(fp) == 16
    assert all(c in "0123456789abcdef" for c in fp)
    assert fingerprint("char=2-4;word=1-2") == fp
    assert fingerprint("char=2-5;word=1-2") != fp


def test_fingerprint_empty_is_offset_basis():
    assert fingerprint("") == format(0xCBF29CE484222325, "016x")
