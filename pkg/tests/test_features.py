"""Feature extraction: hashed n-grams, cue slots, overlap, config guards."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgdetect.attacks import PerturbationSpec, apply_homoglyph
from mgdetect.features import (
    CUE_NAMES,
    CUE_SLOT_COUNT,
    FeatureConfig,
    extract,
    question_overlap,
    stylometric_cues,
)

SMALL = FeatureConfig(
    char_ngram_range=(2, 2),
    word_ngram_range=(1, 1),
    hash_dimension=1 << 10,
    use_stylometric=False,
)


def _fnv(data: bytes, h: int = 0xCBF29CE484222325) -> int:
    for b in data:
        h = ((h ^ b) * 0x100000001B3) % (1 << 64)
    return h


def _char_bucket(gram: str, dim: int) -> int:
    return _fnv(gram.encode("utf-8"), _fnv(b"c\x00")) & (dim - 1)


def _word_bucket(gram: str, dim: int) -> int:
    return _fnv(gram.encode("utf-8"), _fnv(b"w\x00")) & (dim - 1)


def test_config_validation():
    with pytest.raises(ValueError, match="ranges"):
        FeatureConfig(char_ngram_range=(3, 2))
    with pytest.raises(ValueError, match="ranges"):
        FeatureConfig(word_ngram_range=(0, 1))
    with pytest.raises(ValueError, match="power of two"):
        FeatureConfig(hash_dimension=1000)
    with pytest.raises(ValueError, match="power of two"):
        FeatureConfig(hash_dimension=3 << 10)


def test_config_fingerprint_distinguishes_configs():
    a = FeatureConfig()
    b = FeatureConfig(char_ngram_range=(2, 5))
    assert a.fingerprint() == FeatureConfig().fingerprint()
    assert a.fingerprint() != b.fingerprint()
    assert a.total_dimension == a.hash_dimension + CUE_SLOT_COUNT
    assert SMALL.total_dimension == SMALL.hash_dimension


def test_extract_counts_match_reference_hashing():
    # "aa": one char bigram "aa", one word unigram "aa"
    vec = extract("aa", SMALL)
    dim = SMALL.hash_dimension
    expected = sorted([_char_bucket("aa", dim), _word_bucket("aa", dim)])
    assert vec.indices.tolist() == expected
    assert vec.values.tolist() == [1.0, 1.0]
    assert vec.dimension == SMALL.total_dimension
    assert vec.config_fingerprint == SMALL.fingerprint()


def test_extract_counts_repeated_grams():
    # "ababa": char bigrams ab, ba, ab, ba; word unigram "ababa"
    vec = extract("ababa", SMALL)
    dim = SMALL.hash_dimension
    counts = dict(zip(vec.indices.tolist(), vec.values.tolist()))
    assert counts[_char_bucket("ab", dim)] == 2.0
    assert counts[_char_bucket("ba", dim)] == 2.0
    assert counts[_word_bucket("ababa", dim)] == 1.0


def test_extract_spans_spaces_in_char_grams():
    vec = extract("a b", SMALL)
    dim = SMALL.hash_dimension
    counts = dict(zip(vec.indices.tolist(), vec.values.tolist()))
    assert counts[_char_bucket("a ", dim)] == 1.0
    assert counts[_char_bucket(" b", dim)] == 1.0


def test_extract_word_bigrams_join_tokens():
    config = FeatureConfig(
        char_ngram_range=(2, 2),
        word_ngram_range=(2, 2),
        hash_dimension=1 << 10,
        use_stylometric=False,
    )
    vec = extract("un bon plan", config)
    dim = config.hash_dimension
    counts = dict(zip(vec.indices.tolist(), vec.values.tolist()))
    assert counts[_word_bucket("un bon", dim)] == 1.0
    assert counts[_word_bucket("bon plan", dim)] == 1.0


def test_extract_lowercases_by_default():
    assert np.array_equal(extract("ABC", SMALL).indices, extract("abc", SMALL).indices)
    keep = FeatureConfig(
        char_ngram_range=(2, 2),
        word_ngram_range=(1, 1),
        hash_dimension=1 << 10,
        lowercase=False,
        use_stylometric=False,
    )
    assert not np.array_equal(extract("ABC", keep).indices, extract("abc", keep).indices)


def test_extract_rejects_blank():
    for blank in ("", "   ", "\n\t"):
        with pytest.raises(ValueError, match="empty text"):
            extract(blank, SMALL)


def test_extract_indices_sorted_and_in_range():
    config = FeatureConfig(hash_dimension=1 << 10)
    vec = extract("Cela pourrait suffire, je pense que oui.", config)
    idx = vec.indices.tolist()
    assert idx == sorted(idx)
    assert idx[-1] < config.total_dimension
    assert len(set(idx)) == len(idx)


def test_extract_normalized_has_unit_norm():
    vec = extract("une phrase ordinaire pour la norme", FeatureConfig(), normalize=True)
    assert math.isclose(vec.l2_norm(), 1.0, rel_tol=1e-12)


def test_cue_slots_appended_after_hash_region():
    config = FeatureConfig(hash_dimension=1 << 10)
    vec = extract("Cela pourrait suffire.", config)
    slots = [i - config.hash_dimension for i in vec.indices.tolist() if i >= config.hash_dimension]
    assert CUE_NAMES.index("conditional") in slots
    assert CUE_NAMES.index("impersonal") in slots


def test_fold_config_restores_attacked_vectors():
    config = FeatureConfig(fold_confusables=True)
    text = "Il est possible que la piste soit bonne pour plusieurs raisons."
    attacked = apply_homoglyph(text, PerturbationSpec("homoglyph", 1.0, 3))
    assert attacked != text
    a = extract(text, config)
    b = extract(attacked, config)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.values, b.values)


# --- stylometric cues -------------------------------------------------------

CUE_TEXT = (
    "Voici les points :\n"
    "- il est possible que la piste soit bonne\n"
    "- on pourrait tester,puis noter.\n"
    "Cela devrait suffire.  Je pense que c'est tout."
)


def test_cue_rates_hand_counted():
    cues = stylometric_cues(CUE_TEXT)
    scale = 1000.0 / len(CUE_TEXT)
    assert cues["conditional"] == pytest.approx(2 * scale)  # pourrait, devrait
    assert cues["hedging"] == pytest.approx(1 * scale)  # il est possible que
    assert cues["impersonal"] == pytest.approx(1 * scale)  # sentence led by Cela
    assert cues["list_structure"] == pytest.approx(3 * scale)  # colon lead + 2 dashes
    assert cues["punct_irregular"] == pytest.approx(2 * scale)  # double space, ",p"
    assert cues["personal"] == pytest.approx(1 * scale)  # je pense


def test_cue_empty_text_is_all_zero():
    assert stylometric_cues("") == dict.fromkeys(CUE_NAMES, 0.0)


def test_cue_curly_apostrophe_normalized():
    straight = stylometric_cues("j'avoue que non, selon moi.")
    curly = stylometric_cues("j’avoue que non, selon moi.")
    assert curly == straight
    assert curly["personal"] > 0.0


def test_cue_unmatched_punctuation():
    cues = stylometric_cues("il reste (un souci")
    assert cues["punct_irregular"] == pytest.approx(1000.0 / len("il reste (un souci"))


def test_cue_numbered_list_items():
    text = "1. premier point\n2) second point\n"
    cues = stylometric_cues(text)
    assert cues["list_structure"] == pytest.approx(2 * 1000.0 / len(text))


def test_cue_comma_in_numbers_not_flagged():
    assert stylometric_cues("il reste 1,5 litre au fond")["punct_irregular"] == 0.0


@given(st.text(max_size=300))
def test_cue_rates_are_finite_and_nonnegative(text):
    cues = stylometric_cues(text)
    assert set(cues) == set(CUE_NAMES)
    for value in cues.values():
        assert math.isfinite(value)
        assert value >= 0.0


# --- question overlap -------------------------------------------------------


def test_overlap_half():
    assert question_overlap("Pourquoi le wi-fi coupe ?", "le wifi marche") == 0.5


def test_overlap_full_and_empty():
    assert question_overlap("Pourquoi le wi-fi coupe ?", "le wifi coupe") == 1.0
    assert question_overlap("Pourquoi le est ce que ?", "peu importe") == 0.0
    assert question_overlap("", "du texte") == 0.0


def test_overlap_is_asymmetric_share_of_question():
    # answer tokens beyond the question do not change the denominator
    a = question_overlap("Pourquoi la nuit ?", "la nuit surtout et bien d'autres choses")
    assert a == 1.0


@given(st.text(max_size=120), st.text(max_size=120))
def test_overlap_bounded(question, answer):
    value = question_overlap(question, answer)
    assert 0.0 <= value <= 1.0
