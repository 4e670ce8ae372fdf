import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vdb_channel.errorsets import (ErrorVector, SignedDistortionMultiset, Word, build_error_sets,
                                   compatible_words, count_convolution, set_convolve,
                                   signed_distortion)
from vdb_channel.exceptions import CapacityError, InvalidOperandError, ValidationError


def test_zero_vector_has_no_distortion():
    assert signed_distortion(ErrorVector(0, 0, 8)) == 0


def test_two_down_flips_give_ten():
    sent, received = 0b00101010, 0b00100000
    eps = ErrorVector(received & ~sent, sent & ~received, 8)
    assert eps.entries == (0, -1, 0, -1, 0, 0, 0, 0)
    assert eps.distortion() == 10
    assert signed_distortion(eps) == received - sent


def test_mixed_polarity_two_bits():
    eps = ErrorVector.from_entries([1, -1])
    assert signed_distortion(eps) == -1
    assert eps.distortion() == 1


@pytest.mark.parametrize("pos,neg", [(1, 1), (16, 0), (0, -1)])
def test_invalid_masks_rejected(pos, neg):
    with pytest.raises(ValidationError):
        ErrorVector(pos, neg, 4)


def test_word_bounds():
    assert Word(255, 8).bits == (1,) * 8
    with pytest.raises(ValidationError):
        Word(256, 8)


def test_unit_convolution_sizes():
    out = set_convolve(SignedDistortionMultiset.unit(0, 2), SignedDistortionMultiset.unit(1, 2))
    assert out.keys() == [-3, -2, -1, 0, 1, 2, 3]
    assert [out.count(n) for n in out.keys()] == [1, 1, 2, 1, 2, 1, 1]
    for n in out.keys():
        assert all(e.signed_distortion() == n for e in out[n])


def test_empty_operand_annihilates():
    out = set_convolve(SignedDistortionMultiset.unit(0, 3), SignedDistortionMultiset.empty(3, 0b010))
    assert len(out) == 0


def test_overlapping_support_rejected():
    with pytest.raises(InvalidOperandError):
        set_convolve(SignedDistortionMultiset.unit(1, 3), SignedDistortionMultiset.unit(1, 3))
    with pytest.raises(InvalidOperandError):
        set_convolve(SignedDistortionMultiset.unit(0, 3), SignedDistortionMultiset.unit(1, 4))


@pytest.mark.parametrize("width", range(1, 9))
def test_sizes_follow_ordinary_convolution(width):
    sets = build_error_sets(width)
    assert len(sets) == 3 ** width
    assert np.array_equal(sets.counts(), count_convolution(width))
    assert sets.magnitude_count(0) == 1


def test_l2_magnitude_one():
    sets = build_error_sets(2)
    assert sets.magnitude_count(1) == 4
    assert {e.entries for e in sets.magnitude_set(1)} == {(1, 0), (-1, 0), (1, -1), (-1, 1)}


def test_error_sets_match_enumeration():
    width = 4
    sets = build_error_sets(width)
    seen = {}
    for entries in itertools.product((-1, 0, 1), repeat=width):
        eps = ErrorVector.from_entries(entries)
        seen.setdefault(eps.signed_distortion(), set()).add((eps.pos_mask, eps.neg_mask))
    for n, members in seen.items():
        assert {(e.pos_mask, e.neg_mask) for e in sets[n]} == members


def test_capacity_limit():
    with pytest.raises(CapacityError):
        build_error_sets(13)
    counts = build_error_sets(16, counts_only=True)
    assert counts.sum() == 3 ** 16


@pytest.mark.parametrize("entries,expected", [
    ((0, 0, 0), list(range(8))),
    ((-1, 1), [0b01]),
])
def test_compatible_words(entries, expected):
    assert [int(w) for w in compatible_words(ErrorVector.from_entries(entries))] == expected


@given(st.lists(st.sampled_from([-1, 0, 1]), min_size=1, max_size=10))
def test_compatible_word_count(entries):
    eps = ErrorVector.from_entries(entries)
    words = compatible_words(eps)
    assert len(words) == 2 ** entries.count(0)
    for w in words:
        received = int(w) + eps.signed_distortion()
        assert 0 <= received < 1 << len(entries)
        assert (int(w) ^ received) == eps.pos_mask | eps.neg_mask
