"""Error vectors and the set-valued convolution that groups them by distortion.

An error vector assigns each bit a polarity in {-1, 0, +1}: ``-1`` is a
1->0 flip, ``+1`` a 0->1 flip.  It is stored as two disjoint bit masks.
Its signed distortion is ``sum(eps[i] * 2**i)``, i.e. received minus
transmitted integer value.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._validation import check_width, check_word
from .exceptions import CapacityError, InvalidOperandError, ValidationError

MATERIALIZE_LIMIT = 12


@dataclass(frozen=True)
class Word:
    """An L-bit binary word with unsigned value ``u(x) = sum x_i 2**i``."""

    value: int
    width: int

    def __post_init__(self):
        check_width(self.width)
        check_word(self.value, self.width)

    def bit(self, i: int) -> int:
        return (self.value >> i) & 1

    @property
    def bits(self) -> tuple[int, ...]:
        """Bits ordered from least significant (index 0) upward."""
        return tuple(self.bit(i) for i in range(self.width))

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class ErrorVector:
    pos_mask: int
    neg_mask: int
    width: int

    def __post_init__(self):
        check_width(self.width)
        full = (1 << self.width) - 1
        if self.pos_mask & ~full or self.neg_mask & ~full or self.pos_mask < 0 or self.neg_mask < 0:
            raise ValidationError("error vector masks exceed the word width")
        if self.pos_mask & self.neg_mask:
            raise ValidationError("a bit cannot carry both error polarities")

    @classmethod
    def from_entries(cls, entries) -> "ErrorVector":
        """Build from polarities listed from bit 0 upward."""
        pos = neg = 0
        for i, e in enumerate(entries):
            if e == 1:
                pos |= 1 << i
            elif e == -1:
                neg |= 1 << i
            elif e != 0:
                raise ValidationError(f"polarity must be -1, 0 or 1, got {e!r}")
        return cls(pos, neg, len(entries))

    @property
    def entries(self) -> tuple[int, ...]:
        return tuple(((self.pos_mask >> i) & 1) - ((self.neg_mask >> i) & 1)
                     for i in range(self.width))

    @property
    def zero_mask(self) -> int:
        return ((1 << self.width) - 1) & ~(self.pos_mask | self.neg_mask)

    def signed_distortion(self) -> int:
        return self.pos_mask - self.neg_mask

    def distortion(self) -> int:
        return abs(self.pos_mask - self.neg_mask)


def signed_distortion(eps: ErrorVector) -> int:
    return eps.signed_distortion()


def compatible_words(eps: ErrorVector) -> list[Word]:
    """Words that can suffer ``eps``: ones under -1 entries, zeros under +1 entries."""
    free = [i for i in range(eps.width) if (eps.zero_mask >> i) & 1]
    words = []
    for k in range(1 << len(free)):
        x = eps.neg_mask
        for j, i in enumerate(free):
            if (k >> j) & 1:
                x |= 1 << i
        words.append(Word(x, eps.width))
    return sorted(words, key=int)


class SignedDistortionMultiset:
    """Set-valued function from signed distortion ``n`` to error vectors.

    Elements are held as parallel integer arrays (signed value, +1 mask,
    -1 mask) sorted stably by signed value, so ``self[n]`` is a contiguous
    slice.  ``support`` is the mask of bit positions the vectors range over.
    """

    def __init__(self, signed, pos, neg, width: int, support: int):
        signed = np.asarray(signed, dtype=np.int64)
        order = np.argsort(signed, kind="stable")
        self.signed = signed[order]
        self.pos = np.asarray(pos, dtype=np.int64)[order]
        self.neg = np.asarray(neg, dtype=np.int64)[order]
        self.width = check_width(width)
        self.support = int(support)

    @classmethod
    def empty(cls, width: int, support: int = 0) -> "SignedDistortionMultiset":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, width, support)

    @classmethod
    def unit(cls, i: int, width: int) -> "SignedDistortionMultiset":
        """Single-bit event function: {-e_i} at -2**i, {0} at 0, {e_i} at 2**i."""
        if not 0 <= i < width:
            raise ValidationError(f"bit {i} outside width {width}")
        b = 1 << i
        return cls([-b, 0, b], [0, 0, b], [b, 0, 0], width, b)

    def __len__(self) -> int:
        return int(self.signed.size)

    def _bounds(self, n: int) -> tuple[int, int]:
        lo = int(np.searchsorted(self.signed, n, side="left"))
        hi = int(np.searchsorted(self.signed, n, side="right"))
        return lo, hi

    def __getitem__(self, n: int) -> list[ErrorVector]:
        lo, hi = self._bounds(n)
        return [ErrorVector(int(p), int(q), self.width)
                for p, q in zip(self.pos[lo:hi], self.neg[lo:hi])]

    def keys(self) -> list[int]:
        return [int(v) for v in np.unique(self.signed)]

    def __iter__(self) -> Iterator[ErrorVector]:
        for p, q in zip(self.pos, self.neg):
            yield ErrorVector(int(p), int(q), self.width)

    def count(self, n: int) -> int:
        lo, hi = self._bounds(n)
        return hi - lo

    def counts(self) -> np.ndarray:
        """``|C|`` over n = -(2**L - 1) .. 2**L - 1."""
        span = (1 << self.width) - 1
        return np.bincount(self.signed + span, minlength=2 * span + 1)

    def magnitude_set(self, m: int) -> list[ErrorVector]:
        """Error vectors with unsigned distortion ``m``: C(m) united with C(-m)."""
        if m == 0:
            return self[0]
        return self[-m] + self[m]

    def magnitude_count(self, m: int) -> int:
        return self.count(0) if m == 0 else self.count(m) + self.count(-m)


def set_convolve(alpha: SignedDistortionMultiset,
                 beta: SignedDistortionMultiset) -> SignedDistortionMultiset:
    """Disjoint union over k + l = n of the pairwise vector sums alpha(k) * beta(l)."""
    if alpha.width != beta.width:
        raise InvalidOperandError("operands have different word widths")
    if alpha.support & beta.support:
        raise InvalidOperandError("operand supports overlap; vector sums would not be error vectors")
    if len(alpha) == 0 or len(beta) == 0:
        return SignedDistortionMultiset.empty(alpha.width, alpha.support | beta.support)
    signed = (alpha.signed[:, None] + beta.signed[None, :]).ravel()
    pos = (alpha.pos[:, None] | beta.pos[None, :]).ravel()
    neg = (alpha.neg[:, None] | beta.neg[None, :]).ravel()
    return SignedDistortionMultiset(signed, pos, neg, alpha.width, alpha.support | beta.support)


def count_convolution(width: int) -> np.ndarray:
    """``|C_L|`` as the iterated ordinary convolution of per-bit count patterns."""
    width = check_width(width)
    counts = np.ones(1, dtype=np.int64)
    for i in range(width):
        pattern = np.zeros(2 * (1 << i) + 1, dtype=np.int64)
        pattern[[0, 1 << i, 2 << i]] = 1
        counts = np.convolve(counts, pattern)
    return counts


def build_error_sets(width: int, counts_only: bool = False):
    """Return ``C_L`` for all error events on L-bit words.

    Materialized sets hold 3**L vectors and are limited to L <= 12; with
    ``counts_only`` the cardinalities ``|C_L|`` are returned instead (L <= 16).
    """
    width = check_width(width)
    if counts_only:
        return count_convolution(width)
    if width > MATERIALIZE_LIMIT:
        raise CapacityError(
            f"materializing 3**{width} error vectors exceeds the limit L <= {MATERIALIZE_LIMIT}; "
            "use counts_only=True")
    result = SignedDistortionMultiset.unit(0, width)
    for i in range(1, width):
        result = set_convolve(result, SignedDistortionMultiset.unit(i, width))
    return result
