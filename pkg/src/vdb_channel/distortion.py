"""Exact, brute-force and sampled integer-value-distortion distributions."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._engine import distortion_pmf_batch
from .distributions import (ChannelModel, DistortionDistribution, IndependentChannel,
                            InputDistribution, word_bits)
from .errorsets import (MATERIALIZE_LIMIT, ErrorVector, SignedDistortionMultiset,
                        build_error_sets, compatible_words)
from .exceptions import CapacityError, ValidationError

BRUTE_FORCE_LIMIT = 8


def _check_pair(ch: ChannelModel, f_x: InputDistribution) -> int:
    if ch.width != f_x.width:
        raise ValidationError(f"channel width {ch.width} != input width {f_x.width}")
    return ch.width


def _normalize(pmf: np.ndarray) -> np.ndarray:
    # clip rounding residue so entries stay inside [0, 1]
    return np.clip(pmf, 0.0, 1.0)


def error_vector_probability(eps: ErrorVector, ch: ChannelModel, f_x: InputDistribution) -> float:
    """Probability that the channel output differs from its input by ``eps``.

    Sums, over every word able to suffer ``eps``, the product of per-bit
    flip/keep probabilities weighted by the word's input probability.
    """
    width = _check_pair(ch, f_x)
    if eps.width != width:
        raise ValidationError("error vector width differs from channel width")
    total = 0.0
    for word in compatible_words(eps):
        x = int(word)
        if f_x.pmf[x] == 0.0:
            continue
        down, up = ch.probabilities(x)
        prob = 1.0
        for i in range(width):
            bit = (x >> i) & 1
            if (eps.neg_mask >> i) & 1:
                prob *= down[i]
            elif (eps.pos_mask >> i) & 1:
                prob *= up[i]
            else:
                prob *= 1.0 - (down[i] if bit else up[i])
        total += prob * f_x.pmf[x]
    return total


@lru_cache(maxsize=4)
def _error_set_index(width: int) -> tuple[SignedDistortionMultiset, np.ndarray]:
    sets = build_error_sets(width)
    lookup = np.full(1 << (2 * width), -1, dtype=np.int64)
    lookup[(sets.pos << width) | sets.neg] = np.arange(len(sets))
    return sets, lookup


def error_vector_probabilities(ch: ChannelModel, f_x: InputDistribution,
                               chunk: int = 1 << 18) -> tuple[SignedDistortionMultiset, np.ndarray]:
    """``P_eps`` for every error vector of the materialized set family, in set order."""
    width = _check_pair(ch, f_x)
    if width > MATERIALIZE_LIMIT:
        raise CapacityError(f"enumerative path limited to L <= {MATERIALIZE_LIMIT}")
    sets, lookup = _error_set_index(width)
    n = 1 << width
    down, up = ch.table()
    flips = np.arange(n, dtype=np.int64)
    flip_bits = word_bits(width).astype(bool)
    p_eps = np.zeros(len(sets))
    words = np.flatnonzero(f_x.pmf)
    step = max(1, chunk // n)
    for start in range(0, words.size, step):
        xs = words[start:start + step]
        x_bits = ((xs[:, None] >> np.arange(width)) & 1).astype(bool)
        flip_p = np.where(x_bits, down[xs], up[xs])[:, None, :]
        factors = np.where(flip_bits[None, :, :], flip_p, 1.0 - flip_p)
        prob = np.prod(factors, axis=2) * f_x.pmf[xs][:, None]
        pos = flips[None, :] & ~xs[:, None]
        neg = flips[None, :] & xs[:, None]
        idx = lookup[(pos << width) | neg]
        p_eps += np.bincount(idx.ravel(), weights=prob.ravel(), minlength=len(sets))
    return sets, p_eps


def distortion_pmf_enumerative(ch: ChannelModel, f_x: InputDistribution) -> DistortionDistribution:
    """Sum ``P_eps`` over each set of error vectors with unsigned distortion ``m``."""
    sets, p_eps = error_vector_probabilities(ch, f_x)
    pmf = np.bincount(np.abs(sets.signed), weights=p_eps, minlength=1 << ch.width)
    return DistortionDistribution(_normalize(pmf))


def _word_dependent_pmf(ch: ChannelModel, f_x: InputDistribution, chunk: int = 1 << 20) -> np.ndarray:
    width = ch.width
    span = (1 << width) - 1
    down, up = ch.table()
    words = np.flatnonzero(f_x.pmf)
    step = max(1, chunk // (2 * span + 1))
    signed = np.zeros(2 * span + 1)
    for start in range(0, words.size, step):
        xs = words[start:start + step]
        cur = np.zeros((xs.size, 2 * span + 1))
        cur[:, span] = 1.0
        for i in range(width):
            s = 1 << i
            is_one = ((xs >> i) & 1).astype(bool)
            # a set bit can only fall by 2**i, a clear bit only rise by 2**i
            p = np.where(is_one, down[xs, i], up[xs, i])[:, None]
            shifted = np.zeros_like(cur)
            shifted[is_one, :-s] = cur[is_one, s:]
            shifted[~is_one, s:] = cur[~is_one, :-s]
            cur = cur * (1.0 - p) + shifted * p
        signed += f_x.pmf[xs] @ cur
    folded = np.empty(span + 1)
    folded[0] = signed[span]
    folded[1:] = signed[span + 1:] + signed[span - 1::-1]
    return folded


def distortion_pmf_fast(ch: ChannelModel, f_x: InputDistribution) -> DistortionDistribution:
    """Convolve per-bit two-point signed distributions per word, fold, mix by ``f_X``."""
    _check_pair(ch, f_x)
    if isinstance(ch, IndependentChannel):
        pmf = distortion_pmf_batch(ch.p_down[None, :], ch.p_up[None, :], f_x.pmf)[0]
    else:
        pmf = _word_dependent_pmf(ch, f_x)
    return DistortionDistribution(_normalize(pmf))


def brute_force_oracle(ch: ChannelModel, f_x: InputDistribution,
                       max_width: int = BRUTE_FORCE_LIMIT) -> DistortionDistribution:
    """Accumulate every (sent, received) word pair's probability at ``|sent - received|``."""
    width = _check_pair(ch, f_x)
    if width > max_width:
        raise CapacityError(f"brute force over 4**{width} word pairs exceeds L <= {max_width}")
    n = 1 << width
    sent = np.arange(n)[:, None]
    received = np.arange(n)[None, :]
    down, up = ch.table()
    transition = np.ones((n, n))
    for i in range(width):
        bit = (sent >> i) & 1
        changed = ((sent ^ received) >> i) & 1
        p = np.where(bit == 1, down[:, i][:, None], up[:, i][:, None])
        transition *= np.where(changed == 1, p, 1.0 - p)
    joint = f_x.pmf[:, None] * transition
    pmf = np.zeros(n)
    np.add.at(pmf, np.abs(sent - received).ravel(), joint.ravel())
    return DistortionDistribution(_normalize(pmf))


def simulate_channel(words: np.ndarray, ch: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    """Pass integer words through the channel, flipping bits independently."""
    words = np.asarray(words, dtype=np.int64)
    down, up = ch.table()
    received = words.copy()
    for i in range(ch.width):
        bit = (words >> i) & 1
        p = np.where(bit == 1, down[words, i], up[words, i])
        flip = rng.random(words.size) < p
        received ^= flip.astype(np.int64) << i
    return received


def monte_carlo_distortion(ch: ChannelModel, f_x: InputDistribution, n: int,
                           seed: int) -> DistortionDistribution:
    """Empirical distortion distribution from ``n`` simulated transmissions.

    Uses numpy's PCG64 generator seeded with ``seed``; fixed seeds give
    identical output.
    """
    width = _check_pair(ch, f_x)
    if int(n) < 1:
        raise ValidationError("sample count must be at least 1")
    rng = np.random.default_rng(int(seed) % (1 << 64))
    words = rng.choice(1 << width, size=int(n), p=f_x.pmf)
    received = simulate_channel(words, ch, rng)
    counts = np.bincount(np.abs(received - words), minlength=1 << width)
    return DistortionDistribution(counts / float(n))


def distortion_pmf(ch: ChannelModel, f_x: InputDistribution, method: str = "fast") -> DistortionDistribution:
    methods = {"fast": distortion_pmf_fast, "enumerative": distortion_pmf_enumerative,
               "brute": brute_force_oracle}
    try:
        return methods[method](ch, f_x)
    except KeyError:
        raise ValidationError(f"unknown method {method!r}; choose from {sorted(methods)}") from None


__all__ = ["brute_force_oracle", "distortion_pmf", "distortion_pmf_enumerative",
           "distortion_pmf_fast", "error_vector_probabilities", "error_vector_probability",
           "monte_carlo_distortion", "simulate_channel"]
