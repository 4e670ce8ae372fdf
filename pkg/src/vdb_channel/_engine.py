"""Batched distortion PMFs for word-independent channels.

The word is split into a low group of ``L // 2`` bits and a high group of
the remaining bits.  For each group and each local word we tabulate the
PMF of the signed local distortion; conditional on the transmitted word
the two groups err independently, so the full signed PMF is a mixture
over the input PMF of shifted products of the two tables.  Every table
entry is an exact convolution of two-point per-bit distributions.
"""
from __future__ import annotations

import numpy as np


def group_tables(p_down: np.ndarray, p_up: np.ndarray) -> np.ndarray:
    """Signed-distortion PMFs ``D[c, w, r]`` for local word ``w`` of a bit group.

    ``p_down``/``p_up`` have shape ``(C, n)``.  Index ``r`` covers signed
    values ``-(2**n - 1) .. 2**n - 1`` in local units.
    """
    C, n = p_down.shape
    D = np.ones((C, 1, 1))
    for j in range(n):
        s = 1 << j
        width = D.shape[2]
        keep_up = (1.0 - p_up[:, j])[:, None, None]
        flip_up = p_up[:, j][:, None, None]
        keep_down = (1.0 - p_down[:, j])[:, None, None]
        flip_down = p_down[:, j][:, None, None]
        new = np.zeros((C, 2 * D.shape[1], 4 * s - 1))
        zero_bit = new[:, :D.shape[1]]
        one_bit = new[:, D.shape[1]:]
        zero_bit[:, :, s:s + width] += D * keep_up
        zero_bit[:, :, 2 * s:2 * s + width] += D * flip_up
        one_bit[:, :, s:s + width] += D * keep_down
        one_bit[:, :, :width] += D * flip_down
        D = new
    return D


def fold(signed: np.ndarray) -> np.ndarray:
    """Map a signed PMF over ``-(2**L-1)..2**L-1`` onto ``|n|`` along the last axis."""
    c = signed.shape[-1] // 2
    out = np.empty(signed.shape[:-1] + (c + 1,))
    out[..., 0] = signed[..., c]
    out[..., 1:] = signed[..., c + 1:] + signed[..., c - 1::-1]
    return out


def _split(width: int) -> tuple[int, int]:
    lo = width // 2
    return lo, width - lo


def signed_pmf_batch(p_down: np.ndarray, p_up: np.ndarray, input_pmf: np.ndarray) -> np.ndarray:
    """Signed distortion PMFs for ``C`` independent channels given as ``(C, L)`` arrays."""
    p_down = np.atleast_2d(np.asarray(p_down, dtype=np.float64))
    p_up = np.atleast_2d(np.asarray(p_up, dtype=np.float64))
    C, L = p_down.shape
    lo, hi = _split(L)
    d_lo = group_tables(p_down[:, :lo], p_up[:, :lo])
    d_hi = group_tables(p_down[:, lo:], p_up[:, lo:])
    weights = np.asarray(input_pmf, dtype=np.float64).reshape(1 << hi, 1 << lo)
    g = np.einsum("hl,clr->chr", weights, d_lo)
    out = np.matmul(d_hi.transpose(0, 2, 1), g)          # (C, K, R)
    R = out.shape[2]
    signed = np.zeros((C, (2 << L) - 1))
    for k in range(out.shape[1]):
        signed[:, (k << lo):(k << lo) + R] += out[:, k, :]
    return signed


def distortion_pmf_batch(p_down, p_up, input_pmf) -> np.ndarray:
    return fold(signed_pmf_batch(p_down, p_up, input_pmf))


class ProductEvaluator:
    """Distortion PMFs for every pairing of low-group and high-group options.

    ``lo_down``/``lo_up`` are ``(A, lo)`` option arrays for the low bits and
    ``hi_down``/``hi_up`` ``(B, hi)`` for the high bits; candidate ``(a, b)``
    is the channel using low option ``a`` and high option ``b``.
    """

    def __init__(self, lo_down, lo_up, hi_down, hi_up, input_pmf):
        self.lo = lo_down.shape[1]
        self.hi = hi_down.shape[1]
        self.width = self.lo + self.hi
        weights = np.asarray(input_pmf, dtype=np.float64).reshape(1 << self.hi, 1 << self.lo)
        d_lo = group_tables(lo_down, lo_up)
        self._g = np.einsum("hl,alr->ahr", weights, d_lo)     # (A, H, R)
        self._weights = weights
        self._keep_lo = d_lo[:, :, d_lo.shape[2] // 2]          # Pr(no low-bit error | word)
        d_hi = group_tables(hi_down, hi_up)                    # (B, H, K)
        self._hi = d_hi.transpose(0, 2, 1)                     # (B, K, H)
        self._keep_hi = d_hi[:, :, d_hi.shape[2] // 2]
        self.n_lo = self._g.shape[0]
        self.n_hi = d_hi.shape[0]

    def pmf_pairs(self, a_idx, b_idx) -> np.ndarray:
        """Folded PMFs with shape ``(len(a_idx), len(b_idx), 2**L)``."""
        g = self._g[a_idx]
        hi = self._hi[b_idx]
        a, H, R = g.shape
        b, K, _ = hi.shape
        prod = hi.reshape(b * K, H) @ g.transpose(1, 0, 2).reshape(H, a * R)
        prod = prod.reshape(b, K, a, R)
        signed = np.zeros((b, a, (2 << self.width) - 1))
        for k in range(K):
            signed[:, :, (k << self.lo):(k << self.lo) + R] += prod[:, k]
        return fold(signed).transpose(1, 0, 2)

    def zero_mass(self) -> np.ndarray:
        """``f_M(0)`` for every candidate as an ``(A, B)`` matrix."""
        return self._keep_lo @ self._weights.T @ self._keep_hi.T

    def pmf_list(self, a_idx, b_idx) -> np.ndarray:
        """Folded PMFs for the explicit candidate pairs ``(a_idx[p], b_idx[p])``."""
        g = self._g[a_idx]                                     # (P, H, R)
        hi = self._hi[b_idx]                                   # (P, K, H)
        prod = np.matmul(hi, g)                                # (P, K, R)
        P, K, R = prod.shape
        signed = np.zeros((P, (2 << self.width) - 1))
        for k in range(K):
            signed[:, (k << self.lo):(k << self.lo) + R] += prod[:, k]
        return fold(signed)

    def pmf_block(self, start: int, stop: int) -> np.ndarray:
        """All high options paired with low options ``start..stop``."""
        return self.pmf_pairs(np.arange(start, min(stop, self.n_lo)), np.arange(self.n_hi))
