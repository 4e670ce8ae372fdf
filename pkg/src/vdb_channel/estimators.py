"""scikit-learn style wrappers.

``fit`` takes integer word samples (the empirical input distribution);
``transform`` passes words through the fitted channel.  Searches are
offline, so ``fit`` does all the work and stores trailing-underscore
attributes like any other estimator.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from ._validation import check_samples, check_width
from .distortion import distortion_pmf, simulate_channel
from .distributions import ChannelModel, ConstraintTail, InputDistribution
from .exceptions import ValidationError
from .optimizer import (DEFAULT_RESOLUTION, adaptive_search_bit_level,
                        exhaustive_search_bit_independent, exhaustive_search_bit_level)


def _words(X, width: int) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    return check_samples(X, width)


def _as_channel(channel) -> ChannelModel:
    if isinstance(channel, ChannelModel):
        return channel
    if isinstance(channel, dict):
        return ChannelModel.from_dict(channel)
    raise ValidationError("channel must be a ChannelModel or its dict form")


def _as_constraint(constraint) -> ConstraintTail:
    if isinstance(constraint, ConstraintTail):
        return constraint
    if isinstance(constraint, dict):
        return ConstraintTail.from_dict(constraint)
    return ConstraintTail(np.asarray(constraint, dtype=np.float64))


class _ChannelTransformer(TransformerMixin, BaseEstimator):

    def _fit_input(self, X):
        width = check_width(self.width)
        self.input_ = InputDistribution.from_samples(_words(X, width), width)
        self.n_features_in_ = 1
        return self.input_

    def _channel(self) -> ChannelModel:
        raise NotImplementedError

    def transform(self, X):
        """Received words for the transmitted words ``X``."""
        check_is_fitted(self)
        words = _words(X, self.width)
        rng = check_random_state(self.random_state)
        return simulate_channel(words, self._channel(), rng)

    def predict_tail(self, m):
        """``Pr(M > m)`` under the fitted input distribution."""
        check_is_fitted(self)
        m = np.asarray(m)
        if np.any(m < 0) or np.any(m >= 1 << self.width):
            raise ValidationError("distortion values outside [0, 2**L - 1]")
        return self.tail_[m.astype(np.int64)]


class DistortionModel(_ChannelTransformer):
    """Distortion distribution of a fixed channel for the empirical input of ``X``.

    Parameters
    ----------
    channel : ChannelModel or dict
    width : int
        Word length L.
    method : {"fast", "enumerative", "brute"}
    random_state : int, Generator or None
        Only used by ``transform``.
    """

    def __init__(self, channel=None, width=8, method="fast", random_state=None):
        self.channel = channel
        self.width = width
        self.method = method
        self.random_state = random_state

    def fit(self, X, y=None):
        f_x = self._fit_input(X)
        self.channel_ = _as_channel(self.channel)
        dist = distortion_pmf(self.channel_, f_x, self.method)
        self.pmf_ = dist.pmf
        self.tail_ = dist.tail
        return self

    def _channel(self):
        return self.channel_


class _SearchEstimator(_ChannelTransformer):

    def _search(self, f_x, constraint):
        raise NotImplementedError

    def fit(self, X, y=None):
        f_x = self._fit_input(X)
        constraint = _as_constraint(self.constraint)
        if constraint.width != self.width:
            raise ValidationError("constraint width differs from word width")
        result = self._search(f_x, constraint)
        self.result_ = result
        self.best_ = result.best
        self.channel_ = result.best.to_channel()
        self.benefit_ = result.benefit
        self.feasible_ = result.feasible
        self.pmf_ = result.induced.pmf
        self.tail_ = result.induced.tail
        self.history_ = list(result.history)
        return self

    def _channel(self):
        return self.channel_


class BitIndependentGridSearch(_SearchEstimator):
    """Best ``(p_down, p_up)`` shared by all bits on a dyadic grid over [0, 1/2]."""

    def __init__(self, constraint=None, width=8, resolution=DEFAULT_RESOLUTION,
                 random_state=None):
        self.constraint = constraint
        self.width = width
        self.resolution = resolution
        self.random_state = random_state

    def _search(self, f_x, constraint):
        return exhaustive_search_bit_independent(f_x, constraint, self.resolution)


class AdaptiveBitLevelSearch(_SearchEstimator):
    """Greedy per-bit search with a refining step size."""

    def __init__(self, constraint=None, width=8, steps=6, initial_exponent=2,
                 symmetric=False, schedule="refine", random_state=None):
        self.constraint = constraint
        self.width = width
        self.steps = steps
        self.initial_exponent = initial_exponent
        self.symmetric = symmetric
        self.schedule = schedule
        self.random_state = random_state

    def _search(self, f_x, constraint):
        return adaptive_search_bit_level(f_x, constraint, steps=self.steps,
                                         initial_exponent=self.initial_exponent,
                                         symmetric=self.symmetric, schedule=self.schedule)


class BitLevelGridSearch(_SearchEstimator):
    """Exhaustive per-bit grid; only practical for short words."""

    def __init__(self, constraint=None, width=4, resolution=0.25, random_state=None):
        self.constraint = constraint
        self.width = width
        self.resolution = resolution
        self.random_state = random_state

    def _search(self, f_x, constraint):
        return exhaustive_search_bit_level(f_x, constraint, self.resolution)


__all__ = ["AdaptiveBitLevelSearch", "BitIndependentGridSearch", "BitLevelGridSearch",
           "DistortionModel"]
