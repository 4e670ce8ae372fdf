"""Input distributions, bit-error channels and distortion distributions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import (check_pmf, check_probabilities, check_samples, check_tail,
                          check_width, check_word, width_from_length)
from .exceptions import ValidationError


def tail_from_pmf(pmf: np.ndarray) -> np.ndarray:
    """``T(m) = sum_{i > m} pmf[i]`` along the last axis, summed from the top down."""
    pmf = np.asarray(pmf, dtype=np.float64)
    upper = np.cumsum(pmf[..., ::-1], axis=-1)[..., ::-1]
    tail = np.zeros_like(pmf)
    tail[..., :-1] = upper[..., 1:]
    return tail


def word_bits(width: int) -> np.ndarray:
    """Array ``bits[x, i]`` of the i-th bit of every L-bit word."""
    x = np.arange(1 << width)
    return ((x[:, None] >> np.arange(width)[None, :]) & 1).astype(np.int8)


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """PMF ``f_X`` over all 2**L transmitted words, indexed by unsigned value."""

    pmf: np.ndarray

    def __post_init__(self):
        pmf = check_pmf(self.pmf)
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def width(self) -> int:
        return width_from_length(self.pmf.size)

    @classmethod
    def uniform(cls, width: int) -> "InputDistribution":
        width = check_width(width)
        return cls(np.full(1 << width, 1.0 / (1 << width)))

    @classmethod
    def point_mass(cls, word: int, width: int) -> "InputDistribution":
        width = check_width(width)
        pmf = np.zeros(1 << width)
        pmf[check_word(word, width)] = 1.0
        return cls(pmf)

    @classmethod
    def from_samples(cls, samples, width: int) -> "InputDistribution":
        """Empirical PMF of integer word samples."""
        width = check_width(width)
        samples = check_samples(samples, width)
        counts = np.bincount(samples, minlength=1 << width).astype(np.float64)
        return cls(counts / counts.sum())

    def to_dict(self) -> dict:
        return {"width": self.width, "pmf": self.pmf.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "InputDistribution":
        dist = cls(np.asarray(data["pmf"], dtype=np.float64))
        if "width" in data and int(data["width"]) != dist.width:
            raise ValidationError("declared width disagrees with PMF length")
        return dist

    def __eq__(self, other):
        return isinstance(other, InputDistribution) and np.array_equal(self.pmf, other.pmf)

    __hash__ = None


class ChannelModel:
    """Per-word, per-bit probabilities of 1->0 (down) and 0->1 (up) flips.

    Bit errors are conditionally independent across positions given the
    transmitted word.  ``table()`` returns the dense ``(2**L, L)`` arrays.
    """

    variant: str
    width: int

    def probabilities(self, word: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def is_zero(self) -> bool:
        down, up = self.table()
        return not (np.any(down) or np.any(up))

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "ChannelModel":
        variant = data.get("variant")
        if variant == "independent":
            return IndependentChannel(data["p_down"], data["p_up"])
        if variant == "word-dependent":
            return WordDependentChannel(data["p_down"], data["p_up"])
        raise ValidationError(f"unknown channel variant {variant!r}")


@dataclass(frozen=True, eq=False)
class IndependentChannel(ChannelModel):
    """Bit-error probabilities that do not depend on the transmitted word."""

    p_down: np.ndarray
    p_up: np.ndarray
    variant: str = field(default="independent", init=False)

    def __post_init__(self):
        down = np.atleast_1d(np.asarray(self.p_down, dtype=np.float64))
        check_width(down.size)
        down = check_probabilities(down, name="p_down")
        up = check_probabilities(np.atleast_1d(np.asarray(self.p_up, dtype=np.float64)),
                                 shape=down.shape, name="p_up")
        down.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "p_down", down)
        object.__setattr__(self, "p_up", up)

    @classmethod
    def zero(cls, width: int) -> "IndependentChannel":
        return cls(np.zeros(width), np.zeros(width))

    @classmethod
    def uniform_bits(cls, p_down: float, p_up: float, width: int) -> "IndependentChannel":
        """Same down/up probabilities at every bit position."""
        return cls(np.full(width, float(p_down)), np.full(width, float(p_up)))

    @property
    def width(self) -> int:
        return int(self.p_down.size)

    def probabilities(self, word: int):
        check_word(word, self.width)
        return self.p_down, self.p_up

    def table(self):
        n = 1 << self.width
        return (np.broadcast_to(self.p_down, (n, self.width)),
                np.broadcast_to(self.p_up, (n, self.width)))

    def to_dict(self) -> dict:
        return {"variant": "independent", "p_down": self.p_down.tolist(),
                "p_up": self.p_up.tolist()}

    def __eq__(self, other):
        return (isinstance(other, IndependentChannel)
                and np.array_equal(self.p_down, other.p_down)
                and np.array_equal(self.p_up, other.p_up))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class WordDependentChannel(ChannelModel):
    """Dense table ``p_down[x, i]``, ``p_up[x, i]`` for every word ``x`` and bit ``i``."""

    p_down: np.ndarray
    p_up: np.ndarray
    variant: str = field(default="word-dependent", init=False)

    def __post_init__(self):
        down = np.asarray(self.p_down, dtype=np.float64)
        if down.ndim != 2:
            raise ValidationError("word-dependent p_down must be a (2**L, L) table")
        width = check_width(down.shape[1])
        down = check_probabilities(down, shape=(1 << width, width), name="p_down")
        up = check_probabilities(self.p_up, shape=down.shape, name="p_up")
        down.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "p_down", down)
        object.__setattr__(self, "p_up", up)

    @classmethod
    def from_function(cls, func, width: int) -> "WordDependentChannel":
        """Tabulate ``func(x) -> (p_down[L], p_up[L])`` over every word."""
        width = check_width(width)
        rows = [func(x) for x in range(1 << width)]
        return cls(np.array([r[0] for r in rows], dtype=np.float64),
                   np.array([r[1] for r in rows], dtype=np.float64))

    @property
    def width(self) -> int:
        return int(self.p_down.shape[1])

    def probabilities(self, word: int):
        word = check_word(word, self.width)
        return self.p_down[word], self.p_up[word]

    def table(self):
        return self.p_down, self.p_up

    def to_dict(self) -> dict:
        return {"variant": "word-dependent", "p_down": self.p_down.tolist(),
                "p_up": self.p_up.tolist()}

    def __eq__(self, other):
        return (isinstance(other, WordDependentChannel)
                and np.array_equal(self.p_down, other.p_down)
                and np.array_equal(self.p_up, other.p_up))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DistortionDistribution:
    """PMF ``f_M`` and tail ``T_M(m) = Pr(M > m)`` of the integer value distortion."""

    pmf: np.ndarray
    tail: np.ndarray = None

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=np.float64)
        width_from_length(pmf.size)
        tail = tail_from_pmf(pmf) if self.tail is None else np.asarray(self.tail, dtype=np.float64)
        if tail.shape != pmf.shape:
            raise ValidationError("tail and PMF lengths differ")
        pmf.setflags(write=False)
        tail.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "tail", tail)

    @property
    def width(self) -> int:
        return width_from_length(self.pmf.size)

    def to_dict(self) -> dict:
        return {"width": self.width, "pmf": self.pmf.tolist(), "tail": self.tail.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "DistortionDistribution":
        return cls(np.asarray(data["pmf"], dtype=np.float64),
                   None if "tail" not in data else np.asarray(data["tail"], dtype=np.float64))

    def __eq__(self, other):
        return (isinstance(other, DistortionDistribution)
                and np.array_equal(self.pmf, other.pmf) and np.array_equal(self.tail, other.tail))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ConstraintTail:
    """Upper bound on the tolerated tail; any non-increasing function into [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = check_tail(self.values).copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return width_from_length(self.values.size)

    @classmethod
    def constant(cls, level: float, width: int) -> "ConstraintTail":
        """Flat bound ``level`` with the last entry pinned at 0 (every tail ends at 0)."""
        values = np.full(1 << check_width(width), float(level))
        values[-1] = 0.0
        return cls(values)

    def to_dict(self) -> dict:
        return {"width": self.width, "tail": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ConstraintTail":
        return cls(np.asarray(data["tail"] if "tail" in data else data["values"], dtype=np.float64))

    def __eq__(self, other):
        return isinstance(other, ConstraintTail) and np.array_equal(self.values, other.values)

    __hash__ = None


def dumps(obj, **kwargs) -> str:
    return json.dumps(obj.to_dict(), **kwargs)
