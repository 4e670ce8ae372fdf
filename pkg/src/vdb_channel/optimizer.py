"""Benefit-maximizing bit-error probabilities under a constraint tail.

Probability vectors are laid out as ``(p_down[0..L-1], p_up[0..L-1])``.
Among feasible candidates of equal benefit the lexicographically smallest
vector wins, so results do not depend on evaluation order or chunking.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._engine import ProductEvaluator, distortion_pmf_batch
from ._validation import check_probabilities, check_width
from .distortion import distortion_pmf_fast
from .distributions import (ChannelModel, ConstraintTail, DistortionDistribution,
                            IndependentChannel, InputDistribution, tail_from_pmf)
from .exceptions import CapacityError, ValidationError

FEASIBILITY_ATOL = 1e-12
DEFAULT_RESOLUTION = 2.0 ** -7
MAX_PROBABILITY = 0.5
MAX_CANDIDATES = 1 << 22

BenefitFunction = Callable[[np.ndarray], np.ndarray]


def squared_norm(vectors: np.ndarray) -> np.ndarray:
    """Default benefit ``||p||**2`` evaluated along the last axis."""
    vectors = np.asarray(vectors, dtype=np.float64)
    return np.sum(vectors * vectors, axis=-1)


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Per-bit down/up error probabilities, each in [0, 1/2].

    ``resolution`` (optional) is the dyadic grid step every entry sits on.
    """

    p: np.ndarray
    resolution: Optional[float] = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64).ravel().copy()
        if p.size % 2 or p.size == 0:
            raise ValidationError("a probability vector holds 2L entries")
        check_width(p.size // 2)
        check_probabilities(p, upper=MAX_PROBABILITY, name="probability vector")
        if self.resolution is not None:
            steps = p / self.resolution
            if not np.allclose(steps, np.round(steps), rtol=0, atol=1e-9):
                raise ValidationError(f"entries are not multiples of {self.resolution}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_parts(cls, p_down, p_up, resolution=None) -> "ProbabilityVector":
        return cls(np.concatenate([np.ravel(p_down), np.ravel(p_up)]), resolution)

    @property
    def width(self) -> int:
        return self.p.size // 2

    @property
    def p_down(self) -> np.ndarray:
        return self.p[:self.width]

    @property
    def p_up(self) -> np.ndarray:
        return self.p[self.width:]

    def to_channel(self) -> IndependentChannel:
        return IndependentChannel(self.p_down, self.p_up)

    def to_dict(self) -> dict:
        return {"p_down": self.p_down.tolist(), "p_up": self.p_up.tolist(),
                "resolution": self.resolution}

    def __eq__(self, other):
        return isinstance(other, ProbabilityVector) and np.array_equal(self.p, other.p)

    __hash__ = None


@dataclass(frozen=True)
class SearchResult:
    best: ProbabilityVector
    benefit: float
    induced: DistortionDistribution
    evaluations: int
    feasible: bool
    candidates: int = 0
    history: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"best": self.best.to_dict(), "benefit": self.benefit,
                "feasible": self.feasible, "evaluations": self.evaluations,
                "candidates": self.candidates, "history": list(self.history),
                "induced_tail": self.induced.tail.tolist()}


def benefit(p) -> float:
    """``||p||**2`` summed over both polarities and all bits."""
    vec = p.p if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=np.float64)
    return float(squared_norm(vec))


def average_benefit(ch: ChannelModel, f_x: InputDistribution,
                    benefit_fn: BenefitFunction = squared_norm) -> float:
    """Input-weighted benefit of the per-word probability vectors."""
    if ch.width != f_x.width:
        raise ValidationError("channel and input widths differ")
    down, up = ch.table()
    vectors = np.concatenate([down, up], axis=1)
    return float(f_x.pmf @ np.asarray(benefit_fn(vectors), dtype=np.float64))


def _constraint_values(constraint) -> np.ndarray:
    if isinstance(constraint, ConstraintTail):
        return constraint.values
    return ConstraintTail(constraint).values


def satisfies_constraint(d: DistortionDistribution, constraint) -> bool:
    values = _constraint_values(constraint)
    if values.size != d.tail.size:
        raise ValidationError(f"constraint width {values.size} != distribution width {d.tail.size}")
    return bool(np.all(d.tail <= values + FEASIBILITY_ATOL))


def _feasible(pmfs: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.all(tail_from_pmf(pmfs) <= values + FEASIBILITY_ATOL, axis=-1)


def _pick(vectors: np.ndarray, benefits: np.ndarray, feasible: np.ndarray) -> Optional[int]:
    """Index of the feasible maximum-benefit row, ties to the lexicographically smallest."""
    idx = np.flatnonzero(feasible)
    if idx.size == 0:
        return None
    top = benefits[idx].max()
    tied = idx[benefits[idx] == top]
    if tied.size == 1:
        return int(tied[0])
    order = np.lexsort(vectors[tied].T[::-1])
    return int(tied[order[0]])


def _check_inputs(f_x: InputDistribution, constraint) -> tuple[int, np.ndarray]:
    values = _constraint_values(constraint)
    if values.size != f_x.pmf.size:
        raise ValidationError("constraint and input distribution widths differ")
    return f_x.width, values


def _result(vector: ProbabilityVector, f_x, values, evaluations, candidates, benefit_fn, history=()):
    induced = distortion_pmf_fast(vector.to_channel(), f_x)
    feasible = bool(np.all(induced.tail <= values + FEASIBILITY_ATOL))
    value = float(np.asarray(benefit_fn(vector.p[None, :]))[0])
    return SearchResult(vector, value, induced, int(evaluations), feasible, int(candidates),
                        tuple(history))


def _dyadic_grid(resolution: float) -> np.ndarray:
    steps = MAX_PROBABILITY / resolution
    if resolution <= 0 or abs(steps - round(steps)) > 1e-9:
        raise ValidationError(f"resolution {resolution} does not divide 1/2")
    return np.arange(int(round(steps)) + 1) * resolution


def exhaustive_search_bit_independent(f_x: InputDistribution, constraint,
                                      resolution: float = DEFAULT_RESOLUTION,
                                      benefit_fn: BenefitFunction = squared_norm,
                                      chunk: int = 512) -> SearchResult:
    """Search all ``(p_down, p_up)`` grid pairs applied identically to every bit."""
    width, values = _check_inputs(f_x, constraint)
    grid = _dyadic_grid(resolution)
    pairs = np.array(list(itertools.product(grid, grid)))
    vectors = np.repeat(pairs, width, axis=1)
    benefits = np.asarray(benefit_fn(vectors), dtype=np.float64)
    feasible = np.zeros(len(pairs), dtype=bool)
    for start in range(0, len(pairs), chunk):
        block = vectors[start:start + chunk]
        pmfs = distortion_pmf_batch(block[:, :width], block[:, width:], f_x.pmf)
        feasible[start:start + chunk] = _feasible(pmfs, values)
    pick = _pick(vectors, benefits, feasible)
    if pick is None:
        return _result(ProbabilityVector(np.zeros(2 * width)), f_x, values, len(pairs),
                       len(pairs), benefit_fn)
    return _result(ProbabilityVector(vectors[pick], resolution), f_x, values, len(pairs),
                   len(pairs), benefit_fn)


def _group_options(options: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian product of per-bit ``(k_i, 2)`` option arrays -> (down, up) rows."""
    if not options:
        return np.zeros((1, 0)), np.zeros((1, 0))
    combos = np.array(list(itertools.product(*[range(len(o)) for o in options])))
    down = np.stack([options[i][combos[:, i], 0] for i in range(len(options))], axis=1)
    up = np.stack([options[i][combos[:, i], 1] for i in range(len(options))], axis=1)
    return down, up


def product_search(options: list[np.ndarray], f_x: InputDistribution, constraint,
                   benefit_fn: Optional[BenefitFunction] = None, chunk: int = 2048):
    """Best feasible choice of one ``(p_down, p_up)`` option per bit.

    Every candidate is first screened on ``T(0) = 1 - f_M(0)``, which costs
    one matrix product for the whole candidate set.  Survivors are fully
    evaluated in order of decreasing benefit, ties lexicographically, and
    the first feasible one is returned; that is the same optimum a full scan
    with the deterministic tie-break selects.

    Returns ``(vector or None, fully_evaluated, candidates)``.
    """
    width, values = _check_inputs(f_x, constraint)
    if len(options) != width:
        raise ValidationError("need one option array per bit")
    lo = width // 2
    lo_down, lo_up = _group_options(options[:lo])
    hi_down, hi_up = _group_options(options[lo:])
    n_lo, n_hi = len(lo_down), len(hi_down)
    candidates = n_lo * n_hi
    if candidates > MAX_CANDIDATES:
        raise CapacityError(f"{candidates} candidates exceed the limit of {MAX_CANDIDATES}")
    evaluator = ProductEvaluator(lo_down, lo_up, hi_down, hi_up, f_x.pmf)

    # screen slack is far above rounding, so no feasible candidate is dropped
    tail0 = 1.0 - evaluator.zero_mass()
    a_idx, b_idx = np.nonzero(tail0 <= values[0] + FEASIBILITY_ATOL + 1e-9)
    if a_idx.size == 0:
        return None, 0, candidates
    vectors = np.concatenate([lo_down[a_idx], hi_down[b_idx], lo_up[a_idx], hi_up[b_idx]], axis=1)
    if benefit_fn is None:
        lo_ben = squared_norm(np.concatenate([lo_down, lo_up], axis=1))
        hi_ben = squared_norm(np.concatenate([hi_down, hi_up], axis=1))
        benefits = lo_ben[a_idx] + hi_ben[b_idx]
    else:
        benefits = np.asarray(benefit_fn(vectors), dtype=np.float64)
    order = np.lexsort(tuple(vectors.T[::-1]) + (-benefits,))

    evaluated = 0
    for start in range(0, order.size, chunk):
        sel = order[start:start + chunk]
        pmfs = evaluator.pmf_list(a_idx[sel], b_idx[sel])
        feasible = _feasible(pmfs, values)
        evaluated += sel.size
        hits = np.flatnonzero(feasible)
        if hits.size:
            return vectors[sel[hits[0]]], evaluated, candidates
    return None, evaluated, candidates


def _step_options(base: np.ndarray, step: float, symmetric: bool) -> list[np.ndarray]:
    width = base.size // 2
    deltas = (-1, 0, 1) if symmetric else (0, 1)
    options = []
    for i in range(width):
        downs = sorted({min(max(base[i] + d * step, 0.0), MAX_PROBABILITY) for d in deltas})
        ups = sorted({min(max(base[width + i] + d * step, 0.0), MAX_PROBABILITY) for d in deltas})
        options.append(np.array(list(itertools.product(downs, ups)), dtype=np.float64))
    return options


def adaptive_search_bit_level(f_x: InputDistribution, constraint, steps: int = 6,
                              initial_exponent: int = 2, symmetric: bool = False,
                              benefit_fn: Optional[BenefitFunction] = None,
                              schedule: str = "refine") -> SearchResult:
    """Per-bit search refining the probability resolution at every step.

    Step ``n`` (1-based) tries every vector ``p_prev + delta * 2**-(n + e - 1)``
    with ``delta`` in {0, 1}**(2L) (``{-1, 0, 1}`` when ``symmetric``),
    clamped to [0, 1/2], starting from the zero vector; ``e`` is
    ``initial_exponent``.  The incumbent stays a candidate, so the benefit
    never decreases from step to step.

    ``schedule="lagged"`` keeps the first increment for two steps
    (1/4, 1/4, 1/8, ... with the default exponent), so step ``n > 1`` adds
    the previous step's resolution.
    """
    if schedule not in ("refine", "lagged"):
        raise ValidationError(f"unknown schedule {schedule!r}")
    width, values = _check_inputs(f_x, constraint)
    score = squared_norm if benefit_fn is None else benefit_fn
    current = np.zeros(2 * width)
    history = []
    evaluated_total = candidates_total = 0
    resolution = None
    for n in range(1, steps + 1):
        k = n if schedule == "refine" else max(n - 1, 1)
        resolution = 2.0 ** -(k + initial_exponent - 1)
        options = _step_options(current, resolution, symmetric)
        best, evaluated, candidates = product_search(options, f_x, values, benefit_fn)
        evaluated_total += evaluated
        candidates_total += candidates
        if best is not None:
            current = best
        history.append({"step": n, "resolution": resolution,
                        "benefit": float(np.asarray(score(current[None, :]))[0]),
                        "evaluated": int(evaluated), "candidates": int(candidates),
                        "p_down": current[:width].tolist(), "p_up": current[width:].tolist()})
    return _result(ProbabilityVector(current, resolution), f_x, values, evaluated_total,
                   candidates_total, score, history)


def exhaustive_search_bit_level(f_x: InputDistribution, constraint, resolution: float = 0.25,
                                benefit_fn: Optional[BenefitFunction] = None) -> SearchResult:
    """Full per-bit grid search; (1/(2 res) + 1)**(2L) candidates, small L only."""
    width, values = _check_inputs(f_x, constraint)
    grid = _dyadic_grid(resolution)
    per_bit = np.array(list(itertools.product(grid, grid)))
    best, evaluated, candidates = product_search([per_bit] * width, f_x, values, benefit_fn)
    score = squared_norm if benefit_fn is None else benefit_fn
    vector = ProbabilityVector(np.zeros(2 * width) if best is None else best, resolution)
    return _result(vector, f_x, values, evaluated, candidates, score)


def constraint_from_probabilities(p_rand) -> ConstraintTail:
    """Tail of the distortion when only the zero word is sent with up-flip probabilities ``p_rand``.

    Received value equals the distortion, so its PMF is the product of
    per-bit Bernoulli terms over the binary digits of ``m``.
    """
    p_rand = check_probabilities(np.atleast_1d(p_rand), name="p_rand")
    width = check_width(p_rand.size)
    m = np.arange(1 << width)
    pmf = np.ones(1 << width)
    for i in range(width):
        bit = (m >> i) & 1
        pmf *= np.where(bit == 1, p_rand[i], 1.0 - p_rand[i])
    return ConstraintTail(np.clip(tail_from_pmf(pmf), 0.0, 1.0))


def generate_random_constraint(width: int, seed: int) -> tuple[ConstraintTail, np.ndarray]:
    """Draw ``p_rand`` uniformly from [0, 1/2]**L and build its constraint tail."""
    width = check_width(width)
    rng = np.random.default_rng(int(seed) % (1 << 64))
    p_rand = rng.uniform(0.0, MAX_PROBABILITY, size=width)
    return constraint_from_probabilities(p_rand), p_rand


def oracle_tail(p_rand, f_x: InputDistribution) -> DistortionDistribution:
    """Distortion induced with ``p_down = p_up = p_rand``."""
    p_rand = check_probabilities(np.atleast_1d(p_rand), name="p_rand")
    return distortion_pmf_fast(IndependentChannel(p_rand, p_rand), f_x)
