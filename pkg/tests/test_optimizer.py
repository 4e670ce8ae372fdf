import itertools

import numpy as np
import pytest

from vdb_channel import (ConstraintTail, IndependentChannel, InputDistribution, ProbabilityVector,
                         WordDependentChannel, adaptive_search_bit_level, benefit,
                         brute_force_oracle, distortion_pmf_fast,
                         exhaustive_search_bit_independent, exhaustive_search_bit_level,
                         generate_random_constraint, oracle_tail, satisfies_constraint)
from vdb_channel.exceptions import ValidationError
from vdb_channel.optimizer import (average_benefit, constraint_from_probabilities,
                                   product_search)


def unconstrained(width):
    return ConstraintTail.constant(1.0, width)


def zero_constraint(width):
    return ConstraintTail(np.zeros(1 << width))


def test_benefit_values():
    assert benefit(np.zeros(16)) == 0
    assert benefit(np.full(16, 0.5)) == 4.0


def test_average_benefit():
    ch = IndependentChannel(np.full(3, 0.25), np.full(3, 0.5))
    assert average_benefit(ch, InputDistribution.uniform(3)) == pytest.approx(benefit(
        np.r_[ch.p_down, ch.p_up]))
    # per-word benefits 1/4 and 3/4 at 50/50
    wd = WordDependentChannel(np.zeros((2, 1)), np.array([[0.5], [np.sqrt(0.75)]]))
    assert average_benefit(wd, InputDistribution.uniform(1)) == pytest.approx(0.5)
    assert average_benefit(wd, InputDistribution.point_mass(1, 1)) == pytest.approx(0.75)


def test_satisfies_constraint():
    f_x = InputDistribution.uniform(4)
    zero = distortion_pmf_fast(IndependentChannel.zero(4), f_x)
    worst = distortion_pmf_fast(IndependentChannel.uniform_bits(1, 0, 4), f_x)
    assert satisfies_constraint(zero, zero_constraint(4))
    assert satisfies_constraint(worst, unconstrained(4))
    assert not satisfies_constraint(worst, zero_constraint(4))
    with pytest.raises(ValidationError):
        satisfies_constraint(zero, unconstrained(3))


def test_probability_vector_checks():
    with pytest.raises(ValidationError):
        ProbabilityVector(np.full(4, 0.6))
    with pytest.raises(ValidationError):
        ProbabilityVector(np.full(4, 0.3), resolution=0.25)
    with pytest.raises(ValidationError):
        ProbabilityVector(np.zeros(3))
    pv = ProbabilityVector.from_parts([0.25, 0.5], [0, 0.125], resolution=0.125)
    assert pv.width == 2 and pv.to_channel().p_down.tolist() == [0.25, 0.5]


@pytest.mark.parametrize("width", [2, 8])
def test_bit_independent_extremes(width):
    f_x = InputDistribution.uniform(width)
    r = exhaustive_search_bit_independent(f_x, zero_constraint(width))
    assert r.benefit == 0 and not r.best.p.any() and r.feasible
    r = exhaustive_search_bit_independent(f_x, unconstrained(width))
    assert np.all(r.best.p == 0.5)
    # 2L entries of (1/2)**2
    assert r.benefit == width / 2


def test_bit_independent_matches_brute_grid():
    width = 4
    f_x = InputDistribution.uniform(width)
    c, _ = generate_random_constraint(width, 3)
    res = 2.0 ** -4
    r = exhaustive_search_bit_independent(f_x, c, res)
    grid = np.arange(0, 0.5 + res / 2, res)
    best = None
    for d, u in itertools.product(grid, grid):
        t = brute_force_oracle(IndependentChannel.uniform_bits(d, u, width), f_x).tail
        if np.all(t <= c.values + 1e-12):
            key = (-(width * (d * d + u * u)), d, u)
            best = key if best is None or key < best else best
    assert (r.best.p_down[0], r.best.p_up[0]) == (best[1], best[2])


@pytest.mark.parametrize("width", [1, 2, 3])
def test_bit_level_dominates_bit_independent(width):
    f_x = InputDistribution.uniform(width)
    for seed in range(4):
        c, _ = generate_random_constraint(width, seed)
        full = exhaustive_search_bit_level(f_x, c, 0.25)
        indep = exhaustive_search_bit_independent(f_x, c, 0.25)
        assert full.benefit >= indep.benefit
        assert satisfies_constraint(brute_force_oracle(full.best.to_channel(), f_x), c)


def test_adaptive_extremes():
    f_x = InputDistribution.uniform(4)
    r = adaptive_search_bit_level(f_x, zero_constraint(4))
    assert not r.best.p.any()
    r = adaptive_search_bit_level(f_x, unconstrained(4))
    # 1/4 + 1/8 + ... + 1/128: increments never land exactly on 1/2
    assert np.all(r.best.p == 63 / 128)
    assert [h["resolution"] for h in r.history] == [2.0 ** -k for k in range(2, 8)]


def test_adaptive_history_and_feasibility():
    width = 6
    f_x = InputDistribution.uniform(width)
    c, _ = generate_random_constraint(width, 11)
    r = adaptive_search_bit_level(f_x, c)
    benefits = [h["benefit"] for h in r.history]
    assert benefits == sorted(benefits)
    assert r.benefit == benefits[-1]
    assert satisfies_constraint(brute_force_oracle(r.best.to_channel(), f_x), c)


def test_adaptive_matches_plain_product_scan():
    width = 3
    f_x = InputDistribution.uniform(width)
    c, _ = generate_random_constraint(width, 5)
    r = adaptive_search_bit_level(f_x, c, steps=3)
    current = np.zeros(2 * width)
    for n in range(1, 4):
        step = 2.0 ** -(n + 1)
        best = None
        for delta in itertools.product((0, 1), repeat=2 * width):
            cand = np.minimum(current + step * np.array(delta), 0.5)
            t = brute_force_oracle(IndependentChannel(cand[:width], cand[width:]), f_x).tail
            if np.all(t <= c.values + 1e-12):
                key = (-float(np.sum(cand ** 2)), tuple(cand))
                best = key if best is None or key < best else best
        current = np.array(best[1])
    assert np.array_equal(r.best.p, current)


def test_lagged_schedule_and_symmetric_flag():
    f_x = InputDistribution.uniform(3)
    c, _ = generate_random_constraint(3, 2)
    lag = adaptive_search_bit_level(f_x, c, schedule="lagged")
    assert [h["resolution"] for h in lag.history] == [0.25, 0.25, 0.125, 2 ** -4, 2 ** -5, 2 ** -6]
    sym = adaptive_search_bit_level(f_x, c, symmetric=True)
    assert sym.feasible and sym.benefit >= sym.history[0]["benefit"]
    with pytest.raises(ValidationError):
        adaptive_search_bit_level(f_x, c, schedule="random")


def test_product_search_tie_break():
    f_x = InputDistribution.uniform(2)
    options = [np.array([[0.0, 0.0], [0.25, 0.0], [0.0, 0.25]])] * 2
    best, _, _ = product_search(options, f_x, ConstraintTail.constant(1.0, 2))
    # all single-increment candidates tie; lexicographically smallest wins
    assert best.tolist() == [0.0, 0.0, 0.25, 0.25]


def test_constraint_generation():
    c = constraint_from_probabilities(np.zeros(4))
    assert not c.values.any()
    c = constraint_from_probabilities([0.3])
    np.testing.assert_allclose(c.values, [0.3, 0.0])
    c, p_rand = generate_random_constraint(6, 7)
    assert np.all((p_rand >= 0) & (p_rand <= 0.5))
    ref = distortion_pmf_fast(IndependentChannel(np.zeros(6), p_rand), InputDistribution.point_mass(0, 6))
    np.testing.assert_allclose(c.values, ref.tail, atol=1e-15)
    c2, p2 = generate_random_constraint(6, 7)
    assert c2 == c and np.array_equal(p2, p_rand)


def test_oracle_tail_small_cases():
    assert not oracle_tail(np.zeros(3), InputDistribution.uniform(3)).tail.any()
    np.testing.assert_allclose(oracle_tail([0.2], InputDistribution.uniform(1)).tail, [0.2, 0.0])


def test_results_are_deterministic():
    f_x = InputDistribution.uniform(5)
    c, _ = generate_random_constraint(5, 21)
    a = adaptive_search_bit_level(f_x, c)
    b = adaptive_search_bit_level(f_x, c)
    assert a.to_dict() == b.to_dict()
