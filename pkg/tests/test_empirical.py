"""Brute-force layer tests: the sieve must agree with per-integer
arithmetic, and the density estimates must agree with naive loops."""

import random
from fractions import Fraction

import pytest

from sigma_density.bounds import BoundParams, ProblemSpec, compute_bounds
from sigma_density.empirical import (
    empirical_density,
    empirical_pair_density,
    progression_mean_hs,
    sigma_range,
    tie_count,
)
from sigma_density.numth import abundancy_pow, sigma, smooth_part

P320 = ProblemSpec(3, 2, 0)
P431 = ProblemSpec(4, 3, 1)
P210 = ProblemSpec(2, 1, 0)


# ---------------------------------------------------------------- oracles

def density_by_loop(spec, N):
    hits = 0
    for n in range(1, N + 1):
        if sigma(spec.k * n + spec.r1) >= sigma(spec.k * n + spec.r2):
            hits += 1
    return hits


def ties_by_loop(spec, N):
    return sum(
        1
        for n in range(1, N + 1)
        if sigma(spec.k * n + spec.r1) == sigma(spec.k * n + spec.r2)
    )


def cell_count_by_loop(a, b, spec, y, N):
    return sum(
        1
        for n in range(1, N + 1)
        if smooth_part(spec.k * n + spec.r1, y) == a
        and smooth_part(spec.k * n + spec.r2, y) == b
    )


# ---------------------------------------------------------------- sigma_range

def test_sigma_range_frozen():
    assert sigma_range(1, 10).sigma_values.tolist() == [1, 3, 4, 7, 6, 12, 8, 15, 13, 18]
    assert sigma_range(12, 12).sigma_values.tolist() == [28]


def test_sigma_range_metadata():
    rs = sigma_range(5, 25)
    assert rs.lo == 5 and rs.hi == 25
    assert len(rs.sigma_values) == 21


def test_sigma_range_matches_sigma_pointwise():
    rng = random.Random(31337)
    for _ in range(6):
        lo = rng.randrange(1, 10**6)
        rs = sigma_range(lo, lo + 400)
        for i in (0, 1, 57, 250, 400):
            assert rs.sigma_values[i] == sigma(lo + i)


def test_sigma_range_large_values_stay_exact():
    lo = 10**10
    rs = sigma_range(lo, lo + 200)
    for i in (0, 3, 127, 200):
        assert rs.sigma_values[i] == sigma(lo + i)


def test_sigma_range_rejects_oversized_block():
    with pytest.raises(ValueError):
        sigma_range(1, 1 << 25)


# ---------------------------------------------------------------- densities

def test_empirical_density_matches_loop():
    for spec in (P210, P320, P431):
        N = 2000
        est = empirical_density(spec, N)
        assert est.count == density_by_loop(spec, N)
        assert est.total == N
        assert est.density == Fraction(est.count, N)


def test_empirical_density_frozen_regression():
    # values pinned after the loop-oracle agreement above held
    assert empirical_density(P210, 10**5).count == 5490
    assert tie_count(P210, 10**5).count == 20


def test_empirical_density_single_sample():
    for spec in (P210, P320, P431):
        est = empirical_density(spec, 1)
        expected = 1 if sigma(spec.k + spec.r1) >= sigma(spec.k + spec.r2) else 0
        assert est.count == expected and est.total == 1


def test_empirical_density_workers_agree():
    one = empirical_density(P320, 200000, workers=1)
    many = empirical_density(P320, 200000, workers=4)
    assert one == many


def test_empirical_density_rejects_bad_n():
    with pytest.raises(ValueError):
        empirical_density(P210, 0)


def test_ties_match_loop_and_single_sample():
    for spec in (P210, P320, P431):
        assert tie_count(spec, 1500).count == ties_by_loop(spec, 1500)
        est = tie_count(spec, 1)
        assert est.count == (1 if sigma(spec.k + spec.r1) == sigma(spec.k + spec.r2) else 0)


def test_tie_density_decays_and_stays_small():
    for spec in (P210, P320, P431):
        coarse = tie_count(spec, 10**4).density
        fine = tie_count(spec, 10**6).density
        assert fine <= coarse + Fraction(1, 1000)
        assert fine < Fraction(1, 100)


def test_density_lies_inside_certified_interval():
    # the bounds are rigorous: an escape would be a build-stopping bug
    params = BoundParams(y=17, z=1000, s_max=6)
    for spec in (P210, P320, P431):
        rep = compute_bounds(spec, params, keep_pairs=False)
        for N in (10**5, 10**6):
            d = empirical_density(spec, N).density
            assert rep.lower <= d <= rep.upper, (spec, N, float(d))


# ---------------------------------------------------------------- cells

def test_pair_density_matches_loop_exactly():
    N = 3000
    est = empirical_pair_density(1, 3, P320, 17, N)
    assert est.count == cell_count_by_loop(1, 3, P320, 17, N)
    est = empirical_pair_density(1, 2, P210, 17, N)
    assert est.count == cell_count_by_loop(1, 2, P210, 17, N)


def test_pair_density_simple_cells_near_known_mass():
    # y=2: the odd comparand always has trivial smooth part, the even
    # side is exactly 2 for half of all n
    est = empirical_pair_density(1, 2, P210, 2, 10**5)
    ds = Fraction(1, 2)
    diff = est.density - ds
    assert diff * diff * est.total <= 9 * ds * (1 - ds)
    # y=3 cell (1,3) of (3,2,0) has mass 1/3
    est = empirical_pair_density(1, 3, P320, 3, 10**5)
    ds = Fraction(1, 3)
    diff = est.density - ds
    assert diff * diff * est.total <= 9 * ds * (1 - ds)


def test_pair_density_inadmissible_cell_is_empty():
    assert empirical_pair_density(2, 6, P320, 17, 20000).count == 0
    assert empirical_pair_density(1, 1, P210, 17, 20000).count == 0


def test_cells_partition_sampled_n():
    # every n lands in exactly one cell: summed frequencies of distinct
    # cells can never exceed 1
    cells = [(1, 2), (1, 4), (3, 2), (1, 6), (5, 2), (3, 4)]
    total = sum(empirical_pair_density(a, b, P210, 17, 30000).density for a, b in cells)
    assert total <= 1


# ---------------------------------------------------------------- means

def test_progression_mean_single_member():
    # N = modulus: the only member is g itself
    assert progression_mean_hs(3, 10, 2, 10) == abundancy_pow(3, 2)
    assert progression_mean_hs(1, 2, 1, 2) == 1


def test_progression_mean_small_frozen():
    # n in {1, 3, 5}: (1 + 4/3 + 6/5) / 3
    assert progression_mean_hs(1, 2, 1, 5) == Fraction(53, 45)


def test_progression_mean_matches_loop():
    vals = [abundancy_pow(n, 2) for n in range(1, 2001) if n % 3 == 1]
    expected = sum(vals) / len(vals)
    assert progression_mean_hs(1, 3, 2, 2000) == expected


def test_progression_mean_whole_line_approaches_zeta2():
    mean = progression_mean_hs(1, 1, 1, 10**5)
    assert abs(mean - Fraction(164493, 10**5)) < Fraction(1, 100)


def test_progression_mean_validates_arguments():
    with pytest.raises(ValueError):
        progression_mean_hs(2, 4, 1, 100)  # gcd(g, modulus) != 1
    with pytest.raises(ValueError):
        progression_mean_hs(3, 10, 1, 2)  # N < g
    with pytest.raises(ValueError):
        progression_mean_hs(1, 2, 0, 100)  # s < 1
