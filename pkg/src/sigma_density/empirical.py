"""Brute-force oracles: segmented divisor sums and empirical densities.

These routines measure, by direct counting, the quantities the bound engine
certifies.  Divisor sums are exact (int64 holds sigma comfortably at desk
scale); densities come back as exact count/total rationals.  Streaming keeps
memory at one segment regardless of N.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from multiprocessing import Pool

import numpy as np

from .bounds import ProblemSpec
from .numth import BigRational, sieve_primes, sigma

DEFAULT_SEGMENT = 1 << 22
_MAX_SINGLE_RANGE = 1 << 24
_MAX_VALUE = 10**14  # sigma(m) * m**0.5 must stay clear of int64


@dataclass(frozen=True)
class RangeSigma:
    """Exact sigma values for every integer in [lo, hi]."""

    lo: int
    hi: int
    sigma_values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.sigma_values) != self.hi - self.lo + 1:
            raise ValueError("sigma_values length must match the range")


@dataclass(frozen=True)
class EmpiricalEstimate:
    """A counted frequency: count hits among total trials."""

    spec: ProblemSpec | None
    N: int
    count: int
    total: int
    density: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.count <= self.total:
            raise ValueError("count must lie in [0, total]")
        if self.density != Fraction(self.count, max(self.total, 1)):
            raise ValueError("density must equal count/total")


def _sigma_block(lo: int, hi: int) -> np.ndarray:
    """sigma(m) for m in [lo, hi], via prime-by-prime extraction.

    For each prime p <= sqrt(hi) the p-power of every multiple in the block
    is divided out; whatever remains above 1 afterwards is a single prime
    factor larger than sqrt(hi).
    """
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= lo <= hi")
    if hi > _MAX_VALUE:
        raise ValueError("range exceeds the exact int64 budget")
    size = hi - lo + 1
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    sig = np.ones(size, dtype=np.int64)
    for p in sieve_primes(isqrt(hi)):
        idx = np.arange((-lo) % p, size, p, dtype=np.int64)
        if idx.size == 0:
            continue
        before = rem[idx].copy()
        live = idx
        while live.size:
            rem[live] //= p
            live = live[rem[live] % p == 0]
        ppow = before // rem[idx]  # the extracted power p**e, e >= 1
        sig[idx] *= (ppow * p - 1) // (p - 1)
    left = rem > 1
    sig[left] *= rem[left] + 1
    return sig


def sigma_range(lo: int, hi: int) -> RangeSigma:
    """Exact sigma over a single block; larger sweeps should stream blocks."""
    if hi - lo + 1 > _MAX_SINGLE_RANGE:
        raise ValueError("range too large for one block; stream segments instead")
    return RangeSigma(lo, hi, _sigma_block(lo, hi))


def _compare_counts(spec: ProblemSpec, n0: int, n1: int) -> tuple[int, int]:
    """(count of sigma(kn+r1) >= sigma(kn+r2), count of ties) for n in [n0, n1)."""
    k, r1, r2 = spec.k, spec.r1, spec.r2
    lo = k * n0 + r2
    hi = k * (n1 - 1) + r1
    sig = _sigma_block(lo, hi)
    ns = np.arange(n0, n1, dtype=np.int64)
    s1 = sig[ns * k + r1 - lo]
    s2 = sig[ns * k + r2 - lo]
    return int(np.count_nonzero(s1 >= s2)), int(np.count_nonzero(s1 == s2))


def _compare_counts_star(args) -> tuple[int, int]:
    return _compare_counts(*args)


def _scan(spec: ProblemSpec, N: int, workers: int, segment: int) -> tuple[int, int]:
    if N < 1:
        raise ValueError("N must be >= 1")
    step = max(segment // spec.k, 1)
    tasks = [(spec, n0, min(n0 + step, N + 1)) for n0 in range(1, N + 1, step)]
    if workers > 1 and len(tasks) > 1:
        with Pool(workers) as pool:
            parts = pool.map(_compare_counts_star, tasks)
    else:
        parts = [_compare_counts(*t) for t in tasks]
    ge = sum(p[0] for p in parts)
    eq = sum(p[1] for p in parts)
    return ge, eq


def empirical_density(
    spec: ProblemSpec, N: int, workers: int = 1, segment: int = DEFAULT_SEGMENT
) -> EmpiricalEstimate:
    """Frequency of sigma(kn+r1) >= sigma(kn+r2) over n in [1, N]."""
    ge, _ = _scan(spec, N, workers, segment)
    return EmpiricalEstimate(spec, N, ge, N, Fraction(ge, N))


def tie_count(
    spec: ProblemSpec, N: int, workers: int = 1, segment: int = DEFAULT_SEGMENT
) -> EmpiricalEstimate:
    """Frequency of exact ties sigma(kn+r1) == sigma(kn+r2) over n in [1, N]."""
    _, eq = _scan(spec, N, workers, segment)
    return EmpiricalEstimate(spec, N, eq, N, Fraction(eq, N))


def _smooth_block(lo: int, hi: int, y: int) -> np.ndarray:
    """Largest y-smooth divisor for every m in [lo, hi]."""
    size = hi - lo + 1
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    part = np.ones(size, dtype=np.int64)
    for p in sieve_primes(y):
        idx = np.arange((-lo) % p, size, p, dtype=np.int64)
        if idx.size == 0:
            continue
        before = rem[idx].copy()
        live = idx
        while live.size:
            rem[live] //= p
            live = live[rem[live] % p == 0]
        part[idx] *= before // rem[idx]
    return part


def empirical_pair_density(
    a: int,
    b: int,
    spec: ProblemSpec,
    y: int,
    N: int,
    segment: int = DEFAULT_SEGMENT,
) -> EmpiricalEstimate:
    """Frequency of n <= N landing in the cell S(a,b), by direct smooth parts."""
    if N < 1:
        raise ValueError("N must be >= 1")
    k, r1, r2 = spec.k, spec.r1, spec.r2
    step = max(segment // k, 1)
    hits = 0
    for n0 in range(1, N + 1, step):
        n1 = min(n0 + step, N + 1)
        lo = k * n0 + r2
        hi = k * (n1 - 1) + r1
        part = _smooth_block(lo, hi, y)
        ns = np.arange(n0, n1, dtype=np.int64)
        ya = part[ns * k + r1 - lo]
        yb = part[ns * k + r2 - lo]
        hits += int(np.count_nonzero((ya == a) & (yb == b)))
    return EmpiricalEstimate(spec, N, hits, N, Fraction(hits, N))


def _tree_sum(vals: list[Fraction]) -> Fraction:
    """Pairwise summation; keeps intermediate denominators near their lcm."""
    if not vals:
        return Fraction(0)
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def progression_mean_hs(g: int, modulus: int, s: int, N: int) -> Fraction:
    """Exact mean of (sigma(n)/n)**s over n <= N with n ≡ g (mod modulus).

    For large N this mean approaches the coprime-to-modulus limit that
    lambda_upper certifies from above (when the modulus is a primorial).
    """
    if modulus < 1 or not 1 <= g <= modulus:
        raise ValueError("need 1 <= g <= modulus")
    if gcd(g, modulus) != 1:
        raise ValueError("g must be coprime to the modulus")
    if s < 1:
        raise ValueError("s must be >= 1")
    if N < g:
        raise ValueError("no progression members below N")
    terms: list[Fraction] = []
    block = _MAX_SINGLE_RANGE
    for lo in range(1, N + 1, block):
        hi = min(lo + block - 1, N)
        sig = _sigma_block(lo, hi)
        first = lo + ((g - lo) % modulus)
        for n in range(first, hi + 1, modulus):
            terms.append(Fraction(int(sig[n - lo]), n) ** s)
    return _tree_sum(terms) / len(terms)


__all__ = [
    "DEFAULT_SEGMENT",
    "EmpiricalEstimate",
    "RangeSigma",
    "empirical_density",
    "empirical_pair_density",
    "progression_mean_hs",
    "sigma_range",
    "tie_count",
]
