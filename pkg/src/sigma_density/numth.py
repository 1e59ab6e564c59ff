"""Exact number-theoretic kernel: primes, factorization, sigma, smooth parts.

Everything here returns exact integers or rationals.  No floating point is
produced by any public function; ``BigRational`` (an alias for the stdlib
``fractions.Fraction``) is the numeric carrier used throughout the package.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

BigRational = Fraction

# Grown-on-demand prime table shared by factorize/smooth_part/valuation.
_prime_table: list[int] = []
_prime_limit = 0


def sieve_primes(limit: int) -> list[int]:
    """All primes <= limit in ascending order (empty list for limit < 2)."""
    if limit < 2:
        return []
    sieve = bytearray(b"\x01") * (limit + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i in range(2, limit + 1) if sieve[i]]


def _primes_up_to(limit: int) -> list[int]:
    """Cached prime table; regrows geometrically so repeat callers pay once."""
    global _prime_table, _prime_limit
    if limit > _prime_limit:
        new_limit = max(limit, 2 * _prime_limit, 1 << 10)
        _prime_table = sieve_primes(new_limit)
        _prime_limit = new_limit
    return _prime_table[: bisect_right(_prime_table, limit)]


def is_prime(n: int) -> bool:
    """Deterministic primality by trial division; fine at desk scale."""
    if n < 2:
        return False
    for p in _primes_up_to(isqrt(n)):
        if n % p == 0:
            return n == p
    return True


@dataclass(frozen=True)
class Factorization:
    """Prime factorization ``value = prod(p**e)`` with p ascending, e >= 1."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError("factorization only defined for positive integers")
        prod = 1
        last_p = 1
        for p, e in self.factors:
            if p <= last_p or e < 1 or not is_prime(p):
                raise ValueError("factors must be ascending primes with e >= 1")
            last_p = p
            prod *= p**e
        if prod != self.value:
            raise ValueError("factor product does not reconstruct value")


def factorize(n: int) -> Factorization:
    """Factor n >= 1 by trial division against the shared prime table."""
    if n < 1:
        raise ValueError("factorize requires n >= 1")
    m = n
    factors: list[tuple[int, int]] = []
    for p in _primes_up_to(isqrt(n)):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
    if m > 1:
        # leftover has no divisor <= sqrt(n), hence prime
        factors.append((m, 1))
    return Factorization(n, tuple(factors))


def sigma(n: int) -> int:
    """Sum of divisors, computed multiplicatively from the factorization."""
    total = 1
    for p, e in factorize(n).factors:
        total *= (p ** (e + 1) - 1) // (p - 1)
    return total


def abundancy_pow(n: int, s: int) -> Fraction:
    """(sigma(n)/n)**s as an exact rational; s >= 1."""
    if s < 1:
        raise ValueError("abundancy_pow requires s >= 1")
    return Fraction(sigma(n), n) ** s


def smooth_numbers(y: int, z: int) -> list[int]:
    """Sorted y-smooth numbers in [1, z], built by multiplying prime powers.

    1 is y-smooth for every y.  Generation is multiplicative, not a sieve,
    so large z with small y stays cheap.
    """
    if y < 2:
        raise ValueError("smooth_numbers requires y >= 2")
    if z < 1:
        raise ValueError("smooth_numbers requires z >= 1")
    out = [1]
    for p in _primes_up_to(y):
        grown: list[int] = []
        for x in out:
            m = x
            while m <= z:
                grown.append(m)
                m *= p
        out = grown
    out.sort()
    return out


def smooth_part(n: int, y: int) -> int:
    """Largest y-smooth divisor of n: prod over p <= y of p**v_p(n)."""
    if n < 1:
        raise ValueError("smooth_part requires n >= 1")
    if y < 2:
        raise ValueError("smooth_part requires y >= 2")
    part = 1
    m = n
    for p in _primes_up_to(y):
        while m % p == 0:
            m //= p
            part *= p
    return part


def valuation(n: int, p: int) -> int:
    """p-adic valuation v_p(n) for n >= 1 and prime p."""
    if n < 1:
        raise ValueError("valuation requires n >= 1")
    if not is_prime(p):
        raise ValueError("valuation requires a prime p")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def primorial(y: int) -> int:
    """Product of all primes <= y."""
    out = 1
    for p in _primes_up_to(y):
        out *= p
    return out


__all__ = [
    "BigRational",
    "Factorization",
    "abundancy_pow",
    "factorize",
    "gcd",
    "is_prime",
    "primorial",
    "sieve_primes",
    "sigma",
    "smooth_numbers",
    "smooth_part",
    "valuation",
]
