"""Certified density bounds for {n : sigma(k*n+r1) >= sigma(k*n+r2)}.

The positive integers are partitioned into cells S(a,b) by the y-smooth
parts of k*n+r1 and k*n+r2.  Each cell has an exact rational density; on a
cell the abundancy ratio h = sigma/id is pinned down well enough that a
certified mean-value bound Lambda(s) converts the cell density into lower
and upper contributions to the target density.  Summing over all cells with
a*b <= z, and charging every unenumerated cell in full to the upper bound,
yields rigorous two-sided bounds.

Two independent routes compute a cell density: a closed-form Euler-style
product (``ds_formula``) and a p-adic residue scan (``ds_local``).  The scan
is the ground truth by construction; whenever the two disagree the engine
uses the scan value and records a diagnostic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from multiprocessing import Pool

from .numth import (
    BigRational,
    _primes_up_to,
    abundancy_pow,
    primorial,
    smooth_numbers,
    smooth_part,
    valuation,
)


class StabilityError(RuntimeError):
    """A local density scan changed value when the scan modulus was raised."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed (e.g. enumerated cell mass exceeds 1)."""


# Certified upper bound for zeta(2) = pi^2/6 = 1.6449340668482264...
# Chosen with enough slack that the partial-sum-plus-integral bound
# zeta(2) < sum_{n<=N} 1/n^2 + 1/N certifies it at modest N (see tests).
ZETA2_UPPER = Fraction(164493406685, 10**11)

# Upper bound for the prime tail above the default cap 65536 in Lambda(s),
# s >= 2: the omitted factors multiply to at most exp(TAIL_EXP_COEFF * s).
TAIL_EXP_COEFF = Fraction(16623114, 10**13)

DEFAULT_LAMBDA_CAP = 65536

# Denominator used when rounding running Lambda products upward.
_ROUND_BITS = 96


def decimal_str(x: Fraction, digits: int = 6, rounding: str = "nearest") -> str:
    """Render an exact fraction as a fixed-point decimal string.

    rounding "floor"/"ceil" keeps the printed value a one-sided bound for
    the exact one, so lower bounds stay lower bounds after truncation.
    """
    if digits < 1:
        raise ValueError("digits must be >= 1")
    scaled = x * 10**digits
    if rounding == "floor":
        units = scaled.numerator // scaled.denominator
    elif rounding == "ceil":
        units = -(-scaled.numerator // scaled.denominator)
    elif rounding == "nearest":
        units = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    else:
        raise ValueError(f"unknown rounding mode: {rounding!r}")
    sign = "-" if units < 0 else ""
    units = abs(units)
    return f"{sign}{units // 10**digits}.{units % 10**digits:0{digits}d}"


@dataclass(frozen=True)
class ProblemSpec:
    """The comparison sigma(k*n+r1) >= sigma(k*n+r2) with k > r1 > r2 >= 0."""

    k: int
    r1: int
    r2: int

    def __post_init__(self) -> None:
        if not (self.k > self.r1 > self.r2 >= 0):
            raise ValueError("ProblemSpec requires k > r1 > r2 >= 0")

    @property
    def shift(self) -> int:
        """r1 - r2, the constant offset between the two compared arguments."""
        return self.r1 - self.r2


@dataclass(frozen=True)
class BoundParams:
    """Tuning knobs: smoothness bound y, cell budget z, exponent cap s_max."""

    y: int
    z: int
    s_max: int
    lambda_cap: int = DEFAULT_LAMBDA_CAP
    primorial_P: int = 0  # derived; filled in __post_init__

    def __post_init__(self) -> None:
        if self.y < 2:
            raise ValueError("BoundParams requires y >= 2")
        if self.z < 1:
            raise ValueError("BoundParams requires z >= 1")
        if self.s_max < 1:
            raise ValueError("BoundParams requires s_max >= 1")
        if self.lambda_cap <= self.y:
            raise ValueError("BoundParams requires lambda_cap > y")
        object.__setattr__(self, "primorial_P", primorial(self.y))


@dataclass(frozen=True)
class LambdaTable:
    """Certified upper bounds Lambda(s) > 1 for s = 1..s_max."""

    y: int
    s_max: int
    lambda_cap: int
    entries: dict[int, Fraction]

    def __post_init__(self) -> None:
        for s, val in self.entries.items():
            if val <= 1:
                raise ValueError(f"Lambda({s}) must exceed 1, got {val}")


@dataclass(frozen=True)
class PairBound:
    """Per-cell result: density ds and its certified split db_minus/db_plus."""

    a: int
    b: int
    ds: Fraction
    db_minus: Fraction
    db_plus: Fraction
    best_s_lower: int | None
    best_s_upper: int | None

    def __post_init__(self) -> None:
        if not (0 <= self.db_minus <= self.db_plus <= self.ds):
            raise ValueError("PairBound requires 0 <= db_minus <= db_plus <= ds")


@dataclass(frozen=True)
class BoundsReport:
    """Aggregated run result; all numeric fields are exact rationals."""

    spec: ProblemSpec
    params: BoundParams
    lower: Fraction
    upper: Fraction
    coverage: Fraction
    tail: Fraction
    pair_count: int
    pairs: tuple[PairBound, ...] | None
    diagnostics: tuple[str, ...]
    elapsed_seconds: float  # informational only; never serialized

    def __post_init__(self) -> None:
        if not (0 <= self.lower <= self.upper <= 1):
            raise ValueError("BoundsReport requires 0 <= lower <= upper <= 1")


def _vp_capped(x: int, p: int, cap: int) -> int:
    """v_p(x) but reported as cap once it reaches cap; v_p(0) counts as cap."""
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


@lru_cache(maxsize=None)
def _local_density(p: int, alpha: int, beta: int, k: int, r1: int, r2: int) -> Fraction:
    """Density of {n : v_p(k*n+r1) = alpha and v_p(k*n+r2) = beta}.

    Exact residue scan modulo p**T.  Membership is constant on residue
    classes mod p**T because any class value with v_p >= T stays >= T for
    the whole class while alpha, beta < T.  The scan is repeated at T+1 and
    must agree, else the heuristic T was too small and we fail loudly.
    """
    T = alpha + beta + valuation(k, p) + 2
    counts = []
    for exp in (T, T + 1):
        mod = p**exp
        hit = 0
        for n in range(mod):
            if _vp_capped(k * n + r1, p, exp) == alpha and _vp_capped(k * n + r2, p, exp) == beta:
                hit += 1
        counts.append(Fraction(hit, mod))
    if counts[0] != counts[1]:
        raise StabilityError(
            f"local density unstable at p={p} alpha={alpha} beta={beta}: "
            f"{counts[0]} vs {counts[1]}"
        )
    return counts[0]


def ds_local(a: int, b: int, spec: ProblemSpec, params: BoundParams) -> Fraction:
    """Cell density of S(a,b) as a product of per-prime scanned densities.

    This is the oracle route: correct by CRT/periodicity, with no appeal to
    the closed form.  Returns 0 for empty cells.
    """
    _require_smooth(a, b, params.y)
    out = Fraction(1)
    for p in _primes_up_to(params.y):
        out *= _local_density(p, valuation(a, p), valuation(b, p), spec.k, spec.r1, spec.r2)
        if out == 0:
            return out
    return out


def ds_formula(a: int, b: int, spec: ProblemSpec, params: BoundParams) -> Fraction:
    """Closed-form cell density product.

    Valid only on admissible pairs, and even there it can disagree with
    ds_local for some parameter classes; compute_bounds resolves any
    disagreement in favor of ds_local.
    """
    _require_smooth(a, b, params.y)
    c = spec.shift
    ab = a * b
    val = Fraction(spec.k, ab)
    for p in _primes_up_to(params.y):
        if c % p != 0:
            if ab % p != 0:
                val *= Fraction(p - 2, p)
            else:
                val *= Fraction(p - 1, p)
        else:
            if ab % p != 0:
                val *= Fraction(p - 1, p)
            else:
                val *= Fraction((p - 1) ** 2, p)
    return val


def _require_smooth(a: int, b: int, y: int) -> None:
    if a < 1 or b < 1:
        raise ValueError("cell labels must be positive integers")
    if smooth_part(a, y) != a or smooth_part(b, y) != b:
        raise ValueError(f"cell labels must be {y}-smooth, got ({a}, {b})")


def admissible(a: int, b: int, spec: ProblemSpec, y: int) -> bool:
    """True iff the cell S(a,b) can be nonempty.

    Checks gcd(a,b) | r1-r2 and, for every prime p <= y, solvability of the
    joint valuation condition in some residue class (via the local scans).
    """
    _require_smooth(a, b, y)
    if spec.shift % gcd(a, b) != 0:
        return False
    for p in _primes_up_to(y):
        if _local_density(p, valuation(a, p), valuation(b, p), spec.k, spec.r1, spec.r2) == 0:
            return False
    return True


def _round_up(x: Fraction, bits: int = _ROUND_BITS) -> Fraction:
    """Smallest rational with denominator 2**bits that is >= x."""
    scale = 1 << bits
    num = -((-x.numerator * scale) // x.denominator)  # ceil division
    return Fraction(num, scale)


@lru_cache(maxsize=None)
def _lambda_upper_cached(s: int, y: int, lambda_cap: int) -> Fraction:
    if s == 1:
        val = ZETA2_UPPER
        for p in _primes_up_to(y):
            val *= Fraction(p * p - 1, p * p)
        return val
    # s >= 2: finite Euler-style product over y < p < lambda_cap, each factor
    # an exact rational rounded upward, times a certified tail factor.
    acc = Fraction(1)
    for p in _primes_up_to(lambda_cap - 1):
        if p <= y:
            continue
        first = Fraction((p + 1) ** s - p**s, p ** (s + 1))
        rest = Fraction(s * p ** (s - 1), (p**4 - p**2) * (p - 1) ** (s - 1))
        acc = _round_up(acc * _round_up(1 + first + rest))
    x = TAIL_EXP_COEFF * s
    if x > Fraction(1, 10**4):
        # exp(x) <= 1 + x + x^2 needs small x; the default cap keeps x ~ 1e-5
        raise ValueError("tail exponent too large for the certified exp bound")
    return acc * (1 + x + x * x)


def lambda_upper(s: int, params: BoundParams) -> Fraction:
    """Certified upper bound for the mean of h^s over integers coprime to P.

    s = 1 uses the closed form zeta(2) * prod_{p<=y}(1 - 1/p^2) with a
    certified rational zeta(2) upper bound; s >= 2 uses a finite product
    with upward rounding plus a tail factor valid for the default cap.
    """
    if not 1 <= s <= params.s_max:
        raise ValueError("lambda_upper requires 1 <= s <= s_max")
    return _lambda_upper_cached(s, params.y, params.lambda_cap)


def lambda_table(params: BoundParams) -> LambdaTable:
    """Lambda(s) for every s in 1..s_max."""
    entries = {s: lambda_upper(s, params) for s in range(1, params.s_max + 1)}
    return LambdaTable(params.y, params.s_max, params.lambda_cap, entries)


@lru_cache(maxsize=None)
def _h_pow(n: int, s: int) -> Fraction:
    return abundancy_pow(n, s)


def pair_bounds(
    a: int,
    b: int,
    spec: ProblemSpec,
    params: BoundParams,
    lambdas: LambdaTable,
    ds: Fraction | None = None,
) -> PairBound:
    """Certified split of one cell's density into db_minus <= db <= db_plus.

    For each s, if h^s(a)/h^s(b) > Lambda(s) the whole-cell comparison is
    forced often enough to keep a positive lower share; if h^s(b)/h^s(a) >
    Lambda(s) the upper share drops below ds.  The best s on each side wins;
    ties go to the smallest s.
    """
    if ds is None:
        ds = ds_local(a, b, spec, params)
    if ds <= 0:
        raise ValueError("pair_bounds requires an admissible pair (ds > 0)")
    db_minus = Fraction(0)
    best_s_lower: int | None = None
    db_plus = ds
    best_s_upper: int | None = None
    for s in range(1, params.s_max + 1):
        lam = lambdas.entries[s]
        ha = _h_pow(a, s)
        hb = _h_pow(b, s)
        if ha > hb * lam:
            cand = (ha - hb * lam) / (ha - hb) * ds
            if cand > db_minus:
                db_minus = cand
                best_s_lower = s
        if hb > ha * lam:
            cand = ha * (lam - 1) / (hb - ha) * ds
            if cand < db_plus:
                db_plus = cand
                best_s_upper = s
    return PairBound(a, b, ds, db_minus, db_plus, best_s_lower, best_s_upper)


def iter_candidate_pairs(params: BoundParams) -> list[tuple[int, int]]:
    """Ordered pairs (a, b) of y-smooth numbers with a*b <= z, canonical order."""
    sm = smooth_numbers(params.y, params.z)
    out: list[tuple[int, int]] = []
    for a in sm:
        cap = params.z // a
        for b in sm:
            if b > cap:
                break
            out.append((a, b))
    return out


def _eval_pair(
    a: int, b: int, spec: ProblemSpec, params: BoundParams, lambdas: LambdaTable
) -> tuple[PairBound, Fraction] | None:
    """One cell: admissibility, both density routes, certified split.

    Returns (PairBound, formula_value) for admissible cells, None otherwise.
    The PairBound always carries the local-oracle density.
    """
    if not admissible(a, b, spec, params.y):
        return None
    local = ds_local(a, b, spec, params)
    formula = ds_formula(a, b, spec, params)
    return pair_bounds(a, b, spec, params, lambdas, ds=local), formula


def _eval_chunk(args) -> list[tuple[PairBound, Fraction] | None]:
    chunk, spec, params, lambdas = args
    return [_eval_pair(a, b, spec, params, lambdas) for a, b in chunk]


def compute_bounds(
    spec: ProblemSpec,
    params: BoundParams,
    workers: int = 1,
    keep_pairs: bool = True,
) -> BoundsReport:
    """Enumerate cells with a*b <= z and aggregate certified bounds.

    lower = sum of db_minus.  upper = sum of db_plus plus the tail
    1 - sum(ds), which charges every unenumerated cell in full.  All sums
    are exact; results are independent of the worker count.
    """
    started = time.perf_counter()
    lambdas = lambda_table(params)
    candidates = iter_candidate_pairs(params)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(candidates) < 64:
        results = [_eval_pair(a, b, spec, params, lambdas) for a, b in candidates]
    else:
        step = -(-len(candidates) // (workers * 4))
        chunks = [
            (candidates[i : i + step], spec, params, lambdas)
            for i in range(0, len(candidates), step)
        ]
        with Pool(workers) as pool:
            results = [r for part in pool.map(_eval_chunk, chunks) for r in part]

    pairs: list[PairBound] = []
    mismatches: list[tuple[int, int, Fraction, Fraction]] = []
    lower = Fraction(0)
    plus_sum = Fraction(0)
    coverage = Fraction(0)
    for res in results:
        if res is None:
            continue
        pb, formula = res
        pairs.append(pb)
        lower += pb.db_minus
        plus_sum += pb.db_plus
        coverage += pb.ds
        if formula != pb.ds:
            mismatches.append((pb.a, pb.b, formula, pb.ds))

    tail = 1 - coverage
    if tail < 0:
        raise ConsistencyError(
            f"enumerated cell mass exceeds 1 by {decimal_str(-tail, rounding='ceil')}"
        )
    upper = plus_sum + tail

    diagnostics = [f"admissible pairs: {len(pairs)} of {len(candidates)} candidates"]
    diagnostics.append(
        f"enumerated db_plus sum before tail: {decimal_str(plus_sum)}"
    )
    if mismatches:
        diagnostics.append(
            f"ds_formula != ds_local on {len(mismatches)} admissible pairs; "
            "the local scan value was used for all of them"
        )
        for a, b, formula, local in mismatches[:3]:
            diagnostics.append(f"  mismatch at (a={a}, b={b}): formula={formula} local={local}")
    if params.lambda_cap != DEFAULT_LAMBDA_CAP:
        diagnostics.append(
            f"lambda_cap={params.lambda_cap} differs from {DEFAULT_LAMBDA_CAP}; "
            "the tail factor is heuristic for this cap"
        )

    return BoundsReport(
        spec=spec,
        params=params,
        lower=lower,
        upper=upper,
        coverage=coverage,
        tail=tail,
        pair_count=len(pairs),
        pairs=tuple(pairs) if keep_pairs else None,
        diagnostics=tuple(diagnostics),
        elapsed_seconds=time.perf_counter() - started,
    )


__all__ = [
    "BoundParams",
    "BoundsReport",
    "ConsistencyError",
    "DEFAULT_LAMBDA_CAP",
    "LambdaTable",
    "PairBound",
    "ProblemSpec",
    "StabilityError",
    "TAIL_EXP_COEFF",
    "ZETA2_UPPER",
    "admissible",
    "compute_bounds",
    "decimal_str",
    "ds_formula",
    "ds_local",
    "iter_candidate_pairs",
    "lambda_table",
    "lambda_upper",
    "pair_bounds",
]
