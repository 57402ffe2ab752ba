"""Budgeted integer factorization, valuations, primitive parts, and the
rigid-divisibility verifier.

Factorization never fails: whatever the budget cannot split is carried as a
composite cofactor, and downstream checks treat those cofactors as untested
rather than as passes.  Primitive/non-primitive part extraction is pure
gcd-stripping and needs no factorization at all, so it works on terms with
hundreds of thousands of digits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt, prod
from typing import TYPE_CHECKING, Iterable, MutableMapping, Optional

if TYPE_CHECKING:
    from .heights import PlaceSet

# Deterministic Miller-Rabin witness set: proves primality below
# 3,317,044,064,679,887,385,961,981; above that the same witnesses plus the
# primes up to 100 give a fixed, documented probabilistic test.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_EXTRA_BASES = (41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin primality test, deterministic below ~3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES if n < _MR_DETERMINISTIC_LIMIT else _MR_BASES + _MR_EXTRA_BASES
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=8)
def _primes_below(bound: int) -> tuple[int, ...]:
    if bound < 3:
        return (2,) if bound == 2 else ()
    sieve = bytearray([1]) * bound
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(bound - 1) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, bound, p)))
    return tuple(i for i, alive in enumerate(sieve) if alive)


_CHUNK = 1024


@lru_cache(maxsize=8)
def _prime_chunks(bound: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Primes below bound grouped into chunks with their products, for
    gcd-based trial division of very large integers."""
    primes = _primes_below(bound)
    out = []
    for i in range(0, len(primes), _CHUNK):
        group = primes[i : i + _CHUNK]
        out.append((group, prod(group)))
    return tuple(out)


@dataclass(frozen=True)
class FactorBudget:
    """Effort limits for factor(); results are deterministic given the seed.

    rho_digit_limit caps the size of composites handed to primality testing
    and Pollard-Brent; larger leftovers stay in the cofactor.
    """

    trial_bound: int = 1_000_000
    rho_rounds: int = 200_000
    rho_digit_limit: int = 300
    seed: int = 1


DEFAULT_BUDGET = FactorBudget()


@dataclass
class Factorization:
    """factors maps primes to exponents; cofactor is the unfactored remainder
    (1 when complete).  prod(p^e) * cofactor always reconstructs the input.
    """

    factors: dict[int, int] = field(default_factory=dict)
    cofactor: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def reconstruct(self) -> int:
        return prod(p**e for p, e in self.factors.items()) * self.cofactor

    def primes(self) -> tuple[int, ...]:
        return tuple(sorted(self.factors))


def decimal_digits(n: int) -> int:
    """Exact count of decimal digits of |n| without building the string."""
    n = abs(n)
    if n == 0:
        return 1
    approx = int(n.bit_length() * 0.30102999566398120) + 1
    while 10 ** (approx - 1) > n:
        approx -= 1
    while 10**approx <= n:
        approx += 1
    return approx


def _brent_rho(n: int, rounds: int, seed: int) -> int:
    """Deterministic Brent-rho campaign; returns a nontrivial factor of the odd
    composite n, or 1 once the iteration budget is spent."""
    rng = random.Random(f"{seed}:{n % (1 << 64)}")
    spent = 0
    while spent < rounds:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1 and spent < rounds:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            spent += r
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(m, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += steps
                spent += steps
            r *= 2
        if g == n:
            # the batched gcd overshot; replay one step at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
        # retry with fresh parameters until the budget runs out
    return 1


def factor(
    n: int,
    budget: FactorBudget = DEFAULT_BUDGET,
    cache: Optional[MutableMapping[int, "Factorization"]] = None,
) -> Factorization:
    """Factor n >= 1 within the given budget.

    Trial division runs to budget.trial_bound (gcd-chunked for huge inputs),
    then Miller-Rabin and Pollard-Brent handle what is small enough per
    rho_digit_limit.  Budget exhaustion is expressed through the cofactor,
    never raised.
    """
    if n < 1:
        raise ValueError("factor requires n >= 1")
    if cache is not None:
        hit = cache.get(n)
        if hit is not None and hit.complete:
            return Factorization(dict(hit.factors), hit.cofactor)
    result = _factor_uncached(n, budget)
    if cache is not None:
        cache[n] = Factorization(dict(result.factors), result.cofactor)
    return result


def _trial_by_chunks(m: int, bound: int) -> tuple[dict[int, int], int]:
    """Strip every prime factor below bound from m via chunked gcds; stops
    early once the scanned primes certify the remainder prime."""
    found: dict[int, int] = {}
    for group, product in _prime_chunks(bound):
        if m == 1:
            break
        g = gcd(m, product)
        if g > 1:
            for p in group:
                if g % p == 0:
                    e = 0
                    while m % p == 0:
                        e += 1
                        m //= p
                    found[p] = e
        if group[-1] * group[-1] > m:
            break
    return found, m


def _factor_uncached(n: int, budget: FactorBudget) -> Factorization:
    factors: dict[int, int] = {}
    if n == 1:
        return Factorization(factors, 1)

    # quick pass over the small primes with the classic early exit
    rest = n
    small_bound = min(10_000, budget.trial_bound)
    for p in _primes_below(small_bound):
        if p * p > rest:
            break
        while rest % p == 0:
            factors[p] = factors.get(p, 0) + 1
            rest //= p
    if rest == 1:
        return Factorization(dict(sorted(factors.items())), 1)
    if rest < small_bound * small_bound:
        factors[rest] = factors.get(rest, 0) + 1
        return Factorization(dict(sorted(factors.items())), 1)

    # queue entries carry whether trial division already ran to the full bound
    cofactor = 1
    queue: list[tuple[int, bool]] = [(rest, small_bound >= budget.trial_bound)]
    while queue:
        m, fully_trialed = queue.pop()
        if m == 1:
            continue
        if decimal_digits(m) > budget.rho_digit_limit:
            if not fully_trialed:
                found, m = _trial_by_chunks(m, budget.trial_bound)
                for p, e in found.items():
                    factors[p] = factors.get(p, 0) + e
                if m > 1:
                    queue.append((m, True))
                continue
            cofactor *= m
            continue
        if is_probable_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        if not fully_trialed:
            found, m = _trial_by_chunks(m, budget.trial_bound)
            for p, e in found.items():
                factors[p] = factors.get(p, 0) + e
            if m > 1:
                queue.append((m, True))
            continue
        d = _brent_rho(m, budget.rho_rounds, budget.seed)
        if d == 1:
            cofactor *= m
        else:
            queue.append((d, True))
            queue.append((m // d, True))
    return Factorization(dict(sorted(factors.items())), cofactor)


def ideal_pair(x: Fraction | int | str) -> "IdealPair":
    """Numerator/denominator ideal pair (|num|, den) of x in lowest terms."""
    x = Fraction(x)
    return IdealPair(abs(x.numerator), x.denominator)


@dataclass(frozen=True)
class IdealPair:
    """Coprime unsigned integer pair: numerator ideal A, denominator ideal B."""

    A: int
    B: int

    def __post_init__(self):
        if self.A < 0 or self.B < 1:
            raise ValueError("require A >= 0 and B >= 1")
        if gcd(self.A, self.B) != 1:
            raise ValueError("A and B must be coprime")


def valuation(n: int, p: int) -> int:
    """Largest e with p^e | n (n >= 1, p >= 2)."""
    if n < 1:
        raise ValueError("valuation requires n >= 1")
    if p < 2:
        raise ValueError("valuation requires p >= 2")
    e = 0
    while n % p == 0:
        e += 1
        n //= p
    return e


def prime_to_s_norm(A: int, S: "PlaceSet") -> int:
    """A with every finite prime of S divided out completely."""
    if A < 1:
        raise ValueError("prime_to_s_norm requires A >= 1")
    for p in S.finite_primes:
        while A % p == 0:
            A //= p
    return A


@dataclass(frozen=True)
class PrimitiveSplit:
    """A_n = primitive_part * nonprimitive_part, where the primitive part is
    coprime to every earlier term and the non-primitive part collects the
    primes already seen."""

    primitive_part: int
    nonprimitive_part: int


def primitive_split(A_n: int, history: Iterable[int]) -> PrimitiveSplit:
    """Split A_n by gcd-stripping against history; no factorization needed.

    Every prime shared with history is removed at its full multiplicity,
    because repeated gcds with the sharing term keep extracting it until the
    running value is coprime to that term.
    """
    if A_n < 1:
        raise ValueError("primitive_split requires A_n >= 1")
    current = A_n
    for prior in history:
        if prior < 1:
            raise ValueError("history terms must be >= 1")
        g = gcd(current, prior)
        while g > 1:
            current //= g
            g = gcd(current, prior)
    return PrimitiveSplit(current, A_n // current)


def has_primitive_divisor(A_n: int, history: Iterable[int]) -> bool:
    """True iff some prime of A_n divides no earlier term."""
    return primitive_split(A_n, history).primitive_part > 1


@dataclass(frozen=True)
class RigidViolation:
    condition: int  # 1 = gcd condition, 2 = constant valuation along multiples
    prime: int
    indices: tuple[int, ...]
    valuations: tuple[int, ...]


@dataclass
class RigidReport:
    verified: bool
    checked_pairs: int
    untested_primes: list[int]
    violations: list[RigidViolation]


def rigid_check(
    sequence: list[int],
    S: "PlaceSet",
    budget: FactorBudget = DEFAULT_BUDGET,
    cache: Optional[MutableMapping[int, Factorization]] = None,
) -> RigidReport:
    """Verify the rigid-divisibility conditions for every prime outside S that
    budget-limited factorization of the terms exposes.

    Condition 1: p | gcd(a_m, a_n) implies p | a_{gcd(m, n)}.
    Condition 2: ord_p(a_m) > 0 implies ord_p(a_{km}) = ord_p(a_m) for all km
    in range.  Composite cofactors left by the budget are reported as
    untested, never as passes.
    """
    if any(t < 1 for t in sequence):
        raise ValueError("rigid_check requires all terms >= 1")
    N = len(sequence)
    skip = set(S.finite_primes)
    primes: set[int] = set()
    untested: list[int] = []
    for term in sequence:
        fac = factor(term, budget, cache)
        primes.update(p for p in fac.factors if p not in skip)
        if not fac.complete:
            untested.append(fac.cofactor)

    vals = {p: [valuation(t, p) for t in sequence] for p in sorted(primes)}
    violations: list[RigidViolation] = []
    checked_pairs = 0
    for m in range(1, N + 1):
        for n in range(m + 1, N + 1):
            checked_pairs += 1
            g = gcd(m, n)
            for p, v in vals.items():
                if v[m - 1] > 0 and v[n - 1] > 0 and v[g - 1] == 0:
                    violations.append(
                        RigidViolation(1, p, (m, n, g), (v[m - 1], v[n - 1], v[g - 1]))
                    )
    for p, v in vals.items():
        for m in range(1, N + 1):
            if v[m - 1] == 0:
                continue
            for k in range(2, N // m + 1):
                if v[k * m - 1] != v[m - 1]:
                    violations.append(
                        RigidViolation(2, p, (m, k * m), (v[m - 1], v[k * m - 1]))
                    )
    return RigidReport(
        verified=not violations,
        checked_pairs=checked_pairs,
        untested_primes=sorted(set(untested)),
        violations=violations,
    )


def nonprimitive_bound_check(n: int, splits: list[PrimitiveSplit], S: "PlaceSet") -> bool:
    """Exact check that the prime-to-S norm of the non-primitive part of term n
    is at most that of the product of primitive parts over proper divisors."""
    if n < 2:
        raise ValueError("nonprimitive_bound_check requires n >= 2")
    if len(splits) < n:
        raise ValueError("splits for indices 1..n are required")
    lhs = prime_to_s_norm(splits[n - 1].nonprimitive_part, S)
    product = prod(splits[i - 1].primitive_part for i in range(1, n) if n % i == 0)
    return lhs <= prime_to_s_norm(product, S)
