"""Weil heights, local log-distances from the chordal metric, and canonical
heights with certified error bounds, specialized to Q (every local degree 1).

All heights are natural-log based.  Logs of big integers go through one
uniform primitive, log_int, which uses the top 53-bit window of the integer
plus a bit-length shift and is good to better than 12 significant digits for
every size this package produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .divisibility import is_probable_prime, valuation
from .ratfield import Coefficient, Polynomial, ProjPoint, RationalMap, as_rational

_LN2 = math.log(2)

# Error bounds carry a small additive pad for float rounding in the log
# primitive, so "value +/- error_bound" stays an honest enclosure.
_FLOAT_SLACK = 4e-16


def log_int(n: int) -> float:
    """Natural log of a positive integer of any size."""
    if n <= 0:
        raise ValueError("log_int requires n > 0")
    bits = n.bit_length()
    if bits <= 53:
        return math.log(n)
    shift = bits - 53
    return shift * _LN2 + math.log(n >> shift)


def rational_height(x: Coefficient) -> float:
    """h(x) = log max(|numerator|, denominator) of x in lowest terms."""
    x = as_rational(x)
    return log_int(max(abs(x.numerator), x.denominator))


@dataclass(frozen=True)
class Place:
    """A place of Q: archimedean when prime is None, else the p-adic place."""

    prime: Optional[int] = None

    def __post_init__(self):
        if self.prime is not None:
            if self.prime < 2 or not is_probable_prime(self.prime):
                raise ValueError(f"{self.prime} is not prime")

    @property
    def is_archimedean(self) -> bool:
        return self.prime is None

    @property
    def kind(self) -> str:
        return "archimedean" if self.prime is None else "finite"

    def __str__(self) -> str:
        return "inf" if self.prime is None else str(self.prime)


ARCHIMEDEAN = Place()


class PlaceSet:
    """Finite ordered set of places, always containing the archimedean one."""

    __slots__ = ("places",)

    def __init__(self, places: Iterable[Place] = ()):
        primes = sorted({pl.prime for pl in places if pl.prime is not None})
        object.__setattr__(self, "places", (ARCHIMEDEAN, *(Place(p) for p in primes)))

    def __setattr__(self, name, value):
        raise AttributeError("PlaceSet is immutable")

    @classmethod
    def from_primes(cls, primes: Iterable[int] = ()) -> "PlaceSet":
        return cls(Place(p) for p in primes)

    @property
    def finite_primes(self) -> tuple[int, ...]:
        return tuple(pl.prime for pl in self.places if pl.prime is not None)

    def __iter__(self):
        return iter(self.places)

    def __len__(self) -> int:
        return len(self.places)

    def __contains__(self, place: Place) -> bool:
        return place in self.places

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlaceSet):
            return NotImplemented
        return self.places == other.places

    def __hash__(self) -> int:
        return hash(self.places)

    def __repr__(self) -> str:
        return f"PlaceSet.from_primes({list(self.finite_primes)!r})"


@dataclass(frozen=True)
class HeightEstimate:
    """Canonical-height estimate with a certified error bound.

    truncated marks estimates cut short by the digit budget; their
    error_bound is correspondingly larger than the requested tolerance.
    """

    value: float
    error_bound: float
    truncated: bool = False
    iterations: int = 0

    def __post_init__(self):
        if self.error_bound < 0 or not math.isfinite(self.value):
            raise ValueError("need finite value and error_bound >= 0")


def weil_height(P: ProjPoint) -> float:
    """log max(|x|, |y|) over the coprime coordinates; always >= 0."""
    return log_int(max(abs(P.x), abs(P.y)))


def map_height(phi: Union[RationalMap, Polynomial]) -> float:
    """Projective coefficient height: clear denominators of numerator and
    denominator jointly to a coprime integer vector, return log max |entry|.
    """
    if isinstance(phi, Polynomial):
        phi = RationalMap(phi)
    num, den = phi.integer_coefficients()
    return log_int(max(abs(c) for c in num + den))


def _cross(P: ProjPoint, Q: ProjPoint) -> int:
    return P.x * Q.y - Q.x * P.y


def chordal_metric(P: ProjPoint, Q: ProjPoint, v: Place) -> float:
    """The v-adic projective distance; symmetric, in [0, 1], zero iff P = Q.

    Coprime integer coordinates have unit p-adic max-norm, so at a finite
    place this is just |x1 y2 - x2 y1|_p.
    """
    cross = _cross(P, Q)
    if cross == 0:
        return 0.0
    if v.is_archimedean:
        return math.exp(
            log_int(abs(cross))
            - 0.5 * log_int(P.x * P.x + P.y * P.y)
            - 0.5 * log_int(Q.x * Q.x + Q.y * Q.y)
        )
    return math.exp(-valuation(abs(cross), v.prime) * math.log(v.prime))


def local_log_distance(P: ProjPoint, Q: ProjPoint, v: Place) -> float:
    """-log of the chordal metric, computed directly from logs so huge
    coordinates neither overflow nor underflow; +inf iff P = Q."""
    cross = _cross(P, Q)
    if cross == 0:
        return math.inf
    if v.is_archimedean:
        return (
            0.5 * log_int(P.x * P.x + P.y * P.y)
            + 0.5 * log_int(Q.x * Q.x + Q.y * Q.y)
            - log_int(abs(cross))
        )
    return valuation(abs(cross), v.prime) * math.log(v.prime)


def sum_local_at_infinity(P: ProjPoint, places: PlaceSet) -> float:
    """Sum of local log-distances from P to the point (1, 0) over the places."""
    if P.is_infinity:
        raise ValueError("distance from infinity to itself is undefined")
    inf_pt = ProjPoint.infinity()
    return sum(local_log_distance(P, inf_pt, v) for v in places)


def _is_pure_power_map(phi: Polynomial) -> bool:
    num, den = RationalMap(phi).integer_coefficients()
    return den == (1,) and abs(num[-1]) == 1 and all(c == 0 for c in num[:-1])


def height_comparison_bound(phi: Polynomial) -> float:
    """A finite B with |canonical height - Weil height| <= B everywhere.

    For phi = +/- z^d plain heights are exactly multiplicative along the
    orbit, so B = 0.  Otherwise B = max(C_up, C_low) / (d - 1), telescoped
    from one-step comparison constants for the integer model F = sum b_i
    X^i Y^{d-i}, G = l Y^d of phi (H = max(|b_i|, l), h = log H):

        h(phi(x)) - d h(x) <=  h + log(d + 1)                  =: C_up
        d h(x) - h(phi(x)) <=  log(2d) + (2d-1)(log(d+1)/2 + h) =: C_low

    C_up is the triangle inequality on the d+1 terms of F.  C_low combines
    gcd(F(p,q), G(p,q)) | Res(F, G) with the Bezout identities
    u F + v G = Res * X^(2d-1) (and Y^(2d-1)), whose cofactor coefficients
    are Sylvester-matrix minors bounded by Hadamard's inequality.
    Deliberately conservative; callers may override with a sharper constant.
    """
    d = phi.degree
    if d < 2:
        raise ValueError("height_comparison_bound requires degree >= 2")
    if _is_pure_power_map(phi):
        return 0.0
    h = map_height(phi)
    c_up = h + math.log(d + 1)
    c_low = math.log(2 * d) + (2 * d - 1) * (0.5 * math.log(d + 1) + h)
    return max(c_up, c_low) / (d - 1)


def canonical_height(
    phi: Polynomial,
    P: Coefficient,
    tol: float,
    *,
    bound: Optional[float] = None,
    digit_budget: int = 100_000,
) -> HeightEstimate:
    """Estimate the canonical height of P under phi as h(phi^N(P)) / d^N.

    N is the least iterate count with B / d^N <= tol, where B is the
    comparison bound (or the caller's override).  If an orbit value would
    exceed digit_budget decimal digits first, the partial estimate is
    returned with its larger certified error bound and truncated set.
    """
    d = phi.degree
    if d < 2:
        raise ValueError("canonical_height requires degree >= 2")
    if tol <= 0:
        raise ValueError("tol must be positive")
    B = height_comparison_bound(phi) if bound is None else float(bound)
    if B < 0:
        raise ValueError("comparison bound must be >= 0")

    target = 0
    tail = B
    while tail > tol:
        tail /= d
        target += 1

    x = as_rational(P)
    steps = 0
    truncated = False
    bit_budget = int(digit_budget / 0.30102999566398120) + 1
    while steps < target:
        nxt = phi(x)
        if max(nxt.numerator.bit_length(), nxt.denominator.bit_length()) > bit_budget:
            truncated = True
            break
        x = nxt
        steps += 1

    value = rational_height(x) / d**steps
    error = B / d**steps + _FLOAT_SLACK * (1.0 + abs(value))
    return HeightEstimate(value=value, error_bound=error, truncated=truncated, iterations=steps)
