"""Orbit divisibility sequences, Zsigmondy sets, the explicit size bound with
its exceptional-index enumerations, and the powerful-polynomial machinery.

Sequences are built by exact iteration of the centered map (the input map
conjugated so the starting point sits at 0); primitive parts come from
gcd-stripping, so no factorization is ever needed to decide membership in
the Zsigmondy set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .divisibility import (
    DEFAULT_BUDGET,
    FactorBudget,
    IdealPair,
    PrimitiveSplit,
    factor,
    ideal_pair,
    primitive_split,
    prime_to_s_norm,
    valuation,
)
from .heights import (
    HeightEstimate,
    PlaceSet,
    canonical_height,
    height_comparison_bound,
    log_int,
    rational_height,
    sum_local_at_infinity,
)
from .ratfield import (
    Coefficient,
    Polynomial,
    ProjPoint,
    as_rational,
    conjugate,
    is_powerful,
    squarefree_decomposition,
)

_DIGIT_TO_BITS = 1 / 0.30102999566398120


class PreperiodicPoint(Exception):
    """Raised when an orbit construction finds a finite forward orbit."""

    def __init__(self, message: str, index: int, partial=None):
        super().__init__(message)
        self.index = index
        self.partial = partial


class DigitBudgetExceeded(Exception):
    """Raised when an orbit value outgrows the configured digit budget; the
    partial result built so far rides along."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class HypothesisViolated(Exception):
    """Raised when an input fails a stated hypothesis; .reason is machine-readable."""

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


@dataclass(frozen=True)
class OrbitRecord:
    n: int
    value: Fraction
    ideal: IdealPair
    split: PrimitiveSplit
    primitive: bool


@dataclass
class OrbitSequence:
    """Exact orbit data for phi iterated at alpha, recorded per index n >= 1.

    records[n-1].value equals centered^n(0) = phi^n(alpha) - alpha.
    """

    phi: Polynomial
    alpha: Fraction
    centered: Polynomial
    records: list[OrbitRecord] = field(default_factory=list)

    @property
    def degree(self) -> int:
        return self.phi.degree

    def __len__(self) -> int:
        return len(self.records)

    def record(self, n: int) -> OrbitRecord:
        if not 1 <= n <= len(self.records):
            raise IndexError(f"record {n} not computed (have {len(self.records)})")
        return self.records[n - 1]

    def terms(self) -> list[int]:
        """The numerator-ideal sequence A_1, A_2, ..."""
        return [rec.ideal.A for rec in self.records]


def build_sequence(
    phi: Polynomial,
    alpha: Coefficient,
    N: int,
    digit_budget: int = 100_000,
) -> OrbitSequence:
    """Populate records 1..N by exact iteration of the centered map at 0.

    Raises PreperiodicPoint if an orbit value returns to 0 or repeats, and
    DigitBudgetExceeded (carrying the partial sequence) if a value outgrows
    the budget.
    """
    if phi.degree < 2:
        raise ValueError("build_sequence requires degree >= 2")
    if N < 1:
        raise ValueError("build_sequence requires N >= 1")
    alpha = as_rational(alpha)
    centered = conjugate(phi, alpha)
    seq = OrbitSequence(phi=phi, alpha=alpha, centered=centered, records=[])
    bit_budget = int(digit_budget * _DIGIT_TO_BITS) + 1

    seen = {Fraction(0)}
    history: list[int] = []
    x = Fraction(0)
    for n in range(1, N + 1):
        x = centered(x)
        if x == 0:
            raise PreperiodicPoint(f"orbit returns to the start at step {n}", n, seq)
        if x in seen:
            raise PreperiodicPoint(f"orbit value repeats at step {n}", n, seq)
        seen.add(x)
        if max(x.numerator.bit_length(), x.denominator.bit_length()) > bit_budget:
            raise DigitBudgetExceeded(
                f"orbit value at step {n} exceeds {digit_budget} digits", seq
            )
        pair = ideal_pair(x)
        split = primitive_split(pair.A, history)
        seq.records.append(
            OrbitRecord(
                n=n,
                value=x,
                ideal=pair,
                split=split,
                primitive=split.primitive_part > 1,
            )
        )
        history.append(pair.A)
    return seq


def zsigmondy_set(seq: OrbitSequence, N: int) -> set[int]:
    """Indices n <= N whose term has no primitive prime divisor."""
    if len(seq.records) < N:
        raise ValueError(f"sequence has {len(seq.records)} records, need {N}")
    return {n for n in range(1, N + 1) if not seq.records[n - 1].primitive}


def wandering_verdict(
    phi: Polynomial,
    alpha: Coefficient,
    probe: int = 32,
    tol: float = 1e-3,
) -> str:
    """Classify alpha as 'wandering', 'preperiodic', or 'unknown'.

    A repeated value within the probe window is an exact preperiodic verdict.
    Two exact wandering verdicts cut the probe short: an orbit value beyond
    the escape radius (the absolute value then grows strictly forever), or a
    Weil height above the comparison bound (preperiodic orbit values all have
    canonical height 0, hence Weil height at most that bound).  Otherwise a
    positive canonical-height estimate net of its error bound decides, and
    failing that the verdict is unknown.
    """
    if phi.degree < 2:
        raise ValueError("wandering_verdict requires degree >= 2")
    lead = abs(phi.coeffs[-1])
    tail_sum = sum(abs(c) for c in phi.coeffs[:-1])
    escape = max(Fraction(1), (1 + tail_sum) / lead)
    height_ceiling = height_comparison_bound(phi) + 1.0

    x = as_rational(alpha)
    seen = {x}
    for _ in range(max(1, probe)):
        x = phi(x)
        if x in seen:
            return "preperiodic"
        seen.add(x)
        if abs(x) > escape or rational_height(x) > height_ceiling:
            return "wandering"
    est = canonical_height(phi, alpha, tol)
    if est.value - est.error_bound > 0:
        return "wandering"
    return "unknown"


# ---------------------------------------------------------------------------
# Explicit bound on the size of the Zsigmondy set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundInputs:
    """Parameters of the explicit bound.

    comparison_bound plays the role of the height-comparison constant for the
    centered map; gamma is the non-constructive local-distance constant and
    must be supplied by the caller (it depends only on the degree over Q).
    h_map is informational (the formula consumes it only through
    comparison_bound).
    """

    d: int
    h_reversed: float
    hhat0: float
    comparison_bound: float
    gamma: float
    s_size: int
    h_map: float = 0.0

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("bound requires degree >= 3")
        if not (self.hhat0 > 0):
            raise ValueError("bound requires a positive canonical height at 0")
        if self.comparison_bound < 0:
            raise ValueError("comparison bound must be >= 0")
        if not (self.gamma > 0):
            raise ValueError("gamma must be positive")
        if self.s_size < 1:
            raise ValueError("s_size must be >= 1")
        for v in (self.h_map, self.h_reversed, self.hhat0, self.comparison_bound, self.gamma):
            if not math.isfinite(v):
                raise ValueError("bound inputs must be finite")


@dataclass(frozen=True)
class BoundBreakdown:
    """The four summands of the explicit bound and the two index sets that
    can be enumerated exactly; total is their sum."""

    startup_term: float
    history_term: float
    proximity_gamma_term: float
    proximity_log_term: float
    total: float
    startup_set: frozenset[int]
    history_set: frozenset[int]
    history_scan_limit: int
    startup_zero_predicate: bool
    history_zero_predicate: bool


def startup_threshold(d: int, comparison_bound: float, hhat0: float) -> float:
    """log_d max(1, 8 B / hhat0): indices at or below it form the startup set."""
    if d < 2 or hhat0 <= 0:
        raise ValueError("need d >= 2 and hhat0 > 0")
    ratio = 8.0 * comparison_bound / hhat0
    if ratio <= 1.0:
        return 0.0
    return math.log(ratio) / math.log(d)


def startup_predicate(d: int, comparison_bound: float, hhat0: float, n: int) -> bool:
    return n <= startup_threshold(d, comparison_bound, hhat0)


def startup_indices(d: int, comparison_bound: float, hhat0: float) -> frozenset[int]:
    """All n >= 1 with n <= the startup threshold, enumerated exactly."""
    return frozenset(range(1, math.floor(startup_threshold(d, comparison_bound, hhat0)) + 1))


def history_predicate(d: int, comparison_bound: float, hhat0: float, n: int) -> bool:
    """True when the worst-case size of terms 1..n-1 is not yet dominated by
    3/4 of the canonical growth of term n."""
    if d < 3 or hhat0 <= 0:
        raise ValueError("need d >= 3 and hhat0 > 0")
    decay = float(d) ** (1 - n)  # underflows to 0.0 for large n, harmlessly
    lhs = (n - 1) * comparison_bound * decay / d + hhat0 * (1.0 - decay) / (d - 1)
    return lhs >= 0.75 * hhat0


def history_cardinality_bound(d: int, comparison_bound: float, hhat0: float) -> float:
    """Closed-form cap on how many indices can satisfy the history predicate."""
    if d < 3 or hhat0 <= 0:
        raise ValueError("need d >= 3 and hhat0 > 0")
    return 1.0 + 8.0 * comparison_bound / ((3 * d - 7) * hhat0)


def history_indices(
    d: int, comparison_bound: float, hhat0: float, n_max: int
) -> frozenset[int]:
    """Exact membership scan of the history predicate over 1 <= n <= n_max.

    Warns if the predicate still holds at n_max, i.e. the window truncated
    the set."""
    members = frozenset(
        n for n in range(1, n_max + 1) if history_predicate(d, comparison_bound, hhat0, n)
    )
    if n_max >= 1 and history_predicate(d, comparison_bound, hhat0, n_max):
        import warnings

        warnings.warn(
            f"history predicate still holds at n_max={n_max}; scan window too small",
            stacklevel=2,
        )
    return members


def _history_window(d: int, comparison_bound: float, hhat0: float) -> int:
    """A scan limit provably past the last history-predicate member.

    For n >= 2 the predicate forces (n-1) d^(1-n) >= d*hhat0/(4B), whose left
    side is decreasing in n, so the first n where it fails bounds the set.
    """
    if comparison_bound == 0:
        return 8
    window = 8
    bar = d * hhat0 / (4.0 * comparison_bound)
    while (window - 1) * float(d) ** (1 - window) >= bar and window < (1 << 22):
        window *= 2
    return window


def zsigmondy_bound(inputs: BoundInputs) -> BoundBreakdown:
    """Evaluate the explicit bound on the Zsigmondy-set size.

    total = startup + history + gamma proximity + reversed-height proximity,
    with the startup and history index sets enumerated exactly alongside.
    """
    d = inputs.d
    B = inputs.comparison_bound
    h0 = inputs.hhat0
    startup_term = startup_threshold(d, B, h0)
    history_term = history_cardinality_bound(d, B, h0)
    proximity_gamma_term = (4.0**inputs.s_size) * inputs.gamma
    proximity_log_term = math.log(inputs.h_reversed / h0 + 1.0) / math.log(d)
    total = startup_term + history_term + proximity_gamma_term + proximity_log_term

    window = _history_window(d, B, h0)
    history_set = frozenset(
        n for n in range(1, window + 1) if history_predicate(d, B, h0, n)
    )
    return BoundBreakdown(
        startup_term=startup_term,
        history_term=history_term,
        proximity_gamma_term=proximity_gamma_term,
        proximity_log_term=proximity_log_term,
        total=total,
        startup_set=startup_indices(d, B, h0),
        history_set=history_set,
        history_scan_limit=window,
        startup_zero_predicate=startup_predicate(d, B, h0, 0),
        history_zero_predicate=history_predicate(d, B, h0, 0),
    )


# ---------------------------------------------------------------------------
# Per-index inequality checks on computed sequences
# ---------------------------------------------------------------------------


def _hhat0_for(seq: OrbitSequence, hhat0: Optional[HeightEstimate]) -> HeightEstimate:
    if hhat0 is not None:
        return hhat0
    return canonical_height(seq.centered, 0, 1e-6)


def _close_approach_sum(seq: OrbitSequence, n: int, places: PlaceSet) -> float:
    rec = seq.record(n)
    return sum_local_at_infinity(ProjPoint.from_value(rec.value), places)


def is_close_approach(
    seq: OrbitSequence,
    n: int,
    places: PlaceSet,
    hhat0: Optional[HeightEstimate] = None,
) -> bool:
    """True when the local log-distance sum to the starting point at the given
    places reaches 1/8 of the canonical growth d^n * hhat0.

    Comparisons near the boundary use the estimate's error bound pessimistically,
    so an ambiguous index is reported as a close approach (see
    close_approach_ambiguous to detect that case)."""
    hhat0 = _hhat0_for(seq, hhat0)
    lam = _close_approach_sum(seq, n, places)
    low = (hhat0.value - hhat0.error_bound) * seq.degree**n / 8.0
    return lam >= low


def close_approach_ambiguous(
    seq: OrbitSequence,
    n: int,
    places: PlaceSet,
    hhat0: Optional[HeightEstimate] = None,
) -> bool:
    """True when the close-approach comparison falls inside the error band."""
    hhat0 = _hhat0_for(seq, hhat0)
    lam = _close_approach_sum(seq, n, places)
    low = (hhat0.value - hhat0.error_bound) * seq.degree**n / 8.0
    high = (hhat0.value + hhat0.error_bound) * seq.degree**n / 8.0
    return low <= lam < high


def check_term_upper_bound(
    seq: OrbitSequence,
    n: int,
    comparison_bound: float,
    hhat0: Optional[HeightEstimate] = None,
) -> bool:
    """Check log A_n <= d^n * hhat0 + B, with the height estimate's error bound
    applied in the direction that avoids spurious failures."""
    hhat0 = _hhat0_for(seq, hhat0)
    rec = seq.record(n)
    rhs = seq.degree**n * (hhat0.value + hhat0.error_bound) + comparison_bound
    return log_int(rec.ideal.A) <= rhs + 1e-12 * max(1.0, abs(rhs))


def check_term_lower_bound(
    seq: OrbitSequence,
    n: int,
    places: PlaceSet,
    comparison_bound: float,
    gamma_free: bool = True,
    hhat0: Optional[HeightEstimate] = None,
) -> bool:
    """Check (3/4) * hhat0 * d^n < log of the prime-to-S norm of A_n for
    indices outside the startup set and the empirical close-approach set.

    gamma_free=True (the default) excludes close-approach indices by their
    exact empirical test, keeping the check independent of the
    non-constructive gamma constant.  gamma_free=False drops that exclusion
    and applies the core inequality to every index outside the startup set,
    which is a strictly harsher diagnostic.
    """
    hhat0 = _hhat0_for(seq, hhat0)
    h_low = max(hhat0.value - hhat0.error_bound, 1e-15)
    if startup_predicate(seq.degree, comparison_bound, h_low, n):
        return True
    if gamma_free and is_close_approach(seq, n, places, hhat0):
        return True
    rec = seq.record(n)
    norm = prime_to_s_norm(rec.ideal.A, places)
    lhs = 0.75 * h_low * seq.degree**n
    return lhs < log_int(norm) + 1e-12 * max(1.0, lhs)


# ---------------------------------------------------------------------------
# Powerful polynomials and the product family
# ---------------------------------------------------------------------------


def denominator_place_set(factors: list[Polynomial]) -> PlaceSet:
    """The archimedean place plus every prime dividing a coefficient
    denominator of any factor; just the archimedean place for integer
    coefficients."""
    if not factors:
        raise ValueError("need at least one factor")
    primes: set[int] = set()
    for f in factors:
        for c in f.coeffs:
            den = c.denominator
            if den > 1:
                fac = factor(den)
                if not fac.complete:
                    raise ValueError(f"cannot fully factor coefficient denominator {den}")
                primes.update(fac.factors)
    return PlaceSet.from_primes(primes)


@dataclass(frozen=True)
class FamilyFactor:
    """One factor (z * inner(z) + offset)^exponent of the product family."""

    inner: Polynomial
    offset: int
    exponent: int

    def base(self) -> Polynomial:
        return Polynomial.identity() * self.inner + Polynomial.constant(self.offset)


@dataclass(frozen=True)
class FamilySpec:
    factors: tuple[FamilyFactor, ...]

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def max_exponent(self) -> int:
        return max(f.exponent for f in self.factors)

    def offsets(self) -> tuple[int, ...]:
        return tuple(f.offset for f in self.factors)


def _has_integer_root(f: Polynomial) -> bool:
    """Exact integer-root test: candidates are divisors of the constant term."""
    if f.is_zero:
        return True
    if any(c.denominator != 1 for c in f.coeffs):
        return False  # non-integer coefficients are rejected separately
    if f.degree == 0:
        return False
    c0 = f(0)
    if c0 == 0:
        return True
    c0 = abs(int(c0))
    fac = factor(c0)
    if not fac.complete:
        raise ValueError(f"cannot enumerate divisors of constant term {c0}")
    divisors = [1]
    for p, e in fac.factors.items():
        divisors = [dv * p**k for dv in divisors for k in range(e + 1)]
    return any(f(dv) == 0 or f(-dv) == 0 for dv in divisors)


def family_build(spec: FamilySpec) -> Polynomial:
    """Validate the product-family hypotheses and return the expanded map.

    Raises HypothesisViolated naming the failed condition: fewer than two
    factors, an exponent below 2, every offset of absolute value <= 1, a
    factor with non-integer coefficients, or a factor with an integer root.
    """
    if spec.m < 2:
        raise HypothesisViolated("m < 2", "the family needs at least two factors")
    for i, fct in enumerate(spec.factors, 1):
        if fct.exponent < 2:
            raise HypothesisViolated(
                f"exponent e_{i} < 2", f"factor {i} has exponent {fct.exponent}"
            )
        if any(c.denominator != 1 for c in fct.inner.coeffs):
            raise HypothesisViolated(
                f"f_{i} not integral", f"factor {i} has non-integer coefficients"
            )
        if _has_integer_root(fct.inner):
            raise HypothesisViolated(
                f"f_{i} has an integer root", f"factor {i} admits an integer root"
            )
    if all(abs(fct.offset) <= 1 for fct in spec.factors):
        raise HypothesisViolated(
            "all |a_i| <= 1", "some offset must have absolute value >= 2"
        )
    result = Polynomial.one()
    for fct in spec.factors:
        result = result * fct.base() ** fct.exponent
    return result


def fixed_or_wandering(spec: FamilySpec) -> str:
    """'fixed' iff the map of the (validated) spec fixes 0, i.e. some offset
    is zero; 'wandering' otherwise."""
    return "fixed" if any(a == 0 for a in spec.offsets()) else "wandering"


@dataclass
class GrowthReport:
    """Outcome of the doubling-growth and exponent-floor checks on the orbit
    of 0 under a product-family map."""

    passed: bool
    square_growth_ok: bool
    exponent_floor_ok: bool
    first_term: int
    orbit_digits: list[int]
    exponent_floors: list[Fraction]

    def __bool__(self) -> bool:
        return self.passed


def _int_orbit(phi: Polynomial, N: int, digit_budget: int) -> list[int]:
    """Orbit of 0 under an integer-coefficient map, as exact ints."""
    coeffs = [int(c) for c in phi.coeffs]
    bit_budget = int(digit_budget * _DIGIT_TO_BITS) + 1
    orbit = []
    x = 0
    for n in range(1, N + 1):
        acc = 0
        for c in reversed(coeffs):
            acc = acc * x + c
        x = acc
        if x.bit_length() > bit_budget:
            raise DigitBudgetExceeded(
                f"orbit value at step {n} exceeds {digit_budget} digits", orbit
            )
        orbit.append(x)
    return orbit


def growth_check(spec: FamilySpec, N: int, digit_budget: int = 100_000) -> GrowthReport:
    """Verify |phi^n(0)| > |phi^(n-1)(0)|^2 for 2 <= n <= N with
    |phi(0)|^2 >= 4, and the exponent floor |phi^n(0)| >= max|a_j|^alpha_n
    with alpha_n = (2^n (m-1) m^(n-1) + 2m) / (2m - 1), all in exact integers.
    """
    if fixed_or_wandering(spec) != "wandering":
        raise HypothesisViolated("0 is fixed", "growth requires 0 to wander")
    phi = family_build(spec)
    orbit = _int_orbit(phi, N, digit_budget)
    m = spec.m
    biggest_offset = max(abs(a) for a in spec.offsets())

    square_ok = orbit[0] ** 2 >= 4
    for n in range(2, N + 1):
        if abs(orbit[n - 1]) <= orbit[n - 2] ** 2:
            square_ok = False
            break

    floors: list[Fraction] = []
    floor_ok = True
    for n in range(1, N + 1):
        exp_num = 2**n * (m - 1) * m ** (n - 1) + 2 * m
        floors.append(Fraction(exp_num, 2 * m - 1))
        if abs(orbit[n - 1]) ** (2 * m - 1) < biggest_offset**exp_num:
            floor_ok = False

    digits = [len(str(abs(v))) if v.bit_length() < 10_000 else _approx_digits(v) for v in orbit]
    return GrowthReport(
        passed=square_ok and floor_ok,
        square_growth_ok=square_ok,
        exponent_floor_ok=floor_ok,
        first_term=orbit[0],
        orbit_digits=digits,
        exponent_floors=floors,
    )


def _approx_digits(n: int) -> int:
    return int(abs(n).bit_length() * 0.30102999566398120) + 1


@dataclass(frozen=True)
class StabilityFailure:
    kind: str  # "valuation", "derivative", "denominator"
    prime: int
    index: int
    expected: int
    got: int


@dataclass
class ValuationStabilityReport:
    """Per-prime rank-of-apparition structure of the orbit numerators.

    ranks maps each discovered prime outside S to its first index of
    appearance; failures lists every index where the valuation pattern or
    the derivative-power divisibility breaks; untested_cofactors are
    composite leftovers the factoring budget could not split."""

    terms_checked: int
    ranks: dict[int, int]
    failures: list[StabilityFailure]
    untested_cofactors: list[int]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


def valuation_stability_check(
    phi: Polynomial,
    S: PlaceSet,
    N: int,
    budget: FactorBudget = DEFAULT_BUDGET,
    digit_budget: int = 100_000,
    cache=None,
) -> ValuationStabilityReport:
    """For every prime p outside S exposed by budget-limited factorization of
    the orbit numerators: verify the valuation is constant along multiples of
    the rank r, zero off multiples of r, and that the rank term divides the
    E-th power of the derivative at the previous orbit value (E = the largest
    multiplicity in the squarefree decomposition).

    Failures are listed, never raised; primes hidden in unfactored cofactors
    are reported as untested.
    """
    if not is_powerful(phi):
        raise HypothesisViolated("map is not powerful")
    E = max(mult for _, mult in squarefree_decomposition(phi))

    bit_budget = int(digit_budget * _DIGIT_TO_BITS) + 1
    values: list[Fraction] = []
    x = Fraction(0)
    seen = {x}
    for n in range(1, N + 1):
        x = phi(x)
        if x == 0 or x in seen:
            raise HypothesisViolated("0 is preperiodic")
        seen.add(x)
        if max(x.numerator.bit_length(), x.denominator.bit_length()) > bit_budget:
            raise DigitBudgetExceeded(f"orbit value at step {n} exceeds {digit_budget} digits", values)
        values.append(x)

    skip = set(S.finite_primes)
    failures: list[StabilityFailure] = []
    untested: list[int] = []
    discovered: set[int] = set()
    terms = []
    for n, v in enumerate(values, 1):
        # denominators must be supported inside S
        den = v.denominator
        for p in skip:
            while den % p == 0:
                den //= p
        if den != 1:
            failures.append(StabilityFailure("denominator", 0, n, 1, den))
        A = abs(v.numerator)
        terms.append(A)
        fac = factor(A, budget, cache)
        discovered.update(p for p in fac.factors if p not in skip)
        if not fac.complete:
            untested.append(fac.cofactor)

    vals = {p: [valuation(t, p) for t in terms] for p in sorted(discovered)}
    ranks: dict[int, int] = {}
    for p, v in vals.items():
        r = next(n for n in range(1, N + 1) if v[n - 1] > 0)
        ranks[p] = r
        for n in range(1, N + 1):
            expected = v[r - 1] if n % r == 0 else 0
            if v[n - 1] != expected:
                failures.append(StabilityFailure("valuation", p, n, expected, v[n - 1]))

    # every term must divide the E-th derivative power at its predecessor in
    # S-integers: away from S, the reduced quotient may keep no denominator
    # primes.  Exact and factorization-free, so it covers every index as a
    # potential rank, including primes the budget never exposed.
    dphi = phi.derivative()
    for r in range(1, N + 1):
        prev = values[r - 2] if r >= 2 else Fraction(0)
        dval = dphi(prev)
        if dval == 0:
            continue  # zero is divisible by everything
        quotient = dval**E / values[r - 1]
        residue = quotient.denominator
        for p in skip:
            while residue % p == 0:
                residue //= p
        if residue != 1:
            failures.append(StabilityFailure("derivative", 0, r, 1, residue))

    return ValuationStabilityReport(
        terms_checked=N,
        ranks=ranks,
        failures=failures,
        untested_cofactors=sorted(set(untested)),
    )
