"""Exact arithmetic over Q: dense polynomials, rational maps, projective points.

Integers are plain Python ints (arbitrary precision, canonical zero) and
rationals are fractions.Fraction (always reduced, positive denominator), so
the two base number types need no wrapper classes here.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Union

BigInteger = int
Rational = Fraction

Coefficient = Union[int, str, Fraction]


def as_rational(x: Coefficient) -> Fraction:
    """Coerce ints, strings like '26/5', and Fractions to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class Polynomial:
    """Dense univariate polynomial over Q, coefficients from degree 0 upward.

    Immutable: coefficients are stored as a tuple of Fractions with trailing
    zeros stripped, so equality and hashing are structural.  The zero
    polynomial has degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coefficients: Iterable[Coefficient] = ()):
        coeffs = [as_rational(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def one(cls) -> "Polynomial":
        return cls((1,))

    @classmethod
    def identity(cls) -> "Polynomial":
        """The polynomial z."""
        return cls((0, 1))

    @classmethod
    def constant(cls, c: Coefficient) -> "Polynomial":
        return cls((c,))

    @classmethod
    def monomial(cls, c: Coefficient, k: int) -> "Polynomial":
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def coefficient(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Polynomial.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x: Coefficient) -> Fraction:
        """Evaluate by Horner's rule; exact."""
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, inner: "Polynomial") -> "Polynomial":
        """Return self(inner(z)) expanded."""
        acc = Polynomial.zero()
        for c in reversed(self.coeffs):
            acc = acc * inner + Polynomial.constant(c)
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i >= 1))

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        lead = self.lead
        return Polynomial(tuple(c / lead for c in self.coeffs))

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(0, self.degree - other.degree + 1)
        rem = list(self.coeffs)
        dlead = other.lead
        dd = other.degree
        while len(rem) - 1 >= dd and rem:
            k = len(rem) - 1 - dd
            c = rem[-1] / dlead
            q[k] = c
            for i, oc in enumerate(other.coeffs):
                rem[k + i] -= c * oc
            while rem and rem[-1] == 0:
                rem.pop()
        return Polynomial(q), Polynomial(rem)

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return divmod(self, other)[0]

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return divmod(self, other)[1]

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)!r})"

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                zpow = "z" if k == 1 else f"z^{k}"
                body = zpow if mag == 1 else f"{mag}*{zpow}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)


def _coerce(x) -> "Polynomial":
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return Polynomial.constant(x)
    return NotImplemented


def poly_eval(f: Polynomial, x: Coefficient) -> Fraction:
    """Exact value f(x) in lowest terms."""
    return f(x)


def derivative(f: Polynomial) -> Polynomial:
    """Formal derivative with exact coefficients."""
    return f.derivative()


def conjugate(phi: Polynomial, alpha: Coefficient) -> Polynomial:
    """Shift coordinates so alpha moves to the origin: phi(z + alpha) - alpha.

    The result has the same degree and satisfies, for every n,
    result^n(0) = phi^n(alpha) - alpha.
    """
    if phi.degree < 1:
        raise ValueError("conjugate requires degree >= 1")
    alpha = as_rational(alpha)
    shifted = phi.compose(Polynomial((alpha, 1)))
    return shifted - Polynomial.constant(alpha)


def poly_gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """Monic gcd over Q (gcd(f, 0) = monic f; gcd(0, 0) = 0)."""
    a, b = f, g
    while not b.is_zero:
        a, b = b, a % b
    return a.monic()


def squarefree_decomposition(f: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun decomposition f = c * prod q_i^{m_i} with q_i monic, squarefree,
    pairwise coprime, and multiplicities strictly increasing.

    c is f's leading coefficient.  Requires deg f >= 1.
    """
    if f.degree < 1:
        raise ValueError("squarefree_decomposition requires degree >= 1")
    f = f.monic()
    df = f.derivative()
    a = poly_gcd(f, df)
    b = f // a
    c = df // a
    d = c - b.derivative()
    out: list[tuple[Polynomial, int]] = []
    i = 1
    while b.degree >= 1:
        a = poly_gcd(b, d)
        b = b // a
        c = d // a
        d = c - b.derivative()
        if a.degree >= 1:
            out.append((a, i))
        i += 1
    return out


def is_powerful(f: Polynomial) -> bool:
    """True iff deg f >= 2 and every squarefree factor divides f at least twice."""
    if f.degree < 2:
        return False
    return all(mult >= 2 for _, mult in squarefree_decomposition(f))


class RationalMap:
    """Quotient of two coprime polynomials over Q.

    Stored reduced and normalized: the joint coefficient vector of numerator
    and denominator is scaled to coprime integers with the denominator's
    leading coefficient positive, so equality is structural and the
    projective coefficient height can be read off directly.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: Polynomial, denominator: Polynomial = Polynomial((1,))):
        if denominator.is_zero:
            raise ValueError("rational map denominator is zero")
        if not numerator.is_zero:
            g = poly_gcd(numerator, denominator)
            if g.degree >= 1:
                numerator = numerator // g
                denominator = denominator // g
        scale = _primitive_scale(numerator.coeffs + denominator.coeffs)
        if denominator.lead * scale < 0:
            scale = -scale
        object.__setattr__(self, "numerator", Polynomial(tuple(c * scale for c in numerator.coeffs)))
        object.__setattr__(self, "denominator", Polynomial(tuple(c * scale for c in denominator.coeffs)))

    def __setattr__(self, name, value):
        raise AttributeError("RationalMap is immutable")

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    def integer_coefficients(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Jointly primitive integer coefficient vectors (numerator, denominator)."""
        num = tuple(int(c) for c in self.numerator.coeffs)
        den = tuple(int(c) for c in self.denominator.coeffs)
        return num, den

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMap):
            return NotImplemented
        return self.numerator == other.numerator and self.denominator == other.denominator

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def __repr__(self) -> str:
        return f"RationalMap({self.numerator!r}, {self.denominator!r})"

    def __str__(self) -> str:
        return f"({self.numerator}) / ({self.denominator})"


def _primitive_scale(coeffs: tuple[Fraction, ...]) -> Fraction:
    """Rational t > 0 making t*coeffs a coprime integer vector."""
    den_lcm = 1
    for c in coeffs:
        den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    nums = [abs(int(c * den_lcm)) for c in coeffs if c != 0]
    g = 0
    for n in nums:
        g = gcd(g, n)
    return Fraction(den_lcm, g if g else 1)


def reverse_map(psi: Polynomial) -> RationalMap:
    """Conjugate psi by z -> 1/z: returns z^d / rev(psi) with
    rev(psi)(z) = z^d * psi(1/z), reduced to coprime numerator/denominator.
    """
    d = psi.degree
    if d < 1:
        raise ValueError("reverse_map requires degree >= 1")
    reversed_coeffs = tuple(reversed(psi.coeffs))
    return RationalMap(Polynomial.monomial(1, d), Polynomial(reversed_coeffs))


class ProjPoint:
    """Point of P^1(Q) as a coprime integer pair with a fixed sign convention.

    Normalization: gcd(|x|, |y|) = 1, y >= 0, and x > 0 when y = 0; equality
    is therefore structural.  The pair (1, 0) is the point at infinity and
    a rational value t = a/b enters as the pair (b, a).
    """

    __slots__ = ("x", "y")

    def __init__(self, x: int, y: int):
        if x == 0 and y == 0:
            raise ValueError("(0, 0) is not a projective point")
        g = gcd(abs(x), abs(y))
        x //= g
        y //= g
        if y < 0 or (y == 0 and x < 0):
            x, y = -x, -y
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("ProjPoint is immutable")

    @classmethod
    def from_value(cls, t: Coefficient) -> "ProjPoint":
        """The point [1 : t], i.e. the integer pair (denominator, numerator)."""
        t = as_rational(t)
        return cls(t.denominator, t.numerator)

    @classmethod
    def infinity(cls) -> "ProjPoint":
        return cls(1, 0)

    @property
    def is_infinity(self) -> bool:
        return self.y == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self) -> int:
        return hash((self.x, self.y))

    def __repr__(self) -> str:
        return f"ProjPoint({self.x}, {self.y})"

    def __str__(self) -> str:
        return f"[{self.x} : {self.y}]"
