"""Exact arithmetic in R[z] and R(z) with a unit-circle conjugation involution.

Coefficients are arbitrary-precision rationals (`fractions.Fraction`), so
equality of rational functions is decidable: two values are equal exactly
when their canonical forms coincide.  The canonical form of a fraction is
the coprime pair whose denominator is monic; in particular the denominator's
leading coefficient is positive and the representative is unique.

The conjugation ``conj`` sends f/g to (f*/g*) * z**(deg g - deg f), where p*
reverses the coefficients of p.  Restricted to the complex unit circle this
agrees with evaluating at the complex conjugate of the argument (equivalently
at 1/z), which is what lets cross-spectra be represented inside R(z).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Coeff = Union[int, Fraction]

#: Degree of the zero polynomial.
NEG_INFINITY = float("-inf")


class PoleError(ArithmeticError):
    """Raised when a rational function is evaluated at a pole."""

    def __init__(self, point):
        self.point = point
        super().__init__(f"denominator vanishes at {point!r}")


def _strip(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    n = len(coeffs)
    while n and not coeffs[n - 1]:
        n -= 1
    return coeffs[:n]


class Poly:
    """Univariate polynomial over Q, stored densely; coeffs[k] multiplies z^k."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Coeff] = ()):
        self.coeffs = _strip(tuple(Fraction(c) for c in coeffs))

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self):
        """Degree; NEG_INFINITY for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else NEG_INFINITY

    @property
    def leading(self) -> Fraction:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("Poly", self.coeffs))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    # -- ring arithmetic ----------------------------------------------------

    def __add__(self, other: Poly) -> Poly:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __neg__(self) -> Poly:
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return P_ZERO
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] += ai * bj
        return Poly(out)

    def scale(self, c: Coeff) -> Poly:
        c = Fraction(c)
        if not c:
            return P_ZERO
        return Poly(tuple(a * c for a in self.coeffs))

    def shift(self, k: int) -> Poly:
        """Multiply by z^k (k >= 0)."""
        if k < 0:
            raise ValueError("negative shift")
        if self.is_zero or k == 0:
            return self
        return Poly((Fraction(0),) * k + self.coeffs)

    def __divmod__(self, other: Poly) -> tuple[Poly, Poly]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        d = len(other.coeffs) - 1
        lead = other.coeffs[-1]
        if len(rem) <= d:
            return P_ZERO, self
        quot = [Fraction(0)] * (len(rem) - d)
        for i in range(len(rem) - 1, d - 1, -1):
            c = rem[i]
            if c:
                q = c / lead
                quot[i - d] = q
                for j, b in enumerate(other.coeffs):
                    rem[i - d + j] -= q * b
        return Poly(quot), Poly(rem)

    def __floordiv__(self, other: Poly) -> Poly:
        return divmod(self, other)[0]

    def __mod__(self, other: Poly) -> Poly:
        return divmod(self, other)[1]

    def divexact(self, other: Poly) -> Poly:
        q, r = divmod(self, other)
        if not r.is_zero:
            raise ArithmeticError("inexact polynomial division")
        return q

    def monic(self) -> Poly:
        if self.is_zero:
            return self
        lead = self.coeffs[-1]
        if lead == 1:
            return self
        return Poly(tuple(c / lead for c in self.coeffs))

    # -- conjugation and evaluation ------------------------------------------

    def conj(self) -> Poly:
        """Coefficient reversal relative to the degree; zero maps to zero."""
        return Poly(self.coeffs[::-1])

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    # -- display -------------------------------------------------------------

    def __repr__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                mag = "z" if k == 1 else f"z^{k}"
                if c == 1:
                    terms.append(mag)
                elif c == -1:
                    terms.append(f"-{mag}")
                else:
                    terms.append(f"{c}*{mag}")
        out = terms[0]
        for t in terms[1:]:
            out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
        return out


P_ZERO = Poly()
P_ONE = Poly((1,))
P_Z = Poly((0, 1))


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic greatest common divisor; raises if both arguments are zero."""
    if f.is_zero and g.is_zero:
        raise ValueError("gcd(0, 0) is undefined")
    a, b = f, g
    while not b.is_zero:
        a, b = b, (a % b).monic()
    return a.monic()


def poly_lcm(f: Poly, g: Poly) -> Poly:
    if f.is_zero or g.is_zero:
        return P_ZERO
    return (f * g.divexact(poly_gcd(f, g))).monic()


class RatFn:
    """Rational function over Q in canonical form: coprime, monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=P_ONE):
        if not isinstance(num, Poly):
            num = Poly((num,)) if not isinstance(num, (tuple, list)) else Poly(num)
        if not isinstance(den, Poly):
            den = Poly((den,)) if not isinstance(den, (tuple, list)) else Poly(den)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            self.num, self.den = P_ZERO, P_ONE
            return
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.divexact(g)
            den = den.divexact(g)
        lead = den.leading
        if lead != 1:
            num = num.scale(1 / lead)
            den = den.scale(1 / lead)
        self.num, self.den = num, den

    # -- structure ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree <= 0

    @property
    def degree(self):
        """max(deg num, deg den); NEG_INFINITY for the zero function."""
        if self.is_zero:
            return NEG_INFINITY
        return max(self.num.degree, self.den.degree)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatFn)
            and self.num.coeffs == other.num.coeffs
            and self.den.coeffs == other.den.coeffs
        )

    def __hash__(self):
        return hash(("RatFn", self.num.coeffs, self.den.coeffs))

    def __bool__(self) -> bool:
        return not self.is_zero

    # -- field arithmetic -------------------------------------------------------

    def __add__(self, other: RatFn) -> RatFn:
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        g = poly_gcd(d1, d2)
        if g.degree <= 0:
            return RatFn(n1 * d2 + n2 * d1, d1 * d2)
        d2r = d2.divexact(g)
        return RatFn(n1 * d2r + n2 * d1.divexact(g), d1 * d2r)

    def __neg__(self) -> RatFn:
        out = object.__new__(RatFn)
        out.num, out.den = -self.num, self.den
        return out

    def __sub__(self, other: RatFn) -> RatFn:
        return self + (-other)

    def __mul__(self, other: RatFn) -> RatFn:
        if self.is_zero or other.is_zero:
            return R_ZERO
        # cross-cancel before multiplying to keep the gcd inputs small
        n1, d2 = self.num, other.den
        g = poly_gcd(n1, d2)
        if g.degree > 0:
            n1, d2 = n1.divexact(g), d2.divexact(g)
        n2, d1 = other.num, self.den
        g = poly_gcd(n2, d1)
        if g.degree > 0:
            n2, d1 = n2.divexact(g), d1.divexact(g)
        return RatFn(n1 * n2, d1 * d2)

    def reciprocal(self) -> RatFn:
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of the zero function")
        return RatFn(self.den, self.num)

    def __truediv__(self, other: RatFn) -> RatFn:
        if other.is_zero:
            raise ZeroDivisionError("division by the zero function")
        return self * other.reciprocal()

    # -- conjugation and evaluation ------------------------------------------------

    def conj(self) -> RatFn:
        """The involution (f/g)* = (f*/g*) * z**(deg g - deg f)."""
        if self.is_zero:
            return self
        fs, gs = self.num.conj(), self.den.conj()
        k = self.den.degree - self.num.degree
        if k >= 0:
            return RatFn(fs.shift(k), gs)
        return RatFn(fs, gs.shift(-k))

    def __call__(self, point):
        d = self.den(point)
        if not d:
            raise PoleError(point)
        return self.num(point) / d

    # -- display ----------------------------------------------------------------------

    def __repr__(self) -> str:
        if self.den == P_ONE:
            return repr(self.num)
        num = repr(self.num)
        if self.num.degree > 0:
            num = f"({num})"
        return f"{num}/({self.den!r})"


R_ZERO = RatFn(P_ZERO)
R_ONE = RatFn(P_ONE)
R_Z = RatFn(P_Z)


def poly(coeffs: Sequence[Coeff]) -> Poly:
    return Poly(coeffs)


def rat(num: Sequence[Coeff] | Coeff, den: Sequence[Coeff] | Coeff = (1,)) -> RatFn:
    num = Poly(num) if isinstance(num, (tuple, list)) else Poly((num,))
    den = Poly(den) if isinstance(den, (tuple, list)) else Poly((den,))
    return RatFn(num, den)


def const(c: Coeff) -> RatFn:
    return RatFn(Poly((c,)))


# -- serialization: coefficients as exact "p/q" strings --------------------------------


def coeff_to_str(c: Fraction) -> str:
    return str(c)


def coeff_from_str(s: str) -> Fraction:
    if not isinstance(s, str) or "." in s or "e" in s.lower():
        raise ValueError(f"coefficient {s!r} is not an exact rational string 'p/q'")
    return Fraction(s)


def poly_to_strings(f: Poly) -> list[str]:
    return [coeff_to_str(c) for c in f.coeffs]


def poly_from_strings(parts: Sequence[str]) -> Poly:
    return Poly([coeff_from_str(s) for s in parts])


def ratfn_to_dict(r: RatFn) -> dict:
    return {"num": poly_to_strings(r.num), "den": poly_to_strings(r.den)}


def ratfn_from_dict(d: dict) -> RatFn:
    return RatFn(poly_from_strings(d["num"]), poly_from_strings(d["den"]))
