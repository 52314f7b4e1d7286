"""Exact arithmetic in the field Q(q) of rational functions in one indeterminate.

A :class:`QRat` is stored as a reduced fraction of two ``flint.fmpq_poly``
objects.  The canonical form is: gcd(num, den) = 1, den monic, and zero is
``0/1``.  Because the form is unique, equality and hashing are structural.
"""

from __future__ import annotations

from fractions import Fraction

from flint import fmpq, fmpq_poly

from .errors import DivisionByZero

_ZERO_POLY = fmpq_poly([])
_ONE_POLY = fmpq_poly([1])
_Q_POLY = fmpq_poly([0, 1])


def _monomial(k: int) -> fmpq_poly:
    return fmpq_poly([0] * k + [1])


class QRat:
    """Element of Q(q) in canonical reduced form.

    Accepts ints, Fractions, strings such as ``"3/4"``, or another QRat.
    Instances are immutable.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, value=0):
        if isinstance(value, QRat):
            self.num, self.den = value.num, value.den
        elif isinstance(value, fmpq_poly):
            self.num, self.den = value, _ONE_POLY
        else:
            if isinstance(value, str):
                value = Fraction(value)
            if isinstance(value, Fraction):
                c = fmpq(value.numerator, value.denominator)
            else:
                c = fmpq(value)
            self.num, self.den = fmpq_poly([c]), _ONE_POLY
        self._hash = None

    @classmethod
    def _raw(cls, num: fmpq_poly, den: fmpq_poly) -> "QRat":
        # caller guarantees canonical form
        obj = cls.__new__(cls)
        obj.num, obj.den, obj._hash = num, den, None
        return obj

    @classmethod
    def from_fraction(cls, num: fmpq_poly, den: fmpq_poly) -> "QRat":
        """Build num/den and bring it to canonical form."""
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if num.is_zero():
            return ZERO
        if den.degree() == 0:
            return cls._raw(num / den[0], _ONE_POLY)
        g = num.gcd(den)
        if g.degree() > 0:
            num, den = num / g, den / g
        lead = den[den.degree()]
        if lead != 1:
            num, den = num / lead, den / lead
        return cls._raw(num, den)

    # -- queries -------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.den.degree() == 0 and self.num == _ONE_POLY

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, QRat):
            try:
                other = QRat(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.num.coeffs()), tuple(self.den.coeffs())))
        return self._hash

    # -- field operations ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, QRat):
            other = QRat(other)
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        if self.den == other.den:
            if self.den.degree() == 0:
                n = self.num + other.num
                return QRat._raw(n, _ONE_POLY) if not n.is_zero() else ZERO
            return QRat.from_fraction(self.num + other.num, self.den)
        return QRat.from_fraction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return QRat._raw(-self.num, self.den)

    def __sub__(self, other):
        if not isinstance(other, QRat):
            other = QRat(other)
        return self + (-other)

    def __rsub__(self, other):
        return QRat(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, QRat):
            other = QRat(other)
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        if self.den.degree() == 0 and other.den.degree() == 0:
            return QRat._raw(self.num * other.num, _ONE_POLY)
        # cross-cancel keeps intermediate degrees small
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        n = (self.num / g1) * (other.num / g2)
        d = (self.den / g2) * (other.den / g1)
        lead = d[d.degree()]
        if lead != 1:
            n, d = n / lead, d / lead
        return QRat._raw(n, d)

    __rmul__ = __mul__

    def inv(self) -> "QRat":
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero in Q(q)")
        return QRat.from_fraction(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, QRat):
            other = QRat(other)
        return self * other.inv()

    def __rtruediv__(self, other):
        return QRat(other) * self.inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        return QRat.from_fraction(self.num**k, self.den**k) if k else ONE

    def times_q_power(self, k: int) -> "QRat":
        """Return self * q**k without a gcd when the result stays canonical."""
        if k == 0 or self.num.is_zero():
            return self
        if k > 0:
            return self * QRat._raw(_monomial(k), _ONE_POLY)
        return self * q_power(k)

    def normalize(self) -> "QRat":
        return QRat.from_fraction(self.num, self.den)

    # -- rendering -----------------------------------------------------------

    def _display_pair(self):
        # scale so the lowest-order denominator coefficient is 1: 1/(1 - q^2)
        low = next(c for c in self.den.coeffs() if c != 0)
        return self.num / low, self.den / low

    def __str__(self):
        num, den = self._display_pair()
        if den == _ONE_POLY:
            return poly_str(num)
        n = poly_str(num)
        if len(num.coeffs()) - list(num.coeffs()).count(0) > 1:
            n = f"({n})"
        return f"{n}/({poly_str(den)})"

    def __repr__(self):
        return f"QRat({str(self)!r})"

    def to_expr(self) -> str:
        """Render in the operator-expression grammar (no '/' between polynomials)."""
        num, den = self._display_pair()
        if den == _ONE_POLY:
            return f"({poly_str(num)})"
        return f"({poly_str(num)})*({poly_str(den)})^-1"


def poly_str(p: fmpq_poly) -> str:
    """Render a polynomial in ascending powers of q, e.g. ``1 - q^2 + q^4``."""
    parts = []
    for k, c in enumerate(p.coeffs()):
        if c == 0:
            continue
        c = Fraction(int(c.p), int(c.q))
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "q" if k == 1 else f"q^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


ZERO = QRat._raw(_ZERO_POLY, _ONE_POLY)
ONE = QRat._raw(_ONE_POLY, _ONE_POLY)
Q = QRat._raw(_Q_POLY, _ONE_POLY)

_QPOW_CACHE: dict[int, QRat] = {}


def q_power(k: int) -> QRat:
    """q**k as a canonical QRat; k may be negative."""
    r = _QPOW_CACHE.get(k)
    if r is None:
        if k >= 0:
            r = QRat._raw(_monomial(k), _ONE_POLY)
        else:
            r = QRat._raw(_ONE_POLY, _monomial(-k))
        _QPOW_CACHE[k] = r
    return r


def pochhammer(x: QRat, y: QRat, k: int) -> QRat:
    """(x; y)_k = prod_{i=0}^{k-1} (1 - x y^i)."""
    if k < 0:
        raise ValueError("pochhammer needs k >= 0")
    out = ONE
    term = x
    for _ in range(k):
        out = out * (ONE - term)
        term = term * y
    return out


_QQ_CACHE: dict[int, QRat] = {}


def qq_pochhammer_inv(k: int) -> QRat:
    """1 / (q^2; q^2)_k, cached since every psi-series needs it."""
    r = _QQ_CACHE.get(k)
    if r is None:
        q2 = q_power(2)
        r = pochhammer(q2, q2, k).inv()
        _QQ_CACHE[k] = r
    return r
