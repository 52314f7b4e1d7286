"""Truncated multivariate power series in named spectral parameters.

Coefficients are :class:`~qtetra.monop.OpSum` operators of one arity, so the
product is noncommutative in the coefficients (commutative in the
parameters).  Truncation is by total degree: every stored exponent vector
has entries summing to at most ``cap``.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import ArityMismatch, DegreeDecreasing, ParamMismatch, ZeroParamMonomial
from .monop import IndexMap, OpSum, Sig, as_opsum, compose_into, embed
from .scalar import ONE, QRat, qq_pochhammer_inv

Exp = tuple  # exponent vector over the series' params


class PSeries:
    __slots__ = ("params", "cap", "n", "coeffs")

    def __init__(self, params: Sequence[str], cap: int, n: int, coeffs: Mapping[Exp, OpSum] | None = None):
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        self.params = tuple(params)
        self.cap = cap
        self.n = n
        self.coeffs: dict[Exp, OpSum] = {}
        for e, c in (coeffs or {}).items():
            e = tuple(e)
            if len(e) != len(self.params) or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e}")
            if c.n != n:
                raise ArityMismatch(f"coefficient arity {c.n} vs series arity {n}")
            if sum(e) <= cap and not c.is_zero():
                self.coeffs[e] = c

    @classmethod
    def constant(cls, params, cap, op) -> "PSeries":
        op = as_opsum(op)
        return cls(params, cap, op.n, {(0,) * len(params): op})

    @classmethod
    def one(cls, params, cap, n) -> "PSeries":
        return cls.constant(params, cap, OpSum.identity(n))

    def monomial(self, **exps) -> Exp:
        """Exponent vector from keyword exponents, e.g. s.monomial(x=1, z=1)."""
        return mono(self.params, exps)

    def coeff(self, e) -> OpSum:
        if isinstance(e, Mapping):
            e = mono(self.params, e)
        return self.coeffs.get(tuple(e), OpSum.zero(self.n))

    def _compat(self, other: "PSeries"):
        if self.params != other.params:
            raise ParamMismatch(f"{self.params} vs {other.params}")
        if self.n != other.n:
            raise ArityMismatch(f"arity {self.n} vs {other.n}")

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "PSeries") -> "PSeries":
        self._compat(other)
        cap = min(self.cap, other.cap)
        out = {e: c for e, c in self.coeffs.items() if sum(e) <= cap}
        for e, c in other.coeffs.items():
            if sum(e) <= cap:
                out[e] = out[e] + c if e in out else c
        return PSeries(self.params, cap, self.n, out)

    def __neg__(self):
        return PSeries(self.params, self.cap, self.n, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PSeries":
        c = c if isinstance(c, QRat) else QRat(c)
        return PSeries(self.params, self.cap, self.n, {e: v.scale(c) for e, v in self.coeffs.items()})

    def mul(self, other: "PSeries") -> "PSeries":
        """Cauchy product self*other truncated at min(cap)."""
        self._compat(other)
        cap = min(self.cap, other.cap)
        acc: dict[Exp, dict[Sig, QRat]] = {}
        for e1, c1 in self.coeffs.items():
            d1 = sum(e1)
            if d1 > cap:
                continue
            for e2, c2 in other.coeffs.items():
                if d1 + sum(e2) > cap:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                compose_into(acc.setdefault(e, {}), c1.terms, c2.terms, ONE)
        out = {}
        for e, terms in acc.items():
            clean = {s: c for s, c in terms.items() if not c.is_zero()}
            if clean:
                out[e] = OpSum._trusted(self.n, clean)
        return PSeries(self.params, cap, self.n, out)

    def left_mul(self, op) -> "PSeries":
        """op * self."""
        op = as_opsum(op, self.n)
        return PSeries(self.params, self.cap, self.n, {e: op.compose(c) for e, c in self.coeffs.items()})

    def right_mul(self, op) -> "PSeries":
        """self * op."""
        op = as_opsum(op, self.n)
        return PSeries(self.params, self.cap, self.n, {e: c.compose(op) for e, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, PSeries):
            return self.mul(other)
        if isinstance(other, (int, QRat)):
            return self.scale(other)
        return self.right_mul(other)

    def __rmul__(self, other):
        if isinstance(other, (int, QRat)):
            return self.scale(other)
        return self.left_mul(other)

    def with_cap(self, cap: int) -> "PSeries":
        return PSeries(self.params, min(cap, self.cap), self.n, self.coeffs)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PSeries):
            return NotImplemented
        return (self.params, self.n) == (other.params, other.n) and self.cap == other.cap and self.coeffs == other.coeffs

    def agrees_with(self, other: "PSeries", cap: int | None = None) -> bool:
        """Coefficient-wise equality up to a common cap."""
        self._compat(other)
        cap = min(self.cap, other.cap) if cap is None else cap
        keys = {e for e in self.coeffs if sum(e) <= cap} | {e for e in other.coeffs if sum(e) <= cap}
        return all(self.coeff(e) == other.coeff(e) for e in keys)

    def mismatches(self, other: "PSeries", cap: int | None = None) -> list[Exp]:
        self._compat(other)
        cap = min(self.cap, other.cap) if cap is None else cap
        keys = {e for e in self.coeffs if sum(e) <= cap} | {e for e in other.coeffs if sum(e) <= cap}
        return sorted(e for e in keys if self.coeff(e) != other.coeff(e))

    def term_count(self) -> int:
        return sum(len(c) for c in self.coeffs.values())

    def max_order(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def summary(self, full: bool = False) -> list:
        """Ordered (exponent, term count[, OpSum]) rows for reports."""
        rows = []
        for e in sorted(self.coeffs, key=lambda e: (sum(e), e)):
            c = self.coeffs[e]
            rows.append((e, len(c), c) if full else (e, len(c)))
        return rows

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e, _, c in self.summary(full=True):
            parts.append(f"{param_mono_str(self.params, e) or '1'}: {c}")
        return "\n".join(parts)

    def to_expr(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e, _, c in self.summary(full=True):
            m = param_mono_str(self.params, e)
            body = f"({c.to_expr()})"
            parts.append(f"{m}*{body}" if m else body)
        return " + ".join(parts)


def mono(params: Sequence[str], exps) -> Exp:
    """Exponent vector over params from a name, a mapping or a tuple."""
    if isinstance(exps, str):
        exps = {exps: 1}
    if isinstance(exps, Mapping):
        unknown = set(exps) - set(params)
        if unknown:
            raise ParamMismatch(f"unknown parameters {sorted(unknown)}")
        return tuple(int(exps.get(p, 0)) for p in params)
    exps = tuple(exps)
    if len(exps) != len(params):
        raise ParamMismatch("exponent vector length differs from parameter list")
    return exps


def param_mono_str(params, e) -> str:
    out = []
    for p, k in zip(params, e):
        if k == 1:
            out.append(p)
        elif k:
            out.append(f"{p}^{k}")
    return "*".join(out)


def psi_series(params: Sequence[str], param_mono, M, cap: int) -> PSeries:
    """psi(x M) = sum_k (-1)^k x^k M^k / (q^2; q^2)_k, truncated at total degree cap."""
    e = mono(params, param_mono)
    deg = sum(e)
    if deg <= 0:
        raise ZeroParamMonomial("psi needs a parameter monomial of degree >= 1")
    M = as_opsum(M)
    coeffs = {}
    power = OpSum.identity(M.n)
    k = 0
    while k * deg <= cap:
        if k:
            power = power.compose(M)
        c = qq_pochhammer_inv(k)
        if k % 2:
            c = -c
        coeffs[tuple(k * x for x in e)] = power.scale(c)
        k += 1
    return PSeries(params, cap, M.n, coeffs)


def ordered_product(factors: Sequence[PSeries], direction: str = "up") -> PSeries:
    """'up': f1 f2 ... fn;  'down': fn ... f2 f1."""
    if not factors:
        raise ValueError("empty product needs an explicit identity")
    seq = list(factors) if direction == "up" else list(reversed(factors))
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    out = seq[0]
    for f in seq[1:]:
        out = out.mul(f)
    return out


class ParamSubst:
    """Maps each parameter either to zero (None) or to a monomial of degree >= 1."""

    def __init__(self, params: Sequence[str], images: Mapping[str, object] | None = None):
        self.params = tuple(params)
        self.images: dict[str, Exp | None] = {}
        images = dict(images or {})
        for p in self.params:
            img = images.pop(p, p)
            if img is None or img == 0:
                self.images[p] = None
            else:
                v = mono(self.params, img)
                if sum(v) < 1 or any(x < 0 for x in v):
                    raise DegreeDecreasing(f"{p} -> {img} lowers the degree")
                self.images[p] = v
        if images:
            raise ParamMismatch(f"unknown parameters {sorted(images)}")

    def __call__(self, s: PSeries) -> PSeries:
        return param_subst(s, self)


def param_subst(s: PSeries, sigma: ParamSubst) -> PSeries:
    if sigma.params != s.params:
        raise ParamMismatch("substitution over a different parameter list")
    out: dict[Exp, OpSum] = {}
    for e, c in s.coeffs.items():
        new = [0] * len(s.params)
        dead = False
        for p, k in zip(s.params, e):
            if not k:
                continue
            img = sigma.images[p]
            if img is None:
                dead = True
                break
            for i, x in enumerate(img):
                new[i] += k * x
        if dead or sum(new) > s.cap:
            continue
        t = tuple(new)
        out[t] = out[t] + c if t in out else c
    return PSeries(s.params, s.cap, s.n, out)


def tau(names: Sequence[str], power: int = 1) -> list[str]:
    """Cyclic rotation (x_1..x_N) -> (x_N, x_1, ..., x_{N-1}), applied `power` times."""
    N = len(names)
    k = power % N
    return [names[(i - k) % N] for i in range(N)]


def embed_series(s: PSeries, imap: IndexMap) -> PSeries:
    return PSeries(s.params, s.cap, imap.n, {e: embed(c, imap) for e, c in s.coeffs.items()})


def build_B(params: Sequence[str], param_mono, slots: Sequence[int] | IndexMap, n: int, cap: int) -> PSeries:
    """F psi(x v1 u1^-1 u2 u3^-1 v3^-1) embedded at the three given slots.

    A zero parameter monomial (None) gives the constant series F.
    """
    from .monop import make_generator

    imap = slots if isinstance(slots, IndexMap) else IndexMap(slots, n)
    F = make_generator("F", imap)
    if param_mono is None:
        return PSeries.constant(params, cap, F)
    return psi_series(params, param_mono, b_argument(imap), cap).left_mul(F)


def b_argument(imap: IndexMap):
    """v1 u1^-1 u2 u3^-1 v3^-1 on the mapped slots."""
    from .monop import make_generator

    g = lambda k, i: make_generator(k, IndexMap([imap.slots[i - 1]], imap.n))
    return g("v", 1) * g("u_inv", 1) * g("u", 2) * g("u_inv", 3) * g("v_inv", 3)
