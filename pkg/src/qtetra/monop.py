"""Monomial operators on Laurent polynomials in n variables.

A monomial operator acts on basis monomials by

    t^a  |->  coeff * q^<lam, a> * t^(A a + b)

with ``lam`` and ``b`` integer vectors and ``A`` an integer n x n matrix.
The class is closed under composition, inversion (unimodular A), embedding
into larger tensor products, and the formal partial trace.  :class:`OpSum`
is a canonical finite linear combination of such operators and
:class:`LPoly` a Laurent polynomial, used by the brute-force oracle route.

Variables are numbered 1..n in the public API.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadArity,
    BadIndex,
    NonInjectiveMap,
    NonMonomialTrace,
    NotInvertible,
    TraceDiverges,
)
from .scalar import ONE, ZERO, QRat, q_power

# ---------------------------------------------------------------------------
# signatures


class Sig:
    """Interned (lam, A, b) triple.  Equal signatures are the same object."""

    __slots__ = ("n", "lam", "A", "b", "key", "_h", "__weakref__")

    def __init__(self, lam, A, b, key):
        self.n = len(b)
        self.lam = lam
        self.A = A
        self.b = b
        self.key = key
        self._h = hash(key)

    def __hash__(self):
        return self._h

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Sig(lam={self.lam}, A={self.A}, b={self.b})"

    def __reduce__(self):
        return (make_sig, (self.lam, self.A, self.b))


_INTERN: dict[tuple, Sig] = {}


def make_sig(lam: Sequence[int], A: Sequence[Sequence[int]], b: Sequence[int]) -> Sig:
    lam = tuple(lam)
    A = tuple(tuple(r) for r in A)
    b = tuple(b)
    n = len(b)
    if len(lam) != n or len(A) != n or any(len(r) != n for r in A):
        raise BadArity("lam, A, b dimensions disagree")
    key = (b, lam, A)
    s = _INTERN.get(key)
    if s is None:
        s = Sig(lam, A, b, key)
        _INTERN[key] = s
    return s


def _unit_rows(n: int):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


_ID_CACHE: dict[int, Sig] = {}


def identity_sig(n: int) -> Sig:
    s = _ID_CACHE.get(n)
    if s is None:
        s = make_sig((0,) * n, _unit_rows(n), (0,) * n)
        _ID_CACHE[n] = s
    return s


def _row_combo(row, rows):
    """sum_k row[k] * rows[k] for a sparse integer row."""
    nz = [(k, c) for k, c in enumerate(row) if c]
    if len(nz) == 1:
        k, c = nz[0]
        if c == 1:
            return rows[k]
        return tuple(c * x for x in rows[k])
    n = len(rows[0]) if rows else 0
    if not nz:
        return (0,) * n
    acc = [0] * n
    for k, c in nz:
        for j, x in enumerate(rows[k]):
            if x:
                acc[j] += c * x
    return tuple(acc)


_COMPOSE_CACHE: dict[tuple, tuple] = {}
_COMPOSE_CACHE_MAX = 2_000_000


def compose_sig(L: Sig, R: Sig) -> tuple[Sig, int]:
    """Signature of L∘R and the q-exponent <lam_L, b_R> of its coefficient."""
    ck = (L, R)
    hit = _COMPOSE_CACHE.get(ck)
    if hit is not None:
        return hit
    if L.n != R.n:
        raise BadArity(f"cannot compose arity {L.n} with {R.n}")
    n = L.n
    idn = identity_sig(n)
    if L is idn:
        out = (R, 0)
    elif R is idn:
        out = (L, 0)
    else:
        A = tuple(_row_combo(row, R.A) for row in L.A)
        lam_l = L.lam
        # lam = lam_R + A_R^T lam_L
        lam = list(R.lam)
        for k, c in enumerate(lam_l):
            if c:
                for j, x in enumerate(R.A[k]):
                    if x:
                        lam[j] += c * x
        bR = R.b
        b = tuple(
            L.b[i] + sum(x * bR[j] for j, x in enumerate(row) if x) for i, row in enumerate(L.A)
        )
        e = sum(c * bR[k] for k, c in enumerate(lam_l) if c)
        out = (make_sig(lam, A, b), e)
    if len(_COMPOSE_CACHE) > _COMPOSE_CACHE_MAX:
        _COMPOSE_CACHE.clear()
    _COMPOSE_CACHE[ck] = out
    return out


def _int_inverse(A):
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise NotInvertible("singular exponent matrix")
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    inv = [row[n:] for row in M]
    if any(x.denominator != 1 for row in inv for x in row):
        raise NotInvertible("exponent matrix is not unimodular")
    return tuple(tuple(int(x) for x in row) for row in inv)


def _inverse_sig(s: Sig) -> tuple[Sig, int]:
    Ainv = _int_inverse(s.A)
    n = s.n
    # a = Ainv (a' - b); q-weight lam.a = (Ainv^T lam).a' - lam.Ainv b
    lam_new = tuple(-sum(Ainv[k][j] * s.lam[k] for k in range(n)) for j in range(n))
    Ab = [sum(Ainv[i][j] * s.b[j] for j in range(n)) for i in range(n)]
    b_new = tuple(-x for x in Ab)
    e = sum(s.lam[i] * Ab[i] for i in range(n))
    return make_sig(lam_new, Ainv, b_new), e


# ---------------------------------------------------------------------------
# operators


class MonOp:
    """A single monomial operator ``coeff * (lam, A, b)``."""

    __slots__ = ("coeff", "sig")

    def __init__(self, coeff, sig: Sig):
        coeff = coeff if isinstance(coeff, QRat) else QRat(coeff)
        if coeff.is_zero():
            raise ValueError("MonOp coefficient must be nonzero")
        self.coeff = coeff
        self.sig = sig

    @classmethod
    def from_parts(cls, coeff, lam, A, b) -> "MonOp":
        return cls(coeff, make_sig(lam, A, b))

    @classmethod
    def identity(cls, n: int) -> "MonOp":
        return cls(ONE, identity_sig(n))

    n = property(lambda self: self.sig.n)
    lam = property(lambda self: self.sig.lam)
    A = property(lambda self: self.sig.A)
    b = property(lambda self: self.sig.b)

    def is_identity(self) -> bool:
        return self.sig is identity_sig(self.n) and self.coeff.is_one()

    def compose(self, other: "MonOp") -> "MonOp":
        sig, e = compose_sig(self.sig, other.sig)
        return MonOp((self.coeff * other.coeff).times_q_power(e), sig)

    def inverse(self) -> "MonOp":
        sig, e = _inverse_sig(self.sig)
        return MonOp(self.coeff.inv().times_q_power(e), sig)

    def scale(self, c) -> "MonOp":
        return MonOp(self.coeff * c, self.sig)

    def to_sum(self) -> "OpSum":
        return OpSum(self.n, {self.sig: self.coeff})

    def act(self, a: Sequence[int]) -> tuple[QRat, tuple[int, ...]]:
        """Image of t^a as (scalar, exponent)."""
        s = self.sig
        if len(a) != s.n:
            raise BadArity("exponent length does not match arity")
        w = sum(x * y for x, y in zip(s.lam, a))
        out = tuple(sum(x * y for x, y in zip(row, a)) + bi for row, bi in zip(s.A, s.b))
        return self.coeff.times_q_power(w), out

    def __mul__(self, other):
        if isinstance(other, MonOp):
            return self.compose(other)
        if isinstance(other, OpSum):
            return self.to_sum() * other
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = MonOp.identity(self.n)
        base = self
        while k:
            if k & 1:
                out = out.compose(base)
            base = base.compose(base)
            k >>= 1
        return out

    def __neg__(self):
        return MonOp(-self.coeff, self.sig)

    def __add__(self, other):
        return self.to_sum() + other

    def __sub__(self, other):
        return self.to_sum() - other

    def __eq__(self, other):
        if isinstance(other, MonOp):
            return self.sig is other.sig and self.coeff == other.coeff
        if isinstance(other, OpSum):
            return self.to_sum() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.sig, self.coeff))

    def __str__(self):
        return render_monop(self.coeff, self.sig)

    __repr__ = __str__


def _as_sum(x, n=None) -> "OpSum":
    if isinstance(x, OpSum):
        return x
    if isinstance(x, MonOp):
        return x.to_sum()
    if n is None:
        raise TypeError("scalar needs an arity to become an operator")
    return OpSum.scalar(n, x)


class OpSum:
    """Canonical finite linear combination of monomial operators of one arity."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Sig, QRat] | None = None):
        self.n = n
        clean = {}
        if terms:
            for s, c in terms.items():
                if s.n != n:
                    raise BadArity("term arity differs from sum arity")
                if not c.is_zero():
                    clean[s] = c
        self.terms = clean

    @classmethod
    def _trusted(cls, n, terms):
        obj = cls.__new__(cls)
        obj.n = n
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, n: int) -> "OpSum":
        return cls._trusted(n, {})

    @classmethod
    def identity(cls, n: int) -> "OpSum":
        return cls._trusted(n, {identity_sig(n): ONE})

    @classmethod
    def scalar(cls, n: int, c) -> "OpSum":
        c = c if isinstance(c, QRat) else QRat(c)
        return cls._trusted(n, {identity_sig(n): c} if not c.is_zero() else {})

    @classmethod
    def from_terms(cls, n: int, monops: Iterable[MonOp]) -> "OpSum":
        acc: dict[Sig, QRat] = {}
        for m in monops:
            if m.n != n:
                raise BadArity("term arity differs from sum arity")
            c = acc.get(m.sig)
            acc[m.sig] = m.coeff if c is None else c + m.coeff
        return cls(n, acc)

    def is_zero(self) -> bool:
        return not self.terms

    def is_identity(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(identity_sig(self.n), ZERO).is_one()

    def __len__(self):
        return len(self.terms)

    def monops(self) -> list[MonOp]:
        """Terms in canonical order: lexicographic on (b, lam, A row-major)."""
        return [MonOp(self.terms[s], s) for s in sorted(self.terms)]

    def single(self) -> MonOp:
        if len(self.terms) != 1:
            raise ValueError("sum does not have exactly one term")
        (s, c), = self.terms.items()
        return MonOp(c, s)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if other.n != self.n:
            raise BadArity(f"arity {self.n} vs {other.n}")

    def __add__(self, other):
        other = _as_sum(other, self.n)
        self._check(other)
        acc = dict(self.terms)
        for s, c in other.terms.items():
            old = acc.get(s)
            if old is None:
                acc[s] = c
            else:
                new = old + c
                if new.is_zero():
                    del acc[s]
                else:
                    acc[s] = new
        return OpSum._trusted(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return OpSum._trusted(self.n, {s: -c for s, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_sum(other, self.n))

    def __rsub__(self, other):
        return _as_sum(other, self.n) - self

    def scale(self, c) -> "OpSum":
        c = c if isinstance(c, QRat) else QRat(c)
        if c.is_zero():
            return OpSum.zero(self.n)
        return OpSum._trusted(self.n, {s: v * c for s, v in self.terms.items()})

    def compose(self, other) -> "OpSum":
        other = _as_sum(other, self.n)
        self._check(other)
        acc: dict[Sig, QRat] = {}
        compose_into(acc, self.terms, other.terms, ONE)
        return OpSum._trusted(self.n, {s: c for s, c in acc.items() if not c.is_zero()})

    def __mul__(self, other):
        if isinstance(other, (OpSum, MonOp)):
            return self.compose(other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, MonOp):
            return other.to_sum().compose(self)
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            return OpSum._trusted(self.n, {}) if self.is_zero() else self.single().inverse().to_sum() ** (-k)
        out = OpSum.identity(self.n)
        for _ in range(k):
            out = out.compose(self)
        return out

    def inverse(self) -> "OpSum":
        if len(self.terms) != 1:
            raise NotInvertible("only single-term sums have monomial inverses")
        return self.single().inverse().to_sum()

    def __eq__(self, other):
        if isinstance(other, MonOp):
            other = other.to_sum()
        if not isinstance(other, OpSum):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"[{m}]" for m in self.monops())

    __repr__ = __str__

    def to_expr(self) -> str:
        """Render in the operator-expression grammar (parseable)."""
        if not self.terms:
            return "0"
        return " + ".join(monop_expr(m) for m in self.monops())


def compose_into(acc: dict, left: Mapping[Sig, QRat], right: Mapping[Sig, QRat], scale: QRat):
    """acc += scale * (left ∘ right), all as sig -> coeff maps."""
    for sl, cl in left.items():
        cls_ = cl * scale if not scale.is_one() else cl
        for sr, cr in right.items():
            sig, e = compose_sig(sl, sr)
            c = (cls_ * cr).times_q_power(e)
            old = acc.get(sig)
            acc[sig] = c if old is None else old + c


def as_opsum(x, n: int | None = None) -> OpSum:
    return _as_sum(x, n)


# ---------------------------------------------------------------------------
# Laurent polynomials and the application oracle


class LPoly:
    """Laurent polynomial: exponent vector -> QRat, zero coefficients dropped."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[tuple, QRat] | None = None):
        self.n = n
        self.terms = {}
        for a, c in (terms or {}).items():
            c = c if isinstance(c, QRat) else QRat(c)
            if len(a) != n:
                raise BadArity("exponent length does not match arity")
            if not c.is_zero():
                self.terms[tuple(a)] = c

    @classmethod
    def monomial(cls, a: Sequence[int], coeff=1) -> "LPoly":
        return cls(len(a), {tuple(a): coeff})

    def __add__(self, other: "LPoly") -> "LPoly":
        if other.n != self.n:
            raise BadArity("arity mismatch")
        acc = dict(self.terms)
        for a, c in other.terms.items():
            acc[a] = acc.get(a, ZERO) + c
        return LPoly(self.n, acc)

    def __sub__(self, other):
        return self + LPoly(other.n, {a: -c for a, c in other.terms.items()})

    def __eq__(self, other):
        return isinstance(other, LPoly) and self.n == other.n and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*t^{a}" for a, c in sorted(self.terms.items()))

    __repr__ = __str__


def apply(op, p: LPoly) -> LPoly:
    """Apply a MonOp or OpSum to a Laurent polynomial, term by term."""
    if isinstance(op, MonOp):
        op = op.to_sum()
    if op.n != p.n:
        raise BadArity(f"operator arity {op.n} vs polynomial arity {p.n}")
    acc: dict[tuple, QRat] = {}
    for s, c in op.terms.items():
        m = MonOp(c, s)
        for a, pc in p.terms.items():
            k, out = m.act(a)
            acc[out] = acc.get(out, ZERO) + k * pc
    return LPoly(p.n, acc)


# ---------------------------------------------------------------------------
# index maps and embedding


class IndexMap:
    """Injective assignment of source slots 1..m to target slots in 1..n."""

    __slots__ = ("m", "n", "slots")

    def __init__(self, slots: Sequence[int], n: int):
        slots = tuple(int(s) for s in slots)
        if any(s < 1 or s > n for s in slots):
            raise BadIndex(f"slot out of range 1..{n}: {slots}")
        if len(set(slots)) != len(slots):
            raise NonInjectiveMap(f"slots not distinct: {slots}")
        self.m = len(slots)
        self.n = n
        self.slots = slots

    def then(self, outer: "IndexMap") -> "IndexMap":
        """outer ∘ self: first self, then outer."""
        if outer.m != self.n:
            raise BadArity("index maps do not chain")
        return IndexMap([outer.slots[s - 1] for s in self.slots], outer.n)

    def __eq__(self, other):
        return isinstance(other, IndexMap) and (self.slots, self.n) == (other.slots, other.n)

    def __hash__(self):
        return hash((self.slots, self.n))

    def __repr__(self):
        return f"IndexMap({list(self.slots)}, n={self.n})"


_EMBED_CACHE: dict[tuple, Sig] = {}


def embed_sig(s: Sig, imap: IndexMap) -> Sig:
    key = (s, imap)
    hit = _EMBED_CACHE.get(key)
    if hit is not None:
        return hit
    if s.n != imap.m:
        raise BadArity(f"operator arity {s.n} vs map source arity {imap.m}")
    n = imap.n
    pos = [x - 1 for x in imap.slots]
    lam = [0] * n
    b = [0] * n
    A = [list(r) for r in _unit_rows(n)]
    for i, gi in enumerate(pos):
        lam[gi] = s.lam[i]
        b[gi] = s.b[i]
        A[gi][gi] = 0
        for j, gj in enumerate(pos):
            A[gi][gj] = s.A[i][j]
    out = make_sig(lam, A, b)
    _EMBED_CACHE[key] = out
    return out


def embed(op, imap: IndexMap):
    """Embed a MonOp or OpSum along an index map; identity on unmapped slots."""
    if isinstance(op, MonOp):
        return MonOp(op.coeff, embed_sig(op.sig, imap))
    if op.n != imap.m:
        raise BadArity(f"operator arity {op.n} vs map source arity {imap.m}")
    return OpSum._trusted(imap.n, {embed_sig(s, imap): c for s, c in op.terms.items()})


def tensor(left, right):
    """left ⊗ right acting on disjoint blocks 1..m and m+1..m+n."""
    L, R = as_opsum(left), as_opsum(right)
    m, n = L.n, R.n
    Le = embed(L, IndexMap(range(1, m + 1), m + n))
    Re = embed(R, IndexMap(range(m + 1, m + n + 1), m + n))
    return Le.compose(Re)


# ---------------------------------------------------------------------------
# generators


def substitution(n: int, images: Mapping[int, Mapping[int, int]], coeff=1) -> MonOp:
    """The operator f(t) -> f(t'), t'_i = prod_j t_j^images[i][j]; unlisted i map to t_i.

    The monomial t^a goes to t^(A a) with A[j][i] = images[i][j].
    """
    A = [list(r) for r in _unit_rows(n)]
    for i, img in images.items():
        if not 1 <= i <= n:
            raise BadIndex(f"variable {i} outside 1..{n}")
        for j in range(n):
            A[j][i - 1] = 0
        for j, e in img.items():
            if not 1 <= j <= n:
                raise BadIndex(f"variable {j} outside 1..{n}")
            A[j - 1][i - 1] += e
    return MonOp.from_parts(coeff, (0,) * n, A, (0,) * n)


_BASE = {
    "u": MonOp.from_parts(1, (1,), ((1,),), (0,)),
    "v": MonOp.from_parts(1, (0,), ((1,),), (1,)),
    "u_inv": MonOp.from_parts(1, (-1,), ((1,),), (0,)),
    "v_inv": MonOp.from_parts(1, (0,), ((1,),), (-1,)),
    # f(t1,t2,t3) -> f(t1 t2 / t3, t3, t2)
    "F": substitution(3, {1: {1: 1, 2: 1, 3: -1}, 2: {3: 1}, 3: {2: 1}}),
    # f(t1,t2) -> f(t1 t2, t2)
    "S": substitution(2, {1: {1: 1, 2: 1}}),
    "S_inv": substitution(2, {1: {1: 1, 2: -1}}),
    "P": substitution(2, {1: {2: 1}, 2: {1: 1}}),
}
_BASE["w"] = _BASE["v"] * _BASE["u"]
_BASE["w_tilde"] = _BASE["v"] * _BASE["u_inv"]
_BASE["w_inv"] = _BASE["w"].inverse()
_BASE["w_tilde_inv"] = _BASE["w_tilde"].inverse()

GENERATOR_KINDS = tuple(_BASE)


def make_generator(kind: str, slots: Sequence[int] | IndexMap, n: int | None = None) -> MonOp:
    """Generator ``kind`` acting on the given global slots of an n-variable space."""
    try:
        base = _BASE[kind]
    except KeyError:
        raise ValueError(f"unknown generator {kind!r}") from None
    if isinstance(slots, IndexMap):
        imap = slots
    else:
        slots = [slots] if isinstance(slots, int) else list(slots)
        if n is None:
            raise BadArity("target arity required")
        if len(slots) != base.n:
            raise BadArity(f"{kind} takes {base.n} slot(s), got {len(slots)}")
        imap = IndexMap(slots, n)
    if imap.m != base.n:
        raise BadArity(f"{kind} takes {base.n} slot(s), got {imap.m}")
    return embed(base, imap)


def wrap(i: int, N: int) -> int:
    """Representative of i mod N in 1..N."""
    return (i - 1) % N + 1


def slot2(s: int, i: int, N: int) -> int:
    """Global slot of the hierarchical index s:i (space s, site i)."""
    return (s - 1) * N + wrap(i, N)


def slot3(s: int, i: int, j: int, N: int) -> int:
    """Global slot of s:i:j, flattened space-major, then block, then site."""
    return ((s - 1) * N + (wrap(i, N) - 1)) * N + wrap(j, N)


def _check_index(i, N, name="index"):
    if not 1 <= i <= N:
        raise BadIndex(f"{name} {i} outside 1..{N}")


def make_G(N: int) -> MonOp:
    """G on 2N variables: t_{1:i} -> t_{1:i} t_{2:i} / t_{2:i+1}, t_{2:j} -> t_{2:j+1}."""
    if N < 2:
        raise BadIndex("N must be at least 2")
    images = {}
    for i in range(1, N + 1):
        img = {slot2(1, i, N): 1}
        for s, e in ((slot2(2, i, N), 1), (slot2(2, i + 1, N), -1)):
            img[s] = img.get(s, 0) + e
        images[slot2(1, i, N)] = img
        images[slot2(2, i, N)] = {slot2(2, i + 1, N): 1}
    return substitution(2 * N, images)


def make_bigG(N: int) -> MonOp:
    """The operator on 2N^2 variables with
    t_{1:i:j} -> t_{1:i:j} prod_m t_{2:m:j-i} / t_{2:m:j-i+1}, t_{2:k:l} fixed."""
    if N < 2:
        raise BadIndex("N must be at least 2")
    images = {}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            img = {slot3(1, i, j, N): 1}
            for m in range(1, N + 1):
                for s, e in ((slot3(2, m, j - i, N), 1), (slot3(2, m, j - i + 1, N), -1)):
                    img[s] = img.get(s, 0) + e
            images[slot3(1, i, j, N)] = {k: e for k, e in img.items() if e}
    return substitution(2 * N * N, images)


def block_map(blocks: Sequence[int], N: int, n: int) -> IndexMap:
    """Map (A^N)^{⊗len(blocks)} into an n-variable space; block r -> 1-based block blocks[r]."""
    return IndexMap([(blk - 1) * N + k for blk in blocks for k in range(1, N + 1)], n)


def make_G_bracket(i: int, j: int, N: int) -> MonOp:
    """prod over k descending i..N, l ascending 1..j of G_{1:k,2:l} on 2N^2 variables."""
    _check_index(i, N, "i")
    _check_index(j, N, "j")
    G = make_G(N)
    n = 2 * N * N
    out = MonOp.identity(n)
    # outer l ascending, inner k descending; factors with distinct k and l commute
    for l in range(1, j + 1):
        for k in range(N, i - 1, -1):
            out = out * embed(G, block_map([k, N + l], N, n))
    return out


# ---------------------------------------------------------------------------
# partial trace


def _trace_sig(s: Sig, k: int) -> tuple[Sig, int]:
    n = s.n
    A, b, lam = s.A, s.b, s.lam
    d = 1 - A[k][k]
    if d == 0:
        raise TraceDiverges(f"diagonal sum over slot {k + 1} has unit self-coupling")
    row = A[k]
    if b[k] % d or any(row[j] % d for j in range(n) if j != k):
        raise NonMonomialTrace(f"traced exponent over slot {k + 1} is not integral")
    # traced exponent m = (sum_{j!=k} A_kj a_j + b_k) / d
    mcoef = [row[j] // d if j != k else 0 for j in range(n)]
    m0 = b[k] // d
    keep = [j for j in range(n) if j != k]
    new_A = tuple(tuple(A[i][j] + A[i][k] * mcoef[j] for j in keep) for i in keep)
    new_b = tuple(b[i] + A[i][k] * m0 for i in keep)
    new_lam = tuple(lam[j] + lam[k] * mcoef[j] for j in keep)
    return make_sig(new_lam, new_A, new_b), lam[k] * m0


def partial_trace(op, k: int) -> OpSum:
    """Formal trace over the 1-based slot k (delta-collapsed diagonal sum)."""
    op = as_opsum(op)
    if not 1 <= k <= op.n:
        raise BadIndex(f"slot {k} outside 1..{op.n}")
    acc: dict[Sig, QRat] = {}
    for s, c in op.terms.items():
        sig, e = _trace_sig(s, k - 1)
        val = c.times_q_power(e)
        old = acc.get(sig)
        acc[sig] = val if old is None else old + val
    return OpSum(op.n - 1, acc)


def trace_precondition_ok(s: Sig, k: int) -> bool:
    d = 1 - s.A[k - 1][k - 1]
    return d != 0 and s.b[k - 1] % d == 0 and all(
        s.A[k - 1][j] % d == 0 for j in range(s.n) if j != k - 1
    )


# ---------------------------------------------------------------------------
# rendering


def _lin(coeffs, const=0):
    parts = []
    for j, c in enumerate(coeffs):
        if not c:
            continue
        v = f"a{j + 1}"
        mag = abs(c)
        body = v if mag == 1 else f"{mag}{v}"
        parts.append(("-" if c < 0 else "+", body))
    if const:
        parts.append(("-" if const < 0 else "+", str(abs(const))))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sg, body in parts[1:]:
        out += sg + body
    return out


def render_monop(coeff: QRat, s: Sig) -> str:
    """e.g. ``q^{a2} · t^(a1, a1+a3, a2-a1)``."""
    pieces = []
    if not coeff.is_one():
        pieces.append(f"({coeff})" if " " in str(coeff) else str(coeff))
    if any(s.lam):
        pieces.append(f"q^{{{_lin(s.lam)}}}")
    pieces.append("t^(" + ", ".join(_lin(row, bi) for row, bi in zip(s.A, s.b)) + ")")
    return " · ".join(pieces)


def _elementary_factors(A):
    """Write a unimodular A as a product of S/S^-1/P matrices.

    Returns a list of (kind, i, j, power) with kind in {"S", "P"} such that
    A equals the left-to-right product of the corresponding substitution
    matrices.  S[i,j] has matrix I + E_{j,i}; P[i,j] swaps i and j.
    """
    n = len(A)
    M = [list(r) for r in A]
    ops = []  # row operations applied to M, in order: M <- E M

    def add_row(dst, src, c):  # row dst += c * row src  ==  S[src,dst]^c
        for x in range(n):
            M[dst][x] += c * M[src][x]
        ops.append(("S", src + 1, dst + 1, c))

    def swap(r1, r2):
        M[r1], M[r2] = M[r2], M[r1]
        ops.append(("P", r1 + 1, r2 + 1, 1))

    for c in range(n):
        while True:
            rows = [r for r in range(c, n) if M[r][c] != 0]
            if not rows:
                raise NotInvertible("exponent matrix is not unimodular")
            p = min(rows, key=lambda r: abs(M[r][c]))
            if p != c:
                swap(p, c)
            done = True
            for r in range(c + 1, n):
                if M[r][c]:
                    add_row(r, c, -(M[r][c] // M[c][c]))
                    if M[r][c]:
                        done = False
            if done:
                break
        if abs(M[c][c]) != 1:
            raise NotInvertible("exponent matrix is not unimodular")
        for r in range(c):
            if M[r][c]:
                add_row(r, c, -M[r][c] * M[c][c])
    # M is now diagonal with +-1 entries; flip negative ones pairwise via J = [[0,1],[-1,0]]
    for c in range(n):
        if M[c][c] == -1:
            if n < 2:
                raise NotInvertible("one-variable inversion t -> 1/t has no generator form")
            other = 0 if c != 0 else 1
            # diag(-1 at c) = P_{c,o} J_{c,o};  J = E_{co}(1) E_{oc}(-1) E_{co}(1)
            for kind, i, j, pw in (("S", other + 1, c + 1, 1), ("S", c + 1, other + 1, -1), ("S", other + 1, c + 1, 1), ("P", c + 1, other + 1, 1)):
                # apply inverse row operation to M so M tracks the remaining factor
                if kind == "P":
                    M[i - 1], M[j - 1] = M[j - 1], M[i - 1]
                else:
                    for x in range(n):
                        M[j - 1][x] += pw * M[i - 1][x]
                ops.append((kind, i, j, pw))
            # each listed op was applied as a row operation; M stays diagonal
    if any(M[i][j] != (1 if i == j else 0) for i in range(n) for j in range(n)):
        raise NotInvertible("reduction did not reach the identity")
    # ops_k ... ops_1 A = I  =>  A = ops_1^-1 ... ops_k^-1
    out = []
    for kind, i, j, pw in ops:
        out.append((kind, i, j, -pw if kind == "S" else 1))
    return out


def monop_expr(m: MonOp) -> str:
    """A parseable product of generators equal to m: coeff * v^b * subst(A) * u^lam."""
    s = m.sig
    parts = [] if m.coeff.is_one() else [m.coeff.to_expr()]
    for i, bi in enumerate(s.b):
        if bi:
            parts.append(f"v[{i + 1}]^{bi}" if bi != 1 else f"v[{i + 1}]")
    for kind, i, j, pw in _elementary_factors(s.A):
        g = f"{kind}[{i},{j}]"
        parts.append(g if pw == 1 else f"{g}^{pw}")
    for i, li in enumerate(s.lam):
        if li:
            parts.append(f"u[{i + 1}]^{li}" if li != 1 else f"u[{i + 1}]")
    return "*".join(parts) or "1"


def exponent_window(n: int, W: int):
    """All exponent vectors in {-W..W}^n."""
    return itertools.product(range(-W, W + 1), repeat=n)
