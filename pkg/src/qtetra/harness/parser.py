"""Operator-expression parser for ad-hoc evaluation.

Grammar::

    expr   := term { "*" term } { ("+"|"-") expr } ;
    term   := atom [ "^" signed-int ] ;
    atom   := gen "[" int { "," int } "]" | "psi" "(" param "*" expr ")"
            | "q" | rational | param | "(" expr ")" ;
    gen    := "u" | "v" | "w" | "wt" | "F" | "S" | "P" | "G" ;

Also accepted: a leading unary minus on any term, ``a/b`` rational literals
and any parameter monomial in front of the ``psi`` argument.  ``G`` takes 2N
slots (first copy then second copy) and builds the N-site operator G.
Expressions without parameters evaluate to an :class:`OpSum`; otherwise to a
:class:`PSeries` truncated at the given cap.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ExprSyntaxError
from ..monop import IndexMap, OpSum, embed, identity_sig, make_G, make_generator
from ..scalar import Q, QRat
from ..series import PSeries, psi_series

GENERATORS = {"u": "u", "v": "v", "w": "w", "wt": "w_tilde", "F": "F", "S": "S", "P": "P"}
RESERVED = set(GENERATORS) | {"G", "psi", "q"}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[-+*^()\[\],]))")


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """(kind, value, position) triples ending with an 'end' token."""
    out, pos = [], 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if not rest.strip():
                out.append(("end", "", len(text)))
                return out
            bad = pos + len(rest) - len(rest.lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()


def _find_params(tokens) -> list[tuple[str, int]]:
    seen = {}
    for kind, val, pos in tokens:
        if kind == "id" and val not in RESERVED and val not in seen:
            seen[val] = pos
    return sorted(seen.items())


class _Parser:
    def __init__(self, text: str, n: int, cap: int | None):
        if n < 1:
            raise ValueError("arity must be positive")
        self.text, self.n = text, n
        self.toks = tokenize(text)
        self.k = 0
        found = _find_params(self.toks)
        if found and cap is None:
            raise ExprSyntaxError(f"parameter {found[0][0]!r} needs a series cap", found[0][1])
        self.params = tuple(p for p, _ in found)
        self.cap = 0 if cap is None else cap

    # -- token helpers -------------------------------------------------

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, val):
        kind, v, pos = self.take()
        if v != val or kind == "end":
            raise ExprSyntaxError(f"expected {val!r}, found {v or 'end of input'!r}", pos)

    def const(self, c) -> PSeries:
        return PSeries.constant(self.params, self.cap, OpSum.scalar(self.n, c))

    # -- grammar ---------------------------------------------------------

    def parse(self):
        value = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", pos)
        return value

    def expr(self) -> PSeries:
        value = self.product()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "sym":
            op = self.take()[1]
            rhs = self.product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def product(self) -> PSeries:
        value = self.signed()
        while self.peek()[1] == "*" and self.peek()[0] == "sym":
            self.take()
            value = value.mul(self.signed())
        return value

    def signed(self) -> PSeries:
        if self.peek()[0] == "sym" and self.peek()[1] == "-":
            self.take()
            return -self.signed()
        return self.term()

    def term(self) -> PSeries:
        start = self.peek()[2]
        value = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "sym":
            self.take()
            sign = 1
            if self.peek()[1] in ("-", "+") and self.peek()[0] == "sym":
                sign = -1 if self.take()[1] == "-" else 1
            kind, v, pos = self.take()
            if kind != "num" or "/" in v:
                raise ExprSyntaxError("exponent must be an integer", pos)
            value = self.power(value, sign * int(v), start)
        return value

    def power(self, value: PSeries, k: int, pos: int) -> PSeries:
        if k >= 0:
            out = PSeries.one(self.params, self.cap, self.n)
            for _ in range(k):
                out = out.mul(value)
            return out
        op = self._constant_part(value)
        if op is None:
            raise ExprSyntaxError("negative power of a parameter-dependent factor", pos)
        return PSeries.constant(self.params, self.cap, _invert(op, pos) ** (-k))

    def _constant_part(self, value: PSeries):
        if any(sum(e) for e in value.coeffs):
            return None
        return value.coeff((0,) * len(self.params))

    def atom(self) -> PSeries:
        kind, v, pos = self.take()
        if kind == "num":
            return self.const(QRat(Fraction(v)))
        if kind == "sym" and v == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind != "id":
            raise ExprSyntaxError(f"unexpected {v or 'end of input'!r}", pos)
        if v == "q":
            return self.const(Q)
        if v == "psi":
            return self.psi(pos)
        if v in GENERATORS or v == "G":
            return PSeries.constant(self.params, self.cap, self.generator(v, pos))
        e = tuple(1 if p == v else 0 for p in self.params)
        return PSeries(self.params, self.cap, self.n, {e: OpSum.identity(self.n)})

    def generator(self, name: str, pos: int):
        self.expect("[")
        slots = [self.index()]
        while self.peek()[1] == ",":
            self.take()
            slots.append(self.index())
        self.expect("]")
        if name == "G":
            if len(slots) % 2 or len(slots) < 4:
                raise ExprSyntaxError("G takes 2N slots with N >= 2", pos)
            return embed(make_G(len(slots) // 2), IndexMap(slots, self.n))
        return make_generator(GENERATORS[name], slots, self.n)

    def index(self) -> int:
        kind, v, pos = self.take()
        if kind != "num" or "/" in v:
            raise ExprSyntaxError("slot index must be a positive integer", pos)
        return int(v)

    def psi(self, pos: int) -> PSeries:
        self.expect("(")
        arg = self.expr()
        self.expect(")")
        if len(arg.coeffs) != 1:
            raise ExprSyntaxError("psi argument must be a single parameter monomial times an operator", pos)
        (e, op), = arg.coeffs.items()
        if sum(e) < 1:
            raise ExprSyntaxError("psi argument needs a parameter monomial of degree >= 1", pos)
        return psi_series(self.params, e, op, self.cap)


def _invert(op: OpSum, pos: int) -> OpSum:
    terms = op.monops()
    if len(terms) == 1 and terms[0].sig is identity_sig(op.n):
        return OpSum.scalar(op.n, terms[0].coeff.inv())
    if len(terms) != 1:
        raise ExprSyntaxError("only single-term operators can be inverted", pos)
    return op.inverse()


def parse_expr(text: str, n: int, cap: int | None = None):
    """Evaluate ``text`` over n variables; OpSum without parameters, PSeries with them."""
    p = _Parser(text, n, cap)
    value = p.parse()
    if not p.params:
        return value.coeff(())
    return value
