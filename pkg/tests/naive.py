"""Independent reference semantics for the generators.

Each generator is written directly from its action on functions f(t), as a
map on single monomials (exponent vector -> (q-exponent, new exponent)).  No
engine composition, embedding or matrix code is used here.
"""

import random

from qtetra.monop import LPoly
from qtetra.scalar import ZERO, q_power


def _u(a, i, s=1):
    return s * a[i], a


def _v(a, i, s=1):
    b = list(a)
    b[i] += s
    return 0, tuple(b)


def act_generator(kind, slots, a):
    """(q-exponent, exponent) for one generator applied to t^a; slots are 0-based."""
    if kind == "u":
        return _u(a, slots[0])
    if kind == "u_inv":
        return _u(a, slots[0], -1)
    if kind == "v":
        return _v(a, slots[0])
    if kind == "v_inv":
        return _v(a, slots[0], -1)
    if kind in ("w", "w_tilde"):
        # v u^{+-1}: first the q-weight, then the shift
        k, _ = _u(a, slots[0], 1 if kind == "w" else -1)
        return k, _v(a, slots[0])[1]
    b = list(a)
    if kind == "F":
        # f(t1, t2, t3) -> f(t1 t2 / t3, t3, t2)
        i, j, k = slots
        b[j] = a[i] + a[k]
        b[k] = a[j] - a[i]
    elif kind == "S":
        # f(t1, t2) -> f(t1 t2, t2)
        i, j = slots
        b[j] = a[i] + a[j]
    elif kind == "S_inv":
        i, j = slots
        b[j] = a[j] - a[i]
    elif kind == "P":
        i, j = slots
        b[i], b[j] = a[j], a[i]
    else:
        raise ValueError(kind)
    return 0, tuple(b)


def apply_word(word, poly: LPoly, coeff=None) -> LPoly:
    """Apply the operator product word[0] word[1] ... (rightmost acts first)."""
    terms = dict(poly.terms)
    for kind, slots in reversed(word):
        out = {}
        for a, c in terms.items():
            k, b = act_generator(kind, [s - 1 for s in slots], a)
            out[b] = out.get(b, ZERO) + c * q_power(k)
        terms = out
    res = LPoly(poly.n, terms)
    if coeff is not None:
        res = LPoly(poly.n, {a: c * coeff for a, c in res.terms.items()})
    return res


ARITY = {"u": 1, "u_inv": 1, "v": 1, "v_inv": 1, "w": 1, "w_tilde": 1, "F": 3, "S": 2, "S_inv": 2, "P": 2}


def random_word(rng: random.Random, n: int, length: int, kinds=None):
    kinds = [k for k in (kinds or ARITY) if ARITY[k] <= n]
    word = []
    for _ in range(length):
        k = rng.choice(kinds)
        word.append((k, tuple(rng.sample(range(1, n + 1), ARITY[k]))))
    return word


def monomials(rng: random.Random, n: int, count: int, spread: int = 3):
    return [tuple(rng.randint(-spread, spread) for _ in range(n)) for _ in range(count)]
