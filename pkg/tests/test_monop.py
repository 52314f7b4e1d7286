import random

import pytest

from naive import ARITY, act_generator, apply_word, monomials, random_word
from qtetra.errors import BadArity, BadIndex, NonInjectiveMap, NonMonomialTrace, NotInvertible, TraceDiverges
from qtetra.monop import (
    IndexMap,
    LPoly,
    MonOp,
    OpSum,
    apply,
    embed,
    make_bigG,
    make_G,
    make_G_bracket,
    make_generator,
    partial_trace,
    slot2,
    slot3,
    substitution,
    tensor,
    trace_precondition_ok,
)
from qtetra.scalar import ONE, Q, QRat, ZERO, q_power


def word_op(word, n):
    out = MonOp.identity(n)
    for kind, slots in word:
        out = out * make_generator(kind, list(slots), n)
    return out


@pytest.mark.parametrize("kind", sorted(ARITY))
def test_generator_matches_definition(kind):
    n = 4
    rng = random.Random(kind)
    slots = tuple(rng.sample(range(1, n + 1), ARITY[kind]))
    op = make_generator(kind, list(slots), n)
    for a in monomials(rng, n, 25):
        k, b = act_generator(kind, [s - 1 for s in slots], a)
        assert op.act(a) == (q_power(k), b)


def test_generator_examples():
    u = make_generator("u", [1], 1)
    v = make_generator("v", [1], 1)
    assert u * v == (v * u).scale(Q)
    F = make_generator("F", [1, 2, 3], 3)
    assert F * F == MonOp.identity(3)
    assert F.act((1, 0, 0)) == (ONE, (1, 1, -1))


@pytest.mark.parametrize("seed", range(12))
def test_composition_matches_sequential_application(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    word = random_word(rng, n, rng.randint(1, 7))
    op = word_op(word, n)
    for a in monomials(rng, n, 10):
        assert apply(op, LPoly.monomial(a)) == apply_word(word, LPoly.monomial(a))


@pytest.mark.parametrize("seed", range(8))
def test_inverse(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(1, 4)
    op = word_op(random_word(rng, n, 6), n).scale(Q + 2)
    assert op * op.inverse() == MonOp.identity(n)
    assert op.inverse() * op == MonOp.identity(n)
    assert op ** -2 == (op * op).inverse()


def test_non_unimodular_has_no_inverse():
    with pytest.raises(NotInvertible):
        MonOp.from_parts(1, (0,), ((2,),), (0,)).inverse()


def test_opsum_canonical_form():
    n = 2
    u1 = make_generator("u", [1], n)
    v2 = make_generator("v", [2], n)
    s = u1 + v2 - u1
    assert s == v2.to_sum()
    assert (u1 - u1).is_zero()
    assert OpSum.from_terms(n, [u1, v2]) == v2 + u1
    assert (u1 + v2).compose(u1 + v2) == u1 * u1 + u1 * v2 + v2 * u1 + v2 * v2


def test_arity_mismatch():
    with pytest.raises(BadArity):
        make_generator("u", [1], 1) * make_generator("u", [1], 2)
    with pytest.raises(BadArity):
        make_generator("F", [1, 2], 3)


def test_index_map_validation():
    with pytest.raises(BadIndex):
        IndexMap([0, 1], 3)
    with pytest.raises(NonInjectiveMap):
        IndexMap([1, 1], 3)


@pytest.mark.parametrize("seed", range(6))
def test_embedding_is_functorial(seed):
    rng = random.Random(200 + seed)
    op = word_op(random_word(rng, 3, 5), 3)
    inner = IndexMap(rng.sample(range(1, 6), 3), 5)
    outer = IndexMap(rng.sample(range(1, 8), 5), 7)
    assert embed(embed(op, inner), outer) == embed(op, inner.then(outer))


def test_embedding_preserves_products():
    rng = random.Random(7)
    a = word_op(random_word(rng, 3, 4), 3)
    b = word_op(random_word(rng, 3, 4), 3)
    m = IndexMap([5, 2, 4], 6)
    assert embed(a * b, m) == embed(a, m) * embed(b, m)


def test_tensor_factors_commute():
    rng = random.Random(3)
    a = word_op(random_word(rng, 2, 4), 2)
    b = word_op(random_word(rng, 3, 4), 3)
    one2, one3 = MonOp.identity(2), MonOp.identity(3)
    assert tensor(a, b) == tensor(a, one3) * tensor(one2, b) == tensor(one2, b) * tensor(a, one3)


def naive_trace(op, k, a_rest, window=40):
    """Sum over m of the t_k^m -> t_k^m diagonal of op applied to t^(a_rest with m at k)."""
    acc = {}
    for m in range(-window, window + 1):
        a = a_rest[: k - 1] + (m,) + a_rest[k - 1:]
        for out, c in apply(op, LPoly.monomial(a)).terms.items():
            if out[k - 1] == m:
                key = out[: k - 1] + out[k:]
                acc[key] = acc.get(key, ZERO) + c
    return LPoly(len(a_rest), acc)


def traceable_op(rng, n):
    while True:
        op = (word_op(random_word(rng, n, 5, ["F", "P", "S", "S_inv", "u", "v", "v_inv"]), n)
              + word_op(random_word(rng, n, 3, ["F", "P", "u", "v"]), n).scale(QRat(2)))
        k = rng.randint(1, n)
        if all(trace_precondition_ok(s, k) for s in op.terms):
            return op, k


@pytest.mark.parametrize("seed", range(20))
def test_trace_matches_diagonal_sum(seed):
    rng = random.Random(300 + seed)
    n = 3
    op, k = traceable_op(rng, n)
    tr = partial_trace(op, k)
    for a in monomials(rng, n - 1, 6, 2):
        assert apply(tr, LPoly.monomial(a)) == naive_trace(op, k, a)


@pytest.mark.parametrize("seed", range(10))
def test_trace_refuses_without_precondition(seed):
    rng = random.Random(400 + seed)
    while True:
        op = word_op(random_word(rng, 3, 4), 3).to_sum()
        k = rng.randint(1, 3)
        if not all(trace_precondition_ok(s, k) for s in op.terms):
            break
    with pytest.raises((TraceDiverges, NonMonomialTrace)):
        partial_trace(op, k)


def test_trace_of_swap_is_identity():
    assert partial_trace(make_generator("P", [1, 2], 2), 2) == OpSum.identity(1)


def test_trace_errors():
    with pytest.raises(TraceDiverges):
        partial_trace(make_generator("u", [1], 2), 1)
    flip = MonOp.from_parts(1, (0,), ((-1,),), (1,))  # t^a -> t^(1-a): 2m = 1
    with pytest.raises(NonMonomialTrace):
        partial_trace(flip, 1)
    with pytest.raises(BadIndex):
        partial_trace(make_generator("P", [1, 2], 2), 3)


def test_slot_flattening():
    N = 3
    assert slot2(1, 1, N) == 1 and slot2(2, 1, N) == 4 and slot2(2, 4, N) == 4
    assert slot3(1, 1, 1, N) == 1 and slot3(2, 3, 3, N) == 18 and slot3(1, 2, 0, N) == 6


@pytest.mark.parametrize("N", [2, 3])
def test_G_action(N):
    G = make_G(N)
    n = 2 * N
    rng = random.Random(N)
    for a in monomials(rng, n, 8):
        # t^a with t_{1:i} -> t_{1:i} t_{2:i}/t_{2:i+1}, t_{2:j} -> t_{2:j+1}
        b = [0] * n
        for i in range(1, N + 1):
            x1 = a[slot2(1, i, N) - 1]
            b[slot2(1, i, N) - 1] += x1
            b[slot2(2, i, N) - 1] += x1
            b[slot2(2, i + 1, N) - 1] -= x1
            b[slot2(2, i + 1, N) - 1] += a[slot2(2, i, N) - 1]
        assert G.act(a) == (ONE, tuple(b))


@pytest.mark.parametrize("N", [2, 3])
def test_bigG_is_G_bracket(N):
    assert make_bigG(N) == make_G_bracket(1, N, N)


def test_substitution_errors():
    with pytest.raises(BadIndex):
        substitution(2, {3: {1: 1}})
