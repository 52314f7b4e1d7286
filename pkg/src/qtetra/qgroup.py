"""Quantum-group layer: e/f operators, the kappa representation, R-matrices.

Everything lives inside the representation on Laurent polynomials in N^2
variables (one copy) or 2N^2 variables (two tensor copies).  Hierarchical
indices are flattened with :func:`~qtetra.monop.slot2` /
:func:`~qtetra.monop.slot3`; site indices are taken mod N with
representatives 1..N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import BadIndex, UngradedTerm
from .monop import (
    IndexMap,
    MonOp,
    OpSum,
    block_map,
    embed,
    identity_sig,
    make_bigG,
    make_G,
    make_G_bracket,
    make_generator,
    partial_trace,
    slot2,
    tensor,
    trace_precondition_ok,
    wrap,
)
from .scalar import Q, QRat
from .series import PSeries, build_B, embed_series, mono, ordered_product, psi_series


def _gen(kind: str, s: int, i: int, N: int, n: int | None = None) -> MonOp:
    n = N * N if n is None else n
    return make_generator(kind, slot2(s, i, N), n)


def _prod(ops: Sequence[MonOp]) -> MonOp:
    out = ops[0]
    for o in ops[1:]:
        out = out * o
    return out


def _check_ik(i, k, N):
    if N < 2:
        raise BadIndex("N must be at least 2")
    if not 1 <= i <= N - 1:
        raise BadIndex(f"root index {i} outside 1..{N - 1}")
    if not 1 <= k <= N:
        raise BadIndex(f"site index {k} outside 1..{N}")


@lru_cache(maxsize=None)
def build_e(i: int, k: int, N: int) -> OpSum:
    """wt_{k:i+k} u_{k:i+k-1} prod_{m=k}^{N} u^2_{m:i+m} u^-1_{m:i+m-1} u^-1_{m:i+m+1}."""
    _check_ik(i, k, N)
    g = lambda kind, s, j: _gen(kind, s, j, N)
    ops = [g("w_tilde", k, i + k), g("u", k, i + k - 1)]
    for m in range(k, N + 1):
        ops += [g("u", m, i + m), g("u", m, i + m), g("u_inv", m, i + m - 1), g("u_inv", m, i + m + 1)]
    return _prod(ops).to_sum()


@lru_cache(maxsize=None)
def build_f(i: int, k: int, N: int) -> OpSum:
    """prod_{m=1}^{k} v_{m:i} v^-1_{m:i+1} · u_{k:i+1} w^-1_{k:i}."""
    _check_ik(i, k, N)
    g = lambda kind, s, j: _gen(kind, s, j, N)
    ops = []
    for m in range(1, k + 1):
        ops += [g("v", m, i), g("v_inv", m, i + 1)]
    ops += [g("u", k, i + 1), g("w_inv", k, i)]
    return _prod(ops).to_sum()


@dataclass
class GenSet:
    """kappa-images on N^2 variables."""

    N: int
    e: dict = field(default_factory=dict)
    f: dict = field(default_factory=dict)
    E: dict = field(default_factory=dict)
    F: dict = field(default_factory=dict)
    K: dict = field(default_factory=dict)
    L: dict = field(default_factory=dict)
    Eroot: dict = field(default_factory=dict)
    Froot: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.N * self.N

    def Z(self, i):
        return self.K[i] * self.L[i]


def _qcomm_root(a: OpSum, b: OpSum) -> OpSum:
    # (a b - q b a) / (1 - q^2)
    return (a * b - (b * a).scale(Q)).scale((1 - Q * Q).inv())


@lru_cache(maxsize=None)
def build_kappa(N: int, e_override=None) -> GenSet:
    """Images of E_i, F_i, K_i, L_i and of the root vectors E_ij, F_ij.

    ``e_override`` maps (i, k) -> (i', k') to swap in a different e operator,
    used for negative controls.
    """
    if N < 2:
        raise BadIndex("N must be at least 2")
    gs = GenSet(N)
    ov = dict(e_override or ())
    for i in range(1, N):
        for k in range(1, N + 1):
            gs.e[i, k] = build_e(*ov.get((i, k), (i, k)), N)
            gs.f[i, k] = build_f(i, k, N)
        gs.E[i] = sum((gs.e[i, k] for k in range(2, N + 1)), gs.e[i, 1])
        gs.F[i] = sum((gs.f[i, k] for k in range(2, N + 1)), gs.f[i, 1])
        gs.K[i] = gs.e[i, 1] * gs.f[i, 1]
        gs.L[i] = gs.f[i, N] * gs.e[i, N]
    for i in range(1, N):
        gs.Eroot[i, i + 1] = gs.E[i]
        gs.Froot[i, i + 1] = gs.F[i]
    for i in range(1, N):
        for j in range(i + 1, N):
            gs.Eroot[i, j + 1] = _qcomm_root(gs.E[j], gs.Eroot[i, j])
            gs.Froot[i, j + 1] = _qcomm_root(gs.F[j], gs.Froot[i, j])
    return gs


def cartan_matrix(N: int) -> list[list[int]]:
    r = N - 1
    return [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(r)] for i in range(r)]


def _rational_inverse(a):
    n = len(a)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


@dataclass
class CartanData:
    """Cartan matrix, its rational inverse, and the torus data of kappa(K_i), kappa(L_i).

    kappa(K_i) is diagonal, t^a -> q^{h_i . a} t^a.  kappa(L_i) is a pure
    lattice translation t^a -> t^{a + l_i} (A = 1, no q-weight), so it is stored
    as ``h_tilde[i]`` (its q-weight, zero) together with ``l_shift[i]``.
    """

    N: int
    a: list
    a_inv: list
    h: dict
    h_tilde: dict
    l_shift: dict


@lru_cache(maxsize=None)
def cartan_data(N: int) -> CartanData:
    gs = build_kappa(N)
    a = cartan_matrix(N)
    ainv = _rational_inverse(a)
    unit = identity_sig(N * N).A
    h, ht, ls = {}, {}, {}
    for i in range(1, N):
        k, l = gs.K[i].single(), gs.L[i].single()
        if k.sig.A != unit or any(k.sig.b) or not k.coeff.is_one():
            raise UngradedTerm(f"kappa(K_{i}) is not a pure q-weight")
        if l.sig.A != unit:
            raise UngradedTerm(f"kappa(L_{i}) is not a torus element")
        h[i] = k.sig.lam
        ht[i] = l.sig.lam
        ls[i] = l.sig.b
    return CartanData(N, a, ainv, h, ht, ls)


# ---------------------------------------------------------------------------
# R-matrices on (A^N)^{⊗2}


def _rot_params(xs: Sequence, j: int, N: int):
    """tau^j applied to a length-N vector: entry i becomes xs[i - j]."""
    return [xs[(i - j) % N] for i in range(N)]


def build_R_closed(N: int, j: int, params: Sequence[str], x_monos: Sequence, cap: int) -> PSeries:
    """G prod_{i desc 1..N-1} psi(x_i wt_{1:i+j} u_{1:i+j-1} u_{2:i+j} w^-1_{2:i+j-1}) on 2N variables.

    ``x_monos[i-1]`` is the parameter monomial standing for x_i (i < N); this is
    R at the rotated parameter tau^j(x_1, ..., x_{N-1}, 0).
    """
    if not 0 <= j < N:
        raise BadIndex(f"rotation {j} outside 0..{N - 1}")
    n = 2 * N
    g = lambda kind, s, i: _gen(kind, s, i, N, n)
    factors = []
    for i in range(N - 1, 0, -1):
        arg = g("w_tilde", 1, i + j) * g("u", 1, i + j - 1) * g("u", 2, i + j) * g("w_inv", 2, i + j - 1)
        m = x_monos[i - 1]
        if m is None:
            continue
        factors.append(psi_series(params, m, arg, cap))
    out = PSeries.constant(params, cap, make_G(N))
    for f in factors:
        out = out.mul(f)
    return out


def build_monodromy(N: int, params: Sequence[str], x_monos: Sequence, cap: int) -> PSeries:
    """prod_{i desc 1..N} B^{x_i}_{1:i,2:i,3} on 2N+1 variables (None = zero parameter)."""
    n = 2 * N + 1
    fs = [build_B(params, x_monos[i - 1], [i, N + i, n], n, cap) for i in range(1, N + 1)]
    return ordered_product(fs, "down")


def trace_series(s: PSeries, k: int) -> PSeries:
    return PSeries(s.params, s.cap, s.n - 1, {e: partial_trace(c, k) for e, c in s.coeffs.items()})


def trace_precondition_report(s: PSeries, k: int) -> tuple[int, int]:
    """(terms checked, terms violating the formal-trace precondition)."""
    total = bad = 0
    for c in s.coeffs.values():
        for sig in c.terms:
            total += 1
            if not trace_precondition_ok(sig, k):
                bad += 1
    return total, bad


def build_R_trace(N: int, params: Sequence[str], x_monos: Sequence, cap: int) -> PSeries:
    """Tr_3 of the monodromy operator: R at an arbitrary multi-parameter."""
    B = build_monodromy(N, params, x_monos, cap)
    return trace_series(B, 2 * N + 1)


# ---------------------------------------------------------------------------
# the big R on ((A^N)^{⊗N})^{⊗2}


def build_bigR(N: int, params: Sequence[str], x_monos: Sequence, cap: int, route: str = "product", r_source: str = "trace") -> PSeries:
    """Big R on 2N^2 variables.

    route="product": prod_{j asc} prod_{i desc} R^{tau^i(x)}_{1:i,2:j}, with each
    R either traced from the monodromy (r_source="trace", any x) or taken in
    closed form (r_source="closed", requires x_N = None).
    route="closed": prod_{j asc} prod_{i desc} prod_{k desc} psi(x_k e_{k,i} ⊗ f_{k,j}) · bigG
    (requires x_N = None).
    """
    n = 2 * N * N
    if route == "closed":
        if x_monos[N - 1] is not None:
            raise ValueError("closed route needs x_N = 0")
        gs = build_kappa(N)
        out = PSeries.one(params, cap, n)
        for j in range(1, N + 1):
            for i in range(N, 0, -1):
                for k in range(N - 1, 0, -1):
                    arg = tensor(gs.e[k, i], gs.f[k, j])
                    out = out.mul(psi_series(params, x_monos[k - 1], arg, cap))
        return out.right_mul(make_bigG(N))
    if route != "product":
        raise ValueError(f"unknown route {route!r}")
    Rs = {}
    for i in range(1, N + 1):
        xs = _rot_params(x_monos, i, N)
        if r_source == "trace":
            Rs[i] = build_R_trace(N, params, xs, cap)
        elif r_source == "closed":
            if x_monos[N - 1] is not None:
                raise ValueError("closed R needs x_N = 0")
            Rs[i] = build_R_closed(N, i % N, params, x_monos[: N - 1], cap)
        else:
            raise ValueError(f"unknown R source {r_source!r}")
    out = PSeries.one(params, cap, n)
    for j in range(1, N + 1):
        for i in range(N, 0, -1):
            out = out.mul(embed_series(Rs[i], block_map([i, N + j], N, n)))
    return out


# ---------------------------------------------------------------------------
# Conjecture-type identity: both sides


def mfor_lhs(N: int, params: Sequence[str], cap: int) -> PSeries:
    gs = build_kappa(N)
    n = 2 * N * N
    out = PSeries.one(params, cap, n)
    for j in range(1, N + 1):
        for i in range(N, 0, -1):
            for k in range(N - 1, 0, -1):
                out = out.mul(psi_series(params, params[k - 1], tensor(gs.e[k, i], gs.f[k, j]), cap))
    return out


def root_param_monomial(params: Sequence[str], i: int, j: int) -> tuple:
    """X_{i,j} = x_i x_{i+1} ... x_{j-1}."""
    return mono(params, {params[k - 1]: 1 for k in range(i, j)})


def mfor_rhs(N: int, params: Sequence[str], cap: int, x_names=True, extra=None) -> PSeries:
    """prod_{i desc 1..N-1} prod_{j desc i+1..N} psi(X_ij kappa(E_ij) ⊗ kappa(F_ij)).

    With ``x_names=False`` every X_ij is 1 (the unmarked series); ``extra`` is an
    additional monomial multiplied into every argument.
    """
    gs = build_kappa(N)
    n = 2 * N * N
    out = PSeries.one(params, cap, n)
    for i in range(N - 1, 0, -1):
        for j in range(N, i, -1):
            m = root_param_monomial(params, i, j) if x_names else (0,) * len(params)
            if extra is not None:
                m = tuple(a + b for a, b in zip(m, mono(params, extra)))
            out = out.mul(psi_series(params, m, tensor(gs.Eroot[i, j], gs.Froot[i, j]), cap))
    return out


# ---------------------------------------------------------------------------
# rho_x as grading bookkeeping


def e_grading(sig, N: int) -> tuple:
    """Root-lattice degree (n_1..n_{N-1}) of a monomial operator whose first N^2 slots
    carry an E-type factor, read off from conjugation by kappa(K_k) ⊗ 1."""
    cd = cartan_data(N)
    b = sig.b[: N * N]
    # K_k X K_k^-1 = q^{h_k . b} X  requires A^T h_k = h_k on the first block
    pair = []
    for k in range(1, N):
        h = cd.h[k]
        full = tuple(h) + (0,) * (sig.n - len(h))
        At_h = tuple(sum(sig.A[r][c] * full[r] for r in range(sig.n)) for c in range(sig.n))
        if At_h != full:
            raise UngradedTerm("term does not have a definite grading")
        pair.append(sum(x * y for x, y in zip(h, b)))
    # a n = pair  =>  n = a_inv pair
    n = [sum(cd.a_inv[r][c] * pair[c] for c in range(N - 1)) for r in range(N - 1)]
    if any(Fraction(x).denominator != 1 for x in n):
        raise UngradedTerm("grading is not in the root lattice")
    return tuple(int(x) for x in n)


def apply_rho(series: PSeries, N: int, markers: Sequence[str | None], direction: str = "forward") -> PSeries:
    """Attach (forward) or detach (inverse) x^n to every term of E-grading n.

    ``markers[k-1]`` names the parameter playing x_k, or None for x_k = 1.
    Forward raises degrees, so terms pushed beyond the cap are dropped.
    """
    sign = {"forward": 1, "inverse": -1}[direction]
    pos = [series.params.index(m) if m is not None else None for m in markers]
    acc: dict[tuple, dict] = {}
    for e, c in series.coeffs.items():
        for sig, val in c.terms.items():
            g = e_grading(sig, N)
            new = list(e)
            for k, p in enumerate(pos):
                if p is not None:
                    new[p] += sign * g[k]
            if any(x < 0 for x in new):
                raise UngradedTerm(f"term of grading {g} cannot be detached from {e}")
            if sum(new) > series.cap:
                continue
            d = acc.setdefault(tuple(new), {})
            d[sig] = d[sig] + val if sig in d else val
    return PSeries(series.params, series.cap, series.n, {e: OpSum(series.n, d) for e, d in acc.items()})


# ---------------------------------------------------------------------------
# relation suites living at the representation level


def _qscaled(x, k):
    from .scalar import q_power

    return x.scale(q_power(k))


def hopf_checks(N: int, gs: GenSet | None = None):
    """(name, anchor, thunk) triples for the defining relations of the algebra under kappa."""
    from .report import Outcome, compare_all
    from .scalar import Q

    gs = gs or build_kappa(N)
    r = range(1, N)
    a = cartan_matrix(N)
    K, L, E, F = gs.K, gs.L, gs.E, gs.F
    n = gs.n
    pairs = [(i, j) for i in r for j in r]

    def fam(fn, sel=lambda i, j: True):
        return lambda: compare_all((f"({i},{j})", *fn(i, j)) for i, j in pairs if sel(i, j))

    def serre(X, i, j):
        return X[i] * X[j] * X[j] + X[j] * X[j] * X[i], (X[j] * X[i] * X[j]).scale(Q + Q.inv())

    def z_nontrivial():
        bad = [i for i in r if gs.Z(i) == OpSum.identity(n)]
        return Outcome(not bad, len(r), len(r), 0, f"Z equals identity for {bad}" if bad else "")

    anchor = "kappa-homomorphism"
    return [
        ("[K_i,K_j] = [L_i,L_j] = [K_i,L_j] = 0", anchor, lambda: compare_all(
            [(f"KK{i}{j}", K[i] * K[j], K[j] * K[i]) for i, j in pairs]
            + [(f"LL{i}{j}", L[i] * L[j], L[j] * L[i]) for i, j in pairs]
            + [(f"KL{i}{j}", K[i] * L[j], L[j] * K[i]) for i, j in pairs])),
        ("K_i E_j = q^a_ij E_j K_i", anchor, fam(lambda i, j: (K[i] * E[j], _qscaled(E[j] * K[i], a[i - 1][j - 1])))),
        ("K_i F_j = q^-a_ij F_j K_i", anchor, fam(lambda i, j: (K[i] * F[j], _qscaled(F[j] * K[i], -a[i - 1][j - 1])))),
        ("L_i E_j = q^-a_ij E_j L_i", anchor, fam(lambda i, j: (L[i] * E[j], _qscaled(E[j] * L[i], -a[i - 1][j - 1])))),
        ("L_i F_j = q^a_ij F_j L_i", anchor, fam(lambda i, j: (L[i] * F[j], _qscaled(F[j] * L[i], a[i - 1][j - 1])))),
        ("[E_i,F_j] = delta_ij (1-q^2)(K_i-L_i)", anchor, fam(lambda i, j: (
            E[i] * F[j] - F[j] * E[i],
            (K[i] - L[i]).scale(1 - Q * Q) if i == j else OpSum.zero(n)))),
        ("Serre relation for E, |i-j| = 1", anchor, fam(lambda i, j: serre(E, i, j), lambda i, j: abs(i - j) == 1)),
        ("Serre relation for F, |i-j| = 1", anchor, fam(lambda i, j: serre(F, i, j), lambda i, j: abs(i - j) == 1)),
        ("[E_i,E_j] = [F_i,F_j] = 0, |i-j| > 1", anchor, lambda: compare_all(
            [(f"E{i}{j}", E[i] * E[j], E[j] * E[i]) for i, j in pairs if abs(i - j) > 1]
            + [(f"F{i}{j}", F[i] * F[j], F[j] * F[i]) for i, j in pairs if abs(i - j) > 1])),
        ("Z_i = K_i L_i is central", "centre", lambda: compare_all(
            (f"Z{i}-{nm}{j}", gs.Z(i) * X[j], X[j] * gs.Z(i))
            for i in r for j in r for nm, X in (("E", E), ("F", F), ("K", K), ("L", L)))),
        ("Z_i differs from the identity", "centre", z_nontrivial),
    ]


def _run(suite, N, order, checks, timings=True):
    from .report import VerifyReport, run_check

    rep = VerifyReport(suite, N, order)
    for name, anchor, fn in checks:
        rep.checks.append(run_check(name, anchor, fn, timings))
    return rep


def check_hopf_relations(N: int, timings: bool = True):
    return _run("hopf", N, 0, hopf_checks(N), timings)


def mfor_checks(N: int, cap: int):
    from .report import compare

    params = tuple(f"x{k}" for k in range(1, N))
    rho_params = params + ("s",)

    def rho_route():
        base = mfor_rhs(N, rho_params, cap, x_names=False, extra="s")
        direct = mfor_rhs(N, rho_params, cap, extra="s")
        fwd = apply_rho(base, N, list(params), "forward")
        back = apply_rho(direct, N, list(params), "inverse")
        o = compare(fwd, direct)
        if o.ok and apply_rho(back, N, list(params), "forward") != direct:
            o.ok, o.detail = False, "inverse then forward does not restore the marked series"
        return o

    return [
        ("ordered psi product = root-vector psi product", "root-vector-identity",
         lambda: compare(mfor_lhs(N, params, cap), mfor_rhs(N, params, cap))),
        ("rho attaches X_ij to the (i,j) root factor", "rho-grading", rho_route),
    ]


def check_mfor(N: int, cap: int, timings: bool = True):
    return _run("mfor", N, cap, mfor_checks(N, cap), timings)


def bigG_twist_checks(N: int, samples: int = 40):
    import random

    from .monop import LPoly, apply
    from .report import Outcome, compare, compare_all

    gs = build_kappa(N)
    n = gs.n
    one = OpSum.identity(n)

    def action():
        direct, product = make_bigG(N), make_G_bracket(1, N, N)
        rng = random.Random(20260101 + N)
        pts = [tuple(rng.randint(-2, 2) for _ in range(2 * n)) for _ in range(samples)]
        bad = [a for a in pts if apply(direct, LPoly.monomial(a)) != apply(product, LPoly.monomial(a))]
        o = compare(direct, product)
        if bad:
            o.ok, o.detail = False, f"action differs on {bad[:3]}"
        return o

    def conj(which):
        G = make_bigG(N).to_sum()
        Gi = G.inverse()
        if which == "E":
            inst = [(f"E{i}", G * tensor(gs.E[i], one) * Gi, tensor(gs.E[i], gs.L[i])) for i in range(1, N)]
        else:
            inst = [(f"F{i}", G * tensor(one, gs.F[i]) * Gi, tensor(gs.K[i], gs.F[i])) for i in range(1, N)]
        return compare_all(inst)

    def cartan_inverse():
        cd = cartan_data(N)
        r = N - 1
        prod = [[sum(cd.a[i][k] * cd.a_inv[k][j] for k in range(r)) for j in range(r)] for i in range(r)]
        ok = all(prod[i][j] == (1 if i == j else 0) for i in range(r) for j in range(r))
        return Outcome(ok, r * r, r * r, 0, "" if ok else f"a * a_inv = {prod}")

    return [
        ("bigG substitution formula = ordered product of G_{1:k,2:l}", "bigG-action", action),
        ("bigG (E_i ⊗ 1) bigG^-1 = E_i ⊗ L_i", "bigG-twist", lambda: conj("E")),
        ("bigG (1 ⊗ F_i) bigG^-1 = K_i ⊗ F_i", "bigG-twist", lambda: conj("F")),
        ("Cartan matrix times its inverse is the identity", "bigG-twist", cartan_inverse),
    ]


def check_bigG_twist(N: int, timings: bool = True):
    return _run("bigg-twist", N, 0, bigG_twist_checks(N), timings)
