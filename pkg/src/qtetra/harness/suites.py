"""Registry of verification suites.

A suite is a function ``(N, D) -> [(name, anchor, thunk), ...]``.  Each thunk
returns an :class:`~qtetra.report.Outcome`.  Anchors are stable relation
identifiers; :data:`RELATIONS` lists them all and every anchor belongs to
exactly one suite (see :func:`coverage`).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

from ..errors import UnknownSuite
from ..monop import (
    IndexMap,
    MonOp,
    OpSum,
    block_map,
    make_G,
    make_generator,
    partial_trace,
    slot2,
)
from ..qgroup import (
    _rot_params,
    bigG_twist_checks,
    build_bigR,
    build_e,
    build_f,
    build_monodromy,
    build_R_closed,
    build_R_trace,
    hopf_checks,
    mfor_checks,
    trace_precondition_report,
)
from ..report import Outcome, VerifyReport, compare, compare_all, run_check
from ..scalar import Q, q_power
from ..series import PSeries, b_argument, build_B, embed_series, ordered_product, psi_series, tau


@dataclass
class SuiteConfig:
    suite: str
    n: int = 2
    order: int | None = None
    parallel: int = 1
    report_path: str | None = None
    verbose: bool = False
    timings: bool = True

    def __post_init__(self):
        if self.suite not in SUITES:
            raise UnknownSuite(self.suite)
        if self.n < 2:
            raise ValueError("N must be at least 2")
        if self.order is not None and self.order < 0:
            raise ValueError("order must be nonnegative")
        if self.parallel < 1:
            raise ValueError("parallelism must be at least 1")


# ---------------------------------------------------------------------------
# helpers


def _g(kind, *slots, n):
    return make_generator(kind, list(slots), n)


def _names(p, N):
    return [f"{p}{i}" for i in range(1, N + 1)]


def _times(a, b):
    """Componentwise product of two vectors of parameter names / monomials."""
    out = []
    for x, y in zip(a, b):
        d = dict(x) if isinstance(x, dict) else {x: 1}
        for k, e in (y.items() if isinstance(y, dict) else ((y, 1),)):
            d[k] = d.get(k, 0) + e
        out.append(d)
    return out


def _qcomm(X, Y, k):
    """X Y = q^k Y X as a comparison pair."""
    return X * Y, (Y * X).scale(q_power(k))


# ---------------------------------------------------------------------------
# basic relations of u, v, F


def prop1(N, D):
    n1 = lambda k: make_generator(k, [1], 1)
    g3 = lambda k, *s: _g(k, *s, n=3)
    F = make_generator("F", [1, 2, 3], 3)

    def te_constant():
        f = lambda *s: make_generator("F", list(s), 6)
        return compare(
            f(1, 2, 4) * f(1, 3, 5) * f(2, 3, 6) * f(4, 5, 6),
            f(4, 5, 6) * f(2, 3, 6) * f(1, 3, 5) * f(1, 2, 4),
        )

    return [
        ("u v = q v u", "weyl-pair", lambda: compare(n1("u") * n1("v"), (n1("v") * n1("u")).scale(Q))),
        ("F^2 = 1", "F-involution", lambda: compare(F * F, MonOp.identity(3))),
        ("u1 F = F u1", "F-commutation", lambda: compare(g3("u", 1) * F, F * g3("u", 1))),
        ("u2 F = F u1 u3", "F-commutation", lambda: compare(g3("u", 2) * F, F * g3("u", 1) * g3("u", 3))),
        ("v1 v2 F = F v1 v2", "F-commutation", lambda: compare(g3("v", 1) * g3("v", 2) * F, F * g3("v", 1) * g3("v", 2))),
        ("v2 F = F v3", "F-commutation", lambda: compare(g3("v", 2) * F, F * g3("v", 3))),
        ("F124 F135 F236 F456 = F456 F236 F135 F124", "constant-tetrahedron", te_constant),
    ]


def pentagon(N, D):
    params = ("x", "y")
    u = make_generator("u", [1], 1)
    v = make_generator("v", [1], 1)
    X, Y = u * u, v

    def five_term():
        lhs = psi_series(params, "x", X, D).mul(psi_series(params, "y", Y, D))
        rhs = ordered_product([
            psi_series(params, "y", Y, D),
            psi_series(params, {"x": 1, "y": 1}, Y * X, D),
            psi_series(params, "x", X, D),
        ])
        return compare(lhs, rhs)

    return [
        ("X Y = q^2 Y X for X = u^2, Y = v", "pentagon", lambda: compare(*_qcomm(X, Y, 2))),
        ("psi(X) psi(Y) = psi(Y) psi(YX) psi(X)", "pentagon", five_term),
    ]


def _te_sides(D):
    params = ("x", "y", "z")
    B = lambda m, *s: build_B(params, m, list(s), 6, D)
    lhs = ordered_product([B("x", 1, 2, 4), B({"x": 1, "z": 1}, 1, 3, 5), B("y", 2, 3, 6), B("z", 4, 5, 6)])
    rhs = ordered_product([B("y", 4, 5, 6), B("z", 2, 3, 6), B({"x": 1, "y": 1}, 1, 3, 5), B("x", 1, 2, 4)])
    return lhs, rhs


def te_spectral(N, D):
    return [
        ("B124^x B135^xz B236^y B456^z = B456^y B236^z B135^xy B124^x", "spectral-tetrahedron",
         lambda: compare(*_te_sides(D))),
    ]


def _fourterm_ops():
    n = 6
    arg = lambda *s: b_argument(IndexMap(list(s), n))
    # U, V, W are the B-arguments transported through the F's
    U = arg(1, 2, 3)
    V = make_generator("v", [2], n) * make_generator("u_inv", [2], n) * make_generator("u", [3], n) \
        * make_generator("u", [4], n) * make_generator("u_inv", [5], n) * make_generator("v_inv", [5], n)
    W = arg(3, 5, 6)
    return U, V, W


def four_term(N, D):
    params = ("x", "y", "z")
    U, V, W = _fourterm_ops()

    def identity():
        p = lambda m, op: psi_series(params, m, op, D)
        lhs = ordered_product([p("x", U), p({"x": 1, "z": 1}, U * W), p("y", V), p("z", W)])
        rhs = ordered_product([p("y", V), p("z", W), p({"x": 1, "y": 1}, V * U), p("x", U)])
        return compare(lhs, rhs)

    return [
        ("U V = q^2 V U", "four-term", lambda: compare(*_qcomm(U, V, 2))),
        ("V W = q^2 W V", "four-term", lambda: compare(*_qcomm(V, W, 2))),
        ("W U = q^2 U W", "four-term", lambda: compare(*_qcomm(W, U, 2))),
        ("psi(U) psi(UW) psi(V) psi(W) = psi(V) psi(W) psi(VU) psi(U)", "four-term", identity),
    ]


# ---------------------------------------------------------------------------
# monodromy, R and big R


def _monodromy_embedded(N, params, xs, blocks, single, n, D):
    """B-tilde on (block a, block b, single slot) of an n-variable space."""
    base = build_monodromy(N, params, xs, D)
    slots = [(blk - 1) * N + k for blk in blocks for k in range(1, N + 1)] + [single]
    return embed_series(base, IndexMap(slots, n))


def monodromy(N, D):
    xs, ys = _names("x", N), _names("y", N)
    params = tuple(xs + ys)
    n = 3 * N + 3
    s4, s5, s6 = 3 * N + 1, 3 * N + 2, 3 * N + 3

    def identity():
        Bt = lambda x, a, b, c: _monodromy_embedded(N, params, x, (a, b), c, n, D)
        b456 = build_B(params, ys[-1], [s4, s5, s6], n, D)
        lhs = ordered_product([Bt(xs, 1, 2, s4), Bt(_times(xs, tau(ys)), 1, 3, s5), Bt(ys, 2, 3, s6), b456])
        rhs = ordered_product([b456, Bt(tau(ys), 2, 3, s6), Bt(_times(xs, ys), 1, 3, s5), Bt(xs, 1, 2, s4)])
        return compare(lhs, rhs)

    return [("monodromy YBE for B-tilde with B456^{y_N}", "monodromy-ybe", identity)]


def trace_closed_form(N, D):
    xs = _names("x", N)
    params = tuple(xs)
    base = xs[: N - 1] + [None]

    def rotation(j):
        return lambda: compare(
            build_R_trace(N, params, _rot_params(base, j, N), D),
            build_R_closed(N, j, params, xs[: N - 1], D),
        )

    def precondition():
        total = bad = 0
        for x in [xs] + [_rot_params(base, j, N) for j in range(N)]:
            t, b = trace_precondition_report(build_monodromy(N, params, x, D), 2 * N + 1)
            total += t
            bad += b
        return Outcome(bad == 0, total, total, D, f"{bad} of {total} terms violate it" if bad else "")

    checks = [
        (f"Tr3 B-tilde at tau^{j}(x, 0) = closed form", "R-closed-form", rotation(j)) for j in range(N)
    ]
    checks.append(("every traced term has a unique integral diagonal solution", "R-closed-form", precondition))
    return checks


def _embed_blocks(s: PSeries, blocks, size, n):
    return embed_series(s, block_map(blocks, size, n))


def ybe_r(N, D):
    xs, ys = _names("x", N), _names("y", N)
    params = tuple(xs + ys)
    n = 3 * N

    def identity():
        R = lambda x: build_R_trace(N, params, x, D)
        Rb = lambda x, a, b: _embed_blocks(R(x), [a, b], N, n)
        lhs = ordered_product([Rb(xs, 1, 2), Rb(_times(xs, tau(ys)), 1, 3), Rb(ys, 2, 3)])
        rhs = ordered_product([Rb(tau(ys), 2, 3), Rb(_times(xs, ys), 1, 3), Rb(xs, 1, 2)])
        return compare(lhs, rhs)

    return [("R12^x R13^{x tau(y)} R23^y = R23^{tau(y)} R13^{xy} R12^x", "ybe-R", identity)]


def ybe_bigr(N, D):
    xs, ys = _names("x", N), _names("y", N)
    params = tuple(xs + ys)
    xs0 = xs[: N - 1] + [None]
    n = 3 * N * N

    def closed_form():
        prod_closed = build_bigR(N, params, xs0, D, route="product", r_source="closed")
        return compare_all([
            ("closed", prod_closed, build_bigR(N, params, xs0, D, route="closed")),
            ("trace", build_bigR(N, params, xs0, D, route="product", r_source="trace"), prod_closed),
        ])

    def identity():
        R = lambda x, a, b: _embed_blocks(build_bigR(N, params, x, D), [a, b], N * N, n)
        xy = _times(xs, ys)
        lhs = ordered_product([R(xs, 1, 2), R(xy, 1, 3), R(ys, 2, 3)])
        rhs = ordered_product([R(ys, 2, 3), R(xy, 1, 3), R(xs, 1, 2)])
        return compare(lhs, rhs)

    return [
        ("product of R_{1:i,2:j} = psi(e ⊗ f) product times bigG (x_N = 0)", "bigR-closed-form", closed_form),
        ("R12^x R13^{xy} R23^y = R23^y R13^{xy} R12^x", "ybe-bigR", identity),
    ]


# ---------------------------------------------------------------------------
# S, P, G


def srelations(N, D):
    g2 = lambda k, *s: _g(k, *s, n=2)
    g3 = lambda k, *s: _g(k, *s, n=3)
    S = make_generator("S", [1, 2], 2)

    def p_trace():
        return compare(partial_trace(make_generator("P", [1, 2], 2), 2), OpSum.identity(1))

    return [
        ("F = S13^-1 P23 S13", "F-factorization",
         lambda: compare(make_generator("F", [1, 2, 3], 3), g3("S_inv", 1, 3) * g3("P", 2, 3) * g3("S", 1, 3))),
        ("S12 S13 = S13 S12", "S-relations", lambda: compare(g3("S", 1, 2) * g3("S", 1, 3), g3("S", 1, 3) * g3("S", 1, 2))),
        ("S13 S23 = S23 S13", "S-relations", lambda: compare(g3("S", 1, 3) * g3("S", 2, 3), g3("S", 2, 3) * g3("S", 1, 3))),
        ("S u1 = u1 S", "S-relations", lambda: compare(S * g2("u", 1), g2("u", 1) * S)),
        ("S v1 = v1 v2 S", "S-relations", lambda: compare(S * g2("v", 1), g2("v", 1) * g2("v", 2) * S)),
        ("S u1 u2 = u2 S", "S-relations", lambda: compare(S * g2("u", 1) * g2("u", 2), g2("u", 2) * S)),
        ("S v2 = v2 S", "S-relations", lambda: compare(S * g2("v", 2), g2("v", 2) * S)),
        ("Tr2 P = 1", "P-trace", p_trace),
    ]


def grelations(N, D):
    n = 2 * N
    G = make_G(N)
    g = lambda k, s, i: make_generator(k, [slot2(s, i, N)], n)
    I = range(1, N + 1)

    def fam(fn):
        return lambda: compare_all((f"i={i}", *fn(i)) for i in I)

    def via_F():
        s = lambda a, i: slot2(a, i, N)
        out = _g("S", s(1, N), s(2, N), n=n)
        for i in range(N - 1, 0, -1):
            out = out * _g("F", s(1, i), s(2, i), s(2, N), n=n)
        return compare(out * _g("S_inv", s(1, N), s(2, N), n=n), G)

    def via_SP():
        s = lambda a, i: slot2(a, i, N)
        out = MonOp.identity(n)
        for i in range(N - 1, 0, -1):
            out = out * _g("P", s(2, i), s(2, N), n=n)
        for j in I:
            out = out * _g("S_inv", s(1, j), s(2, j), n=n) * _g("S", s(1, j), s(2, j - 1), n=n)
        return compare(out, G)

    return [
        ("G = S_{1:N,2:N} prod F_{1:i,2:i,2:N} S^-1_{1:N,2:N}", "G-factorization", via_F),
        ("G = prod P_{2:i,2:N} prod S^-1_{1:j,2:j} S_{1:j,2:j-1}", "G-factorization", via_SP),
        ("G u_{1:i} = u_{1:i} G", "G-relations", fam(lambda i: (G * g("u", 1, i), g("u", 1, i) * G))),
        ("G v_{1:i} = v_{1:i} v_{2:i} v^-1_{2:i+1} G", "G-relations",
         fam(lambda i: (G * g("v", 1, i), g("v", 1, i) * g("v", 2, i) * g("v_inv", 2, i + 1) * G))),
        ("G u_{2:i} = u_{2:i+1} u_{1:i} u^-1_{1:i+1} G", "G-relations",
         fam(lambda i: (G * g("u", 2, i), g("u", 2, i + 1) * g("u", 1, i) * g("u_inv", 1, i + 1) * G))),
        ("G v_{2:i} = v_{2:i+1} G", "G-relations", fam(lambda i: (G * g("v", 2, i), g("v", 2, i + 1) * G))),
    ]


# ---------------------------------------------------------------------------
# e / f relations


def predicted_exponent(X, Y, N):
    """p with X Y = q^p Y X by the permutation relations; X = (kind, i, site)."""

    def rule(a, b):
        (ka, i, k), (kb, j, l) = a, b
        if ka == kb and k == l and i == j + 1:
            return 1
        if ka == kb and (k < l if ka == "e" else k > l):
            return {0: 2, 1: -1}.get(abs(i - j))
        if (ka, kb) == ("e", "f") and k == l:
            if (j - k - i) % N == 0:
                return 2
            if (j - k - i + 1) % N == 0:
                return -2
        return None

    p = rule(X, Y)
    if p is not None:
        return p
    p = rule(Y, X)
    return -p if p is not None else 0


def ef_generators(N):
    out = {}
    for i in range(1, N):
        for k in range(1, N + 1):
            out["e", i, k] = build_e(i, k, N)
            out["f", i, k] = build_f(i, k, N)
    return out


def ef_relations(N, D):
    def scan():
        gens = ef_generators(N)
        keys = sorted(gens)
        inst = []
        for a in keys:
            for b in keys:
                if a < b:
                    inst.append((f"{a}{b}", *_qcomm(gens[a], gens[b], predicted_exponent(a, b, N))))
        return compare_all(inst)

    def quad():
        inst = []
        for i in range(1, N):
            for j in range(1, N):
                if i == j:
                    continue
                k = (j - i) % N or N
                inst.append((f"i={i},j={j}", build_e(i, k % N + 1, N) * build_f(j, k % N + 1, N),
                             build_f(j, k, N) * build_e(i, k, N)))
        return compare_all(inst)

    return [
        ("permutation relations, exhaustive pair scan", "e-f-permutation", scan),
        ("e_{i,k+1} f_{j,k+1} = f_{j,k} e_{i,k}, k = j - i, i != j", "e-f-quadratic", quad),
    ]


def hopf(N, D):
    return hopf_checks(N)


def bigg_twist(N, D):
    return bigG_twist_checks(N)


def mfor(N, D):
    return mfor_checks(N, D)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class SuiteSpec:
    name: str
    build: Callable
    default_order: Callable[[int], int]
    uses_order: bool = True
    description: str = ""


def _fixed(d):
    return lambda N: d


SUITES: dict[str, SuiteSpec] = {
    s.name: s
    for s in [
        SuiteSpec("prop1", prop1, _fixed(0), False, "u, v, F relations and the constant tetrahedron equation"),
        SuiteSpec("pentagon", pentagon, _fixed(6), True, "five-term identity for psi with X = x u^2, Y = y v"),
        SuiteSpec("te-spectral", te_spectral, _fixed(3), True, "spectral tetrahedron equation for B on 6 variables"),
        SuiteSpec("four-term", four_term, _fixed(3), True, "four-term psi identity and the q-commutations of U, V, W"),
        SuiteSpec("monodromy", monodromy, lambda N: 3 if N == 2 else 2, True, "YBE-type identity for the monodromy B-tilde"),
        SuiteSpec("trace-closed-form", trace_closed_form, lambda N: 3 if N <= 3 else 2, True, "partial trace of B-tilde vs the closed form of R"),
        SuiteSpec("ybe-r", ybe_r, lambda N: 3 if N == 2 else 2, True, "multi-parameter YBE for R (traced, generic x)"),
        SuiteSpec("ybe-bigr", ybe_bigr, lambda N: 2 if N == 2 else 1, True, "closed form and YBE of the big R"),
        SuiteSpec("srelations", srelations, _fixed(0), False, "S/P factorization of F, S relations, Tr2 P = 1"),
        SuiteSpec("grelations", grelations, _fixed(0), False, "factorizations of G and its commutation relations"),
        SuiteSpec("ef-relations", ef_relations, _fixed(0), False, "permutation and quadratic relations of e, f"),
        SuiteSpec("hopf", hopf, _fixed(0), False, "defining relations of the algebra under kappa"),
        SuiteSpec("bigg-twist", bigg_twist, _fixed(0), False, "bigG action formula and conjugation identities"),
        SuiteSpec("mfor", mfor, lambda N: 4 if N == 2 else 2, True, "ordered psi product vs root-vector product"),
        SuiteSpec("all", None, _fixed(0), True, "every suite at its default order"),
    ]
}

# every relation family checked somewhere; each belongs to exactly one suite
RELATIONS = (
    "weyl-pair", "F-involution", "F-commutation", "constant-tetrahedron",
    "pentagon", "spectral-tetrahedron", "four-term", "monodromy-ybe",
    "R-closed-form", "ybe-R", "bigR-closed-form", "ybe-bigR",
    "F-factorization", "S-relations", "P-trace", "G-factorization", "G-relations",
    "e-f-permutation", "e-f-quadratic", "kappa-homomorphism", "centre",
    "bigG-action", "bigG-twist", "root-vector-identity", "rho-grading",
)


def checks_for(suite: str, N: int, D: int):
    spec = SUITES.get(suite)
    if spec is None or spec.build is None:
        raise UnknownSuite(suite)
    return spec.build(N, D)


def coverage(N: int = 2) -> dict[str, list[str]]:
    """anchor -> suites whose check lists mention it."""
    out: dict[str, list[str]] = {a: [] for a in RELATIONS}
    for name, spec in SUITES.items():
        if spec.build is None:
            continue
        for _, anchor, _ in spec.build(N, 0):
            suites = out.setdefault(anchor, [])
            if name not in suites:
                suites.append(name)
    return out


def _run_one(args):
    suite, N, D, idx, timings = args
    name, anchor, fn = checks_for(suite, N, D)[idx]
    return run_check(name, anchor, fn, timings)


def _run_checks(suite, N, D, parallel, timings):
    count = len(checks_for(suite, N, D))
    jobs = [(suite, N, D, i, timings) for i in range(count)]
    if parallel > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=min(parallel, count)) as pool:
            return list(pool.map(_run_one, jobs))
    checks = checks_for(suite, N, D)
    return [run_check(name, anchor, fn, timings) for name, anchor, fn in checks]


def run_suite(config: SuiteConfig) -> VerifyReport:
    spec = SUITES[config.suite]
    if config.suite == "all":
        rep = VerifyReport("all", config.n, config.order or 0)
        for name, sub in SUITES.items():
            if sub.build is None:
                continue
            D = config.order if config.order is not None else sub.default_order(config.n)
            for c in _run_checks(name, config.n, D, config.parallel, config.timings):
                c.name = f"{name}: {c.name}"
                rep.checks.append(c)
        return rep
    D = config.order if config.order is not None else spec.default_order(config.n)
    if not spec.uses_order:
        D = 0
    rep = VerifyReport(config.suite, config.n, D)
    rep.checks = _run_checks(config.suite, config.n, D, config.parallel, config.timings)
    return rep
