"""Acceptance gate: one test per criterion, each recording a single pass/fail line.

Every criterion is an exact equality check; the only tolerances are the
wall-clock limits.
"""

import random
import subprocess
import sys
import time

from conftest import ACCEPTANCE_LINES
from naive import apply_word, monomials, random_word
from qtetra.harness.suites import SuiteConfig, run_suite
from qtetra.monop import LPoly, MonOp, make_generator
from qtetra.monop import tensor
from qtetra.qgroup import build_kappa, hopf_checks, mfor_lhs
from qtetra.report import compare, run_check
from qtetra.scalar import Q
from qtetra.series import PSeries, build_B, ordered_product, psi_series


def gate(number, limit_s, runs):
    """Run (suite, N, D) triples, record one line, return the reports."""
    t0 = time.perf_counter()
    reports = [run_suite(SuiteConfig(s, n, d)) for s, n, d in runs]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reports) and elapsed < limit_s
    desc = ", ".join(f"{r.suite} N={r.n} D={r.order} ({len(r.checks)} checks)" for r in reports)
    ACCEPTANCE_LINES.append(
        f"criterion {number}: {'PASS' if ok else 'FAIL'}  {desc}  {elapsed:.2f}s (limit {limit_s:g}s)"
    )
    failing = [c.name for r in reports for c in r.checks if c.status != "pass"]
    assert not failing, failing
    assert elapsed < limit_s
    return reports


def test_criterion_01_basic_relations():
    (rep,) = gate(1, 1, [("prop1", 2, None)])
    assert len(rep.checks) == 7


def test_criterion_02_pentagon():
    gate(2, 10, [("pentagon", 2, 6)])


def test_criterion_03_spectral_tetrahedron_and_four_term():
    gate(3, 300, [("te-spectral", 2, 4), ("four-term", 2, 4)])


def test_criterion_04_monodromy():
    # the per-run limit is 10 min; holding both runs to it together is stricter
    gate(4, 600, [("monodromy", 2, 3), ("monodromy", 3, 2)])


def test_criterion_05_trace_consistency():
    reports = gate(5, 300, [
        ("trace-closed-form", 2, 3), ("trace-closed-form", 3, 3),
        ("srelations", 2, None), ("grelations", 2, None), ("grelations", 3, None),
    ])
    pre = [c for r in reports for c in r.checks if "integral diagonal" in c.name]
    assert len(pre) == 2 and all(c.lhs_terms > 0 for c in pre)


def test_criterion_06_yang_baxter():
    gate(6, 1800, [("ybe-r", 2, 3), ("ybe-bigr", 2, 2)])


def test_criterion_07_ef_relations():
    reports = gate(7, 60, [("ef-relations", N, None) for N in (2, 3, 4)])
    # the scan covers every ordered pair of distinct generators
    for r, N in zip(reports, (2, 3, 4)):
        g = 2 * (N - 1) * N
        assert r.checks[0].lhs_terms == g * (g - 1) // 2


def test_criterion_08_hopf():
    reports = gate(8, 300, [("hopf", 2, None), ("hopf", 3, None)])
    names = {c.name for c in reports[1].checks}
    assert any("Serre relation for E" in n for n in names) and any("Serre relation for F" in n for n in names)
    assert any("differs from the identity" in n for n in names)


def test_criterion_09_root_vector_identity():
    gate(9, 1800, [("mfor", 2, 4), ("mfor", 3, 2)])


def test_criterion_10_bigG_twist():
    gate(10, 60, [("bigg-twist", 2, None), ("bigg-twist", 3, None)])


# ---------------------------------------------------------------------------
# criterion 11: infrastructure

INVERSE = {"u": "u_inv", "u_inv": "u", "v": "v_inv", "v_inv": "v", "S": "S_inv", "S_inv": "S", "F": "F", "P": "P"}


def _word_op(word, n):
    out = MonOp.identity(n)
    for kind, slots in word:
        out = out * make_generator(kind, list(slots), n)
    return out


def _random_identity(rng, n):
    kinds = list(INVERSE)
    w = random_word(rng, n, rng.randint(2, 6), kinds)
    mode = rng.randrange(3)
    if mode == 0:  # swap an adjacent pair: holds only if the two commute
        k = rng.randrange(len(w) - 1)
        w2 = w[:k] + [w[k + 1], w[k]] + w[k + 2:]
    elif mode == 1:  # insert g g^-1: always holds
        k = rng.randrange(len(w) + 1)
        g = random_word(rng, n, 1, kinds)[0]
        w2 = w[:k] + [g, (INVERSE[g[0]], g[1])] + w[k:]
    else:  # replace one letter: rarely holds
        k = rng.randrange(len(w))
        w2 = w[:k] + random_word(rng, n, 1, kinds) + w[k + 1:]
    return w, w2


def _negative_controls():
    """(label, holds) for deliberately perturbed relations; each must fail."""
    out = []
    u, v = make_generator("u", [1], 1), make_generator("v", [1], 1)
    out.append(("uv = q uv (wrong order)", compare(u * v, (u * v).scale(Q)).ok))
    X, Y = u * u, v
    p = ("x", "y")
    ps = lambda m, op: psi_series(p, m, op, 4)
    out.append(("pentagon with psi(XY)", compare(ps("x", X) * ps("y", Y),
                                                 ordered_product([ps("y", Y), ps({"x": 1, "y": 1}, X * Y), ps("x", X)])).ok))
    params = ("x", "y", "z")
    B = lambda m, *s: build_B(params, m, list(s), 6, 2)
    lhs = ordered_product([B("x", 1, 2, 4), B({"x": 1, "y": 1}, 1, 3, 5), B("y", 2, 3, 6), B("z", 4, 5, 6)])
    rhs = ordered_product([B("y", 4, 5, 6), B("z", 2, 3, 6), B({"x": 1, "y": 1}, 1, 3, 5), B("x", 1, 2, 4)])
    out.append(("tetrahedron with B135^{xy} on the left", compare(lhs, rhs).ok))
    gs = build_kappa(2, e_override=(((1, 1), (1, 2)),))
    results = [run_check(n, a, fn) for n, a, fn in hopf_checks(2, gs)]
    out.append(("kappa with e_{1,1} replaced", all(r.status == "pass" for r in results)))
    # ascending instead of descending inner product
    g2 = build_kappa(2)
    wrong = PSeries.one(("x1",), 3, 8)
    for j in (1, 2):
        for i in (1, 2):
            wrong = wrong.mul(psi_series(("x1",), "x1", tensor(g2.e[1, i], g2.f[1, j]), 3))
    out.append(("root-vector identity with reordered factors", compare(wrong, mfor_lhs(2, ("x1",), 3)).ok))
    return out


def test_criterion_11_infrastructure(tmp_path):
    t0 = time.perf_counter()
    rng = random.Random(11)
    verdicts = {True: 0, False: 0}
    disagreements = []
    for trial in range(200):
        n = rng.randint(2, 4)
        w1, w2 = _random_identity(rng, n)
        canonical = _word_op(w1, n) == _word_op(w2, n)
        oracle = all(
            apply_word(w1, LPoly.monomial(a)) == apply_word(w2, LPoly.monomial(a)) for a in monomials(rng, n, 12)
        )
        verdicts[canonical] += 1
        if canonical != oracle:
            disagreements.append((trial, w1, w2))
    oracle_ok = not disagreements and verdicts[True] > 20 and verdicts[False] > 20

    # two separate processes, so no engine cache is shared between the runs
    dumps = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        cmd = [sys.executable, "-m", "qtetra.harness.cli", "verify", "mfor", "--n", "2", "--order", "3",
               "--json", str(path), "--no-timings"]
        subprocess.run(cmd, check=True, capture_output=True)
        dumps.append(path.read_bytes())
    deterministic = dumps[0] == dumps[1]

    controls = _negative_controls()
    controls_ok = not any(holds for _, holds in controls)

    elapsed = time.perf_counter() - t0
    ok = oracle_ok and deterministic and controls_ok
    ACCEPTANCE_LINES.append(
        f"criterion 11: {'PASS' if ok else 'FAIL'}  200 random identities "
        f"({verdicts[True]} true, {verdicts[False]} false, {len(disagreements)} oracle disagreements), "
        f"byte-identical JSON: {deterministic}, negative controls failing: "
        f"{sum(not holds for _, holds in controls)}/{len(controls)}  {elapsed:.2f}s"
    )
    assert not disagreements, disagreements[:3]
    assert verdicts[True] > 20 and verdicts[False] > 20
    assert deterministic
    assert controls_ok, [label for label, holds in controls if holds]
