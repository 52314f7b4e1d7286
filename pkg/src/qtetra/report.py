"""Verification reports: per-check outcomes and their serialization."""

from __future__ import annotations

import json
import time
import traceback
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .monop import MonOp, OpSum
from .series import PSeries


@dataclass
class Outcome:
    ok: bool
    lhs_terms: int = 0
    rhs_terms: int = 0
    max_order: int = 0
    detail: str = ""


@dataclass
class CheckResult:
    name: str
    anchor: str
    status: str  # pass | fail | error
    lhs_terms: int
    rhs_terms: int
    max_order: int
    ms: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "lhs_terms": self.lhs_terms,
            "rhs_terms": self.rhs_terms,
            "max_order": self.max_order,
            "ms": self.ms,
        }


@dataclass
class VerifyReport:
    suite: str
    n: int = 0
    order: int = 0
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "config": {"n": self.n, "order": self.order},
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self, verbose: bool = False) -> str:
        lines = [f"suite {self.suite} (n={self.n}, order={self.order})"]
        for c in self.checks:
            line = (
                f"  {c.status.upper():5} {c.name}  [{c.anchor}]  "
                f"lhs={c.lhs_terms} rhs={c.rhs_terms} order={c.max_order} {c.ms}ms"
            )
            lines.append(line)
            if c.detail and (verbose or c.status != "pass"):
                lines.append(f"        {c.detail}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'} ({len(self.checks)} checks)")
        return "\n".join(lines) + "\n"


def emit_report(report: VerifyReport, fmt: str = "text", path=None, verbose: bool = False) -> str:
    """Serialize a report; write it to ``path`` when given.  Returns the text."""
    if fmt == "json":
        out = report.to_json()
    elif fmt == "text":
        out = report.to_text(verbose)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(out)
    return out


def report_from_dict(d: dict) -> VerifyReport:
    rep = VerifyReport(d["suite"], d["config"]["n"], d["config"]["order"])
    for c in d["checks"]:
        rep.checks.append(CheckResult(**c))
    return rep


# ---------------------------------------------------------------------------
# comparison helpers


def _terms(x) -> int:
    if isinstance(x, PSeries):
        return x.term_count()
    if isinstance(x, OpSum):
        return len(x)
    if isinstance(x, MonOp):
        return 1
    return 0


def _order(x) -> int:
    return x.cap if isinstance(x, PSeries) else 0


def compare(lhs, rhs) -> Outcome:
    """Exact canonical-form equality of two operators or two series."""
    if isinstance(lhs, MonOp):
        lhs = lhs.to_sum()
    if isinstance(rhs, MonOp):
        rhs = rhs.to_sum()
    if isinstance(lhs, PSeries):
        bad = lhs.mismatches(rhs)
        detail = f"mismatched coefficients: {bad[:5]}" if bad else ""
        return Outcome(not bad, _terms(lhs), _terms(rhs), min(lhs.cap, rhs.cap), detail)
    ok = lhs == rhs
    return Outcome(ok, _terms(lhs), _terms(rhs), 0, "" if ok else f"lhs={lhs} rhs={rhs}")


def compare_all(pairs: Iterable[tuple[str, object, object]]) -> Outcome:
    """Conjunction over labelled (label, lhs, rhs) instances of one relation family."""
    ok, lt, rt, order, failed = True, 0, 0, 0, []
    for label, lhs, rhs in pairs:
        o = compare(lhs, rhs)
        lt += o.lhs_terms
        rt += o.rhs_terms
        order = max(order, o.max_order)
        if not o.ok:
            ok = False
            failed.append(label)
    return Outcome(ok, lt, rt, order, f"failing instances: {failed[:8]}" if failed else "")


def run_check(name: str, anchor: str, fn: Callable[[], Outcome], timings: bool = True) -> CheckResult:
    t0 = time.perf_counter()
    try:
        o = fn()
        status = "pass" if o.ok else "fail"
    except (MemoryError, RecursionError) as exc:
        o = Outcome(False, detail=f"resource exhausted: {type(exc).__name__}")
        status = "error"
    except Exception as exc:  # report, never swallow silently
        o = Outcome(False, detail=f"{type(exc).__name__}: {exc} | {traceback.format_exc(limit=2).splitlines()[-1]}")
        status = "error"
    ms = int((time.perf_counter() - t0) * 1000) if timings else 0
    return CheckResult(name, anchor, status, o.lhs_terms, o.rhs_terms, o.max_order, ms, o.detail)
