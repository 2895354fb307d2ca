"""Suite execution: check every requirement on every test's lasso.

Fixing a test's nondet matrix makes the closed loop deterministic, so each
test unwinds to exactly one ultimately periodic trace.  A requirement passes
on the suite when it holds at position 0 of every trace; the first failing
test (in suite order) is reported as the violation witness.  Passing on a
suite is weaker than a proof: it says nothing about inputs the suite never
plays.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .ltl import eval_on_lasso
from .model import ClosedLoopModel, ModelError
from .sim import TestSuite, dump_trace, simulate_lasso


@dataclass(frozen=True)
class ReqVerdict:
    rid: str
    status: str  # "pass" | "violated" | "error"
    test_id: Optional[str] = None
    trace: Optional[object] = None
    message: Optional[str] = None


@dataclass(frozen=True)
class ExecutionReport:
    verdicts: tuple

    @property
    def violated(self) -> int:
        return sum(1 for v in self.verdicts if v.status == "violated")

    @property
    def passed(self) -> int:
        return sum(1 for v in self.verdicts if v.status == "pass")

    @property
    def errored(self) -> int:
        return sum(1 for v in self.verdicts if v.status == "error")

    def text(self) -> str:
        lines = []
        for v in self.verdicts:
            if v.status == "pass":
                lines.append(f"REQ {v.rid} PASS-ON-SUITE")
            elif v.status == "violated":
                lines.append(f"REQ {v.rid} VIOLATED test={v.test_id}")
                lines.append(dump_trace(v.trace).rstrip("\n"))
            else:
                lines.append(f"REQ {v.rid} ERROR {v.message}")
        lines.append(f"violated={self.violated} passed={self.passed} "
                     f"errored={self.errored}")
        return "\n".join(lines) + "\n"

    def expectation_misses(self, reqs: list) -> list:
        """Requirements whose tagged expectation disagrees with the verdict.

        Returns (rid, expectation, verdict-word) triples, in requirement
        order.  Untagged requirements and errors never count as misses.
        """
        by_id = {v.rid: v for v in self.verdicts}
        misses = []
        for req in reqs:
            if req.expectation is None:
                continue
            verdict = by_id.get(req.rid)
            if verdict is None or verdict.status == "error":
                continue
            want = "pass" if req.expectation == "expect-pass" else "violated"
            if verdict.status != want:
                word = ("PASS-ON-SUITE" if verdict.status == "pass"
                        else "VIOLATED")
                misses.append((req.rid, req.expectation, word))
        return misses


def execute_suite(model: ClosedLoopModel, reqs: list, suite: TestSuite,
                  jobs: int = 1, step_cap: int = 10_000_000):
    """Run every requirement against every test.  Returns ExecutionReport."""

    def unwind(case):
        try:
            return simulate_lasso(model, case, step_cap=step_cap), None
        except ModelError as err:
            return None, f"test={case.tid} {err}"

    if jobs > 1 and len(suite.cases) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            unwound = list(pool.map(unwind, suite.cases))
    else:
        unwound = [unwind(c) for c in suite.cases]

    broken = next((msg for _, msg in unwound if msg is not None), None)
    traces = [t for t, _ in unwound if t is not None]

    verdicts = []
    for req in reqs:
        if broken is not None:
            verdicts.append(ReqVerdict(req.rid, "error", message=broken))
            continue
        verdict = ReqVerdict(req.rid, "pass")
        for trace in traces:
            try:
                holds = eval_on_lasso(req.formula, trace)
            except ModelError as err:
                verdict = ReqVerdict(req.rid, "error",
                                     message=f"test={trace.case.tid} {err}")
                break
            if not holds:
                verdict = ReqVerdict(req.rid, "violated",
                                     test_id=trace.case.tid, trace=trace)
                break
        verdicts.append(verdict)
    return ExecutionReport(verdicts=tuple(verdicts))
