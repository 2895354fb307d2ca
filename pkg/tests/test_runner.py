"""Executing suites: verdicts, report text, expectation bookkeeping."""

import pytest

from looptest.dsl import parse_model
from looptest.ltl import Atom, Finally, Globally, Requirement
from looptest.model import Binary, Lit, Ref
from looptest.runner import execute_suite
from looptest.sim import TestCase, TestSuite


MODEL = parse_model("""model run;
nondet go : bool;
input x : int 0..3 = 0;
output y : bool = false;
plant {
  x = go && x < 3 ? x + 1 : x;
}
controller {
  y = x == 3;
}
""")

IDLE = TestCase("t0", ("go",), ((False,),))
CLIMB = TestCase("t1", ("go",), ((True,),))
SUITE = TestSuite(variables=("go",), cases=(IDLE, CLIMB))


def _low():
    return Requirement("R_low",
                       Globally(Atom(Binary("<", Ref("x"), Lit(2)))),
                       "expect-pass")


def _any():
    return Requirement("R_any",
                       Globally(Atom(Binary(">=", Ref("x"), Lit(0)))),
                       "expect-fail")


def _hit():
    return Requirement("R_hit", Finally(Atom(Ref("y"))))


def test_first_failing_test_is_the_witness():
    # Both climbing tests violate the bound; suite order decides the blame.
    suite = TestSuite(variables=("go",), cases=(
        IDLE,
        CLIMB,
        TestCase("t2", ("go",), ((True,), (True,))),
    ))
    report = execute_suite(MODEL, [_low()], suite)
    verdict = report.verdicts[0]
    assert verdict.status == "violated"
    assert verdict.test_id == "t1"


def test_report_text_embeds_the_violating_trace():
    report = execute_suite(MODEL, [_low(), _any(), _hit()], SUITE)
    assert report.text() == """\
REQ R_low VIOLATED test=t1
#0 go=0 x=0 y=0
#1 go=1 x=1 y=0
#2 go=1 x=2 y=0
#3 loop-start go=1 x=3 y=1
REQ R_any PASS-ON-SUITE
REQ R_hit VIOLATED test=t0
#0 loop-start go=0 x=0 y=0
violated=2 passed=1 errored=0
"""
    assert report.violated == 2
    assert report.passed == 1
    assert report.errored == 0


def test_expectation_misses_in_requirement_order():
    reqs = [_low(), _any(), _hit()]
    report = execute_suite(MODEL, reqs, SUITE)
    assert report.expectation_misses(reqs) == [
        ("R_low", "expect-pass", "VIOLATED"),
        ("R_any", "expect-fail", "PASS-ON-SUITE"),
    ]


def test_matching_expectations_are_not_misses():
    reqs = [
        Requirement("R_ok",
                    Globally(Atom(Binary("<=", Ref("x"), Lit(3)))),
                    "expect-pass"),
        Requirement("R_bad", Globally(Atom(Binary("<", Ref("x"), Lit(2)))),
                    "expect-fail"),
    ]
    report = execute_suite(MODEL, reqs, SUITE)
    assert report.expectation_misses(reqs) == []


def test_parallel_execution_matches_serial():
    reqs = [_low(), _any(), _hit()]
    suite = TestSuite(variables=("go",), cases=(
        IDLE,
        CLIMB,
        TestCase("t2", ("go",), ((True,), (False,))),
        TestCase("t3", ("go",), ((False,), (True,))),
    ))
    serial = execute_suite(MODEL, reqs, suite, jobs=1)
    threaded = execute_suite(MODEL, reqs, suite, jobs=4)
    assert threaded.text() == serial.text()


def test_broken_test_turns_every_verdict_into_an_error():
    model = parse_model("""model frail;
nondet go : bool;
input x : int 0..2 = 0;
plant {
  x = go ? x + 1 : x;
}
controller {
}
""")
    suite = TestSuite(variables=("go",), cases=(
        TestCase("t0", ("go",), ((False,),)),
        TestCase("t1", ("go",), ((True,),)),
    ))
    reqs = [
        Requirement("R0", Globally(Atom(Binary("<", Ref("x"), Lit(9))))),
        Requirement("R1", Finally(Atom(Binary("==", Ref("x"), Lit(1))))),
    ]
    report = execute_suite(model, reqs, suite)
    assert report.errored == 2
    for verdict in report.verdicts:
        assert verdict.status == "error"
        assert "test=t1" in verdict.message
    assert report.text().splitlines()[0].startswith("REQ R0 ERROR test=t1")
    # errors never count as expectation misses
    tagged = [Requirement("R0", reqs[0].formula, "expect-pass"),
              Requirement("R1", reqs[1].formula, "expect-fail")]
    report = execute_suite(model, tagged, suite)
    assert report.expectation_misses(tagged) == []


def test_step_cap_is_passed_through():
    report = execute_suite(MODEL, [_low()], SUITE, step_cap=2)
    assert report.errored == 1
    assert "step" in report.verdicts[0].message
