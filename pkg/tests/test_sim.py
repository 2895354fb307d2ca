"""Lasso detection, trace dumps, and test case validation."""

import pytest

from looptest.dsl import parse_model
from looptest.sim import (
    StepCapExceeded,
    TestCase,
    TestSuite,
    dump_trace,
    simulate_lasso,
    validate_test,
)


COUNTER = """
model counter;
nondet u : bool;
input x : int 0..2 = 0;
plant { x = (x + 1) mod 3; }
controller { }
"""


def test_loop_detection_uses_test_phase_not_just_state():
    # x cycles with period 3, the test with period 2; the combined period is
    # 6, and closing on the bare state would cut the lasso short at step 3.
    m = parse_model(COUNTER)
    case = TestCase(tid="t0", variables=("u",), rows=((False,), (True,)))
    trace = simulate_lasso(m, case)
    assert trace.prefix_len == 0
    assert trace.loop_len == 6
    assert [s["x"] for s in trace.states] == [0, 1, 2, 0, 1, 2]


def test_prefix_forms_before_a_saturating_loop():
    m = parse_model("""
model sat;
nondet u : bool;
input x : int 0..2 = 0;
plant { x = x < 2 ? x + 1 : 2; }
controller { }
""")
    case = TestCase(tid="t0", variables=("u",), rows=((False,),))
    trace = simulate_lasso(m, case)
    assert trace.prefix_len == 2
    assert trace.loop_len == 1
    assert [s["x"] for s in trace.states] == [0, 1, 2]


def test_wrap_nondet_is_the_closing_column():
    m = parse_model(COUNTER)
    case = TestCase(tid="t0", variables=("u",),
                    rows=((True,), (False,), (True,)))
    trace = simulate_lasso(m, case)
    # period 3 test over period 3 dynamics: closes after one pass, and the
    # wrap applies row 2 again on the way back to position 0
    assert trace.prefix_len == 0
    assert trace.loop_len == 3
    assert trace.wrap_nondet == {"u": True}
    assert trace.nondet[0] is None
    assert trace.nondet[1] == {"u": True}
    assert trace.nondet[2] == {"u": False}


def test_position_zero_shows_defaults_in_dump():
    m = parse_model(COUNTER)
    case = TestCase(tid="t0", variables=("u",), rows=((True,),))
    trace = simulate_lasso(m, case)
    text = dump_trace(trace)
    lines = text.split("\n")
    assert lines[0] == "#0 loop-start u=0 x=0"
    assert lines[1] == "#1 u=1 x=1"
    assert lines[2] == "#2 u=1 x=2"
    assert len(lines) == 3


def test_dump_marks_loop_start_inside_prefix_traces():
    m = parse_model("""
model sat2;
nondet u : bool;
input x : int 0..2 = 0;
plant { x = x < 2 ? x + 1 : 2; }
controller { }
""")
    case = TestCase(tid="t0", variables=("u",), rows=((False,),))
    text = dump_trace(simulate_lasso(m, case))
    assert text.split("\n")[2].startswith("#2 loop-start ")


def test_dump_renders_enum_labels():
    m = parse_model("""
model lamp;
nondet u : bool;
input mode : enum { off, on } = off;
plant { mode = u ? on : off; }
controller { }
""")
    case = TestCase(tid="t0", variables=("u",), rows=((True,),))
    text = dump_trace(simulate_lasso(m, case))
    assert "mode=off" in text.split("\n")[0]
    assert "mode=on" in text.split("\n")[1]


def test_simulation_respects_step_cap():
    m = parse_model("""
model wide;
nondet u : bool;
input x : int 0..9999 = 0;
plant { x = x < 9999 ? x + 1 : 0; }
controller { }
""")
    case = TestCase(tid="t0", variables=("u",), rows=((False,),))
    with pytest.raises(StepCapExceeded):
        simulate_lasso(m, case, step_cap=100)


def test_case_columns_wrap():
    case = TestCase(tid="t0", variables=("a", "b"),
                    rows=((1, True), (2, False)))
    assert case.length == 2
    assert case.column(0) == {"a": 1, "b": True}
    assert case.column(3) == {"a": 2, "b": False}


def test_suite_lookup_and_element_count():
    c0 = TestCase(tid="t0", variables=("u",), rows=((True,),))
    c1 = TestCase(tid="t1", variables=("u",), rows=((True,), (False,)))
    suite = TestSuite(variables=("u",), cases=(c0, c1))
    assert suite.element_count == 3
    assert suite.case("t1") is c1
    with pytest.raises(KeyError):
        suite.case("t9")


def test_validate_test_accepts_good_case():
    m = parse_model(COUNTER)
    case = TestCase(tid="t0", variables=("u",), rows=((True,), (False,)))
    assert validate_test(m, case) == []


def test_validate_test_rejects_wrong_variables():
    m = parse_model(COUNTER)
    case = TestCase(tid="t0", variables=("v",), rows=((True,),))
    diags = validate_test(m, case)
    assert any("do not match" in d.message for d in diags)


def test_validate_test_rejects_bad_rows():
    m = parse_model(COUNTER)
    case = TestCase(tid="t0", variables=("u",), rows=((True, False),))
    assert any("expected 1" in d.message for d in validate_test(m, case))
    case = TestCase(tid="t0", variables=("u",), rows=((3,),))
    assert any("outside domain" in d.message for d in validate_test(m, case))
    case = TestCase(tid="t0", variables=("u",), rows=())
    assert any("at least one row" in d.message for d in validate_test(m, case))
