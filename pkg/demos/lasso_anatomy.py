#!/usr/bin/env python3
"""What a finite test matrix means as an infinite run.

A test fixes the nondet inputs as a matrix that wraps around modulo its
length, so the deterministic closed loop settles into a lasso: a finite
prefix followed by a loop repeated forever.  This script simulates one
small test, prints the detected shape, and evaluates formulas at several
positions to show how the wrap participates.
"""

from looptest.dsl import parse_ltl, parse_model
from looptest.ltl import eval_on_lasso
from looptest.sim import TestCase, dump_trace, simulate_lasso

MODEL = """model saw;
nondet up : bool;
input level : int 0..3 = 0;

plant {
  level = up && level < 3 ? level + 1 : (level > 0 ? level - 1 : 0);
}
controller {
}
"""

FORMULAS = [
    "G (F (level == 3))",
    "G (F (level == 0))",
    "F (G (level > 0))",
    "G (level == 3 -> X (level < 3))",
]


def main():
    model = parse_model(MODEL)
    # three steps up, one step down, repeated forever
    case = TestCase(tid="saw", variables=("up",),
                    rows=((True,), (True,), (True,), (False,)))
    trace = simulate_lasso(model, case)

    print("== the unwound trace ==")
    print(dump_trace(trace))
    print(f"prefix {trace.prefix_len} positions, "
          f"loop {trace.loop_len} positions")
    print("the column the wrap applies:", trace.wrap_nondet)
    print()

    print("== formulas against the lasso ==")
    for text in FORMULAS:
        formula = parse_ltl(text, model)
        verdict = eval_on_lasso(formula, trace)
        print(f"{str(formula):34} -> {verdict}")


if __name__ == "__main__":
    main()
