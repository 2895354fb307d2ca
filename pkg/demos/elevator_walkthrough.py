#!/usr/bin/env python3
"""The elevator case study end to end, with expectation checking.

Builds the n-floor elevator, generates a covering suite at the suggested
bound, runs all requirements, and compares every verdict against its
expect-pass / expect-fail tag.  The tags encode which requirements are
deliberately broken, so a "miss" means the suite failed to expose a bug
(or flagged a healthy requirement).
"""

import argparse
import time

from looptest import casegen
from looptest.runner import execute_suite
from looptest.sim import dump_trace
from looptest.testgen import GeneratorConfig, generate_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=3,
                        help="number of floors (default 3)")
    args = parser.parse_args()

    study = casegen.elevator(args.n)
    counts = {}
    for v in study.model.variables:
        counts[v.kind.value] = counts.get(v.kind.value, 0) + 1
    sizes = ", ".join(f"{k} {n}" for k, n in counts.items())
    print(f"built {study.name}: {sizes}")
    print(f"{len(study.reqs)} requirements, "
          f"suggested max test length {study.suggested_max_len}")
    print()

    start = time.monotonic()
    suite, gen_report = generate_suite(
        study.model, study.reqs,
        GeneratorConfig(max_len=study.suggested_max_len))
    print(f"== generation ({time.monotonic() - start:.1f}s) ==")
    tallies = {}
    for out in gen_report.outcomes:
        tallies[out.status] = tallies.get(out.status, 0) + 1
    listing = ", ".join(f"{n} {status.lower()}"
                        for status, n in sorted(tallies.items()))
    print(f"{len(gen_report.outcomes)} goals: {listing}")
    print(f"suite: {gen_report.test_count} tests, "
          f"{gen_report.element_count} rows")
    print()

    start = time.monotonic()
    exec_report = execute_suite(study.model, study.reqs, suite)
    print(f"== execution ({time.monotonic() - start:.1f}s) ==")
    print(f"passed {exec_report.passed}, violated {exec_report.violated}, "
          f"errored {exec_report.errored}")

    misses = exec_report.expectation_misses(study.reqs)
    print()
    print("== expectations ==")
    if not misses:
        print("all verdicts match their tags")
    for rid, expectation, verdict in misses:
        print(f"MISS {rid} tagged {expectation} but {verdict}")

    violated = next(v for v in exec_report.verdicts
                    if v.status == "violated")
    print()
    print(f"== first violation, {violated.rid} on {violated.test_id} ==")
    formula = next(r.formula for r in study.reqs if r.rid == violated.rid)
    print(f"formula: {formula}")
    shape = (f"prefix {violated.trace.prefix_len}, "
             f"loop {violated.trace.loop_len}")
    print(f"trace: {shape}")
    lines = dump_trace(violated.trace).splitlines()
    for line in lines[:6]:
        print(line)
    if len(lines) > 6:
        print(f"... {len(lines) - 6} more positions")


if __name__ == "__main__":
    main()
