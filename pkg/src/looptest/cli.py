"""Command-line front end.

Subcommands:

  casegen   write a built-in case study's model and requirement files
  generate  build a coverage suite for a model and requirements
  execute   run a suite against requirements and report verdicts
  pipeline  generate then execute, writing all artifacts to a directory

Exit codes: 0 success, 1 requirement violations (or, under
--check-expectations, expectation misses), 2 usage or input errors,
3 runtime failures such as exhausted search budgets.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import casegen
from .dsl import ParseError, load_model, load_reqs, load_suite, \
    serialize_suite
from .model import ModelError
from .runner import execute_suite
from .testgen import GeneratorConfig, generate_suite, \
    DEFAULT_STATE_CAP, DEFAULT_STEP_CAP


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _add_caps(sub):
    sub.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP,
                     help="abort generation beyond this many stored states")
    sub.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP,
                     help="abort any single search or unwinding beyond this "
                          "many steps")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="looptest",
        description="closed-loop test generation and checking")
    subs = parser.add_subparsers(dest="command", required=True)

    gen_case = subs.add_parser(
        "casegen", help="write a built-in case study to files")
    gen_case.add_argument("kind", choices=sorted(casegen.BUILDERS),
                          help="which case study to build")
    gen_case.add_argument("--n", type=int, required=True,
                          help="size parameter (floors / cylinders)")
    gen_case.add_argument("--out-dir", required=True,
                          help="directory for the .clm and .ltl files")
    gen_case.set_defaults(func=_cmd_casegen)

    gen = subs.add_parser("generate", help="generate a coverage suite")
    gen.add_argument("--model", required=True, help="model file (.clm)")
    gen.add_argument("--reqs", required=True,
                     help="requirements file (.ltl)")
    gen.add_argument("--max-len", type=int, required=True,
                     help="maximum test case length")
    gen.add_argument("--goals", choices=("maximal", "all", "all-kinds"),
                     default="maximal", help="coverage goal selection")
    gen.add_argument("--out", required=True, help="suite file to write")
    _add_caps(gen)
    gen.set_defaults(func=_cmd_generate)

    ex = subs.add_parser("execute", help="run a suite against requirements")
    ex.add_argument("--model", required=True, help="model file (.clm)")
    ex.add_argument("--reqs", required=True, help="requirements file (.ltl)")
    ex.add_argument("--suite", required=True, help="suite file (.cts)")
    ex.add_argument("--jobs", type=int, default=1,
                    help="worker threads for unwinding tests")
    ex.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP,
                    help="abort any single unwinding beyond this many steps")
    ex.add_argument("--check-expectations", action="store_true",
                    help="compare verdicts against expect-pass/expect-fail "
                         "tags and fail on mismatches instead of violations")
    ex.set_defaults(func=_cmd_execute)

    pipe = subs.add_parser("pipeline",
                           help="generate a suite, then execute it")
    pipe.add_argument("--model", required=True, help="model file (.clm)")
    pipe.add_argument("--reqs", required=True,
                      help="requirements file (.ltl)")
    pipe.add_argument("--max-len", type=int, required=True,
                      help="maximum test case length")
    pipe.add_argument("--goals", choices=("maximal", "all", "all-kinds"),
                      default="maximal", help="coverage goal selection")
    pipe.add_argument("--jobs", type=int, default=1,
                      help="worker threads for unwinding tests")
    pipe.add_argument("--out-dir", required=True,
                      help="directory for suite.cts, generation.txt and "
                           "execution.txt")
    pipe.add_argument("--check-expectations", action="store_true",
                      help="compare verdicts against expectation tags and "
                           "fail on mismatches instead of violations")
    _add_caps(pipe)
    pipe.set_defaults(func=_cmd_pipeline)
    return parser


def _cmd_casegen(args) -> int:
    study = casegen.build(args.kind, args.n)
    os.makedirs(args.out_dir, exist_ok=True)
    model_path = os.path.join(args.out_dir, f"{study.name}.clm")
    reqs_path = os.path.join(args.out_dir, f"{study.name}.ltl")
    _write_atomic(model_path, study.model_text)
    _write_atomic(reqs_path, study.reqs_text)
    print(model_path)
    print(reqs_path)
    return 0


def _cmd_generate(args) -> int:
    model = load_model(args.model)
    reqs = load_reqs(args.reqs, model)
    config = GeneratorConfig(max_len=args.max_len, goal_mode=args.goals,
                             state_cap=args.state_cap,
                             step_cap=args.step_cap)
    suite, report = generate_suite(model, reqs, config)
    _write_atomic(args.out, serialize_suite(suite))
    sys.stdout.write(report.text())
    return 0


def _cmd_execute(args) -> int:
    model = load_model(args.model)
    reqs = load_reqs(args.reqs, model)
    suite = load_suite(args.suite, model)
    report = execute_suite(model, reqs, suite, jobs=args.jobs,
                           step_cap=args.step_cap)
    sys.stdout.write(report.text())
    if args.check_expectations:
        misses = report.expectation_misses(reqs)
        for rid, expectation, verdict in misses:
            print(f"MISS {rid} tagged {expectation} but {verdict}")
        if report.errored:
            return 3
        return 1 if misses else 0
    if report.errored:
        return 3
    return 1 if report.violated else 0


def _cmd_pipeline(args) -> int:
    model = load_model(args.model)
    reqs = load_reqs(args.reqs, model)
    config = GeneratorConfig(max_len=args.max_len, goal_mode=args.goals,
                             state_cap=args.state_cap,
                             step_cap=args.step_cap)
    suite, gen_report = generate_suite(model, reqs, config)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_atomic(os.path.join(args.out_dir, "suite.cts"),
                  serialize_suite(suite))
    _write_atomic(os.path.join(args.out_dir, "generation.txt"),
                  gen_report.text())
    report = execute_suite(model, reqs, suite, jobs=args.jobs,
                           step_cap=args.step_cap)
    _write_atomic(os.path.join(args.out_dir, "execution.txt"),
                  report.text())
    summary = (f"generated={gen_report.test_count}"
               f"/{gen_report.element_count} "
               f"violated={report.violated} passed={report.passed}")
    misses = []
    if args.check_expectations:
        misses = report.expectation_misses(reqs)
        summary += f" misses={len(misses)}"
    print(summary)
    if report.errored:
        return 3
    if args.check_expectations:
        return 1 if misses else 0
    return 1 if report.violated else 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return 2 if exit_.code else 0
    try:
        return args.func(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ModelError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
