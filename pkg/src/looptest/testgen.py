"""Coverage-driven test generation.

Goals are boolean predicates over a single execution position.  The generator
walks the goal list in order; for each goal still pending it searches the
bounded reachable part of the closed loop for a shortest witness, turns the
witness into a test, and marks every later pending goal that the new test
already covers.

The search is one shared breadth-first exploration per model and bound.
Scanning its discovery order gives the same answer a fresh per-goal search
would: layers are built in depth order, and inside a layer nodes are added
parent-first with each parent's successors sorted by nondet column, so the
first hit is a shortest witness with the lexicographically least column
sequence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Optional

from .model import (
    Binary,
    BoolDomain,
    ClosedLoopModel,
    DomainViolation,
    EvalError,
    Expr,
    Lit,
    ModelError,
    Ref,
    Unary,
    VarKind,
    eval_expr,
    init_state,
    referenced_names,
    ref_text,
)
from . import ltl
from .sim import StepCapExceeded, TestCase, TestSuite, simulate_lasso

DEFAULT_STATE_CAP = 10_000_000
DEFAULT_STEP_CAP = 10_000_000


class StateCapExceeded(ModelError):
    """The bounded exploration grew past the configured state budget."""


@dataclass(frozen=True)
class CoverageGoal:
    """One thing a suite should witness: predicate true at some position.

    The predicate is evaluated over a position environment: all state
    variables plus the nondet values applied on the step into the position
    (position 0 carries each nondet variable's first domain value).
    """

    predicate: Expr
    origin: str


@dataclass(frozen=True)
class GeneratorConfig:
    max_len: int
    goal_mode: str = "maximal"  # "maximal" | "all" | "all-kinds"
    state_cap: int = DEFAULT_STATE_CAP
    step_cap: int = DEFAULT_STEP_CAP


@dataclass(frozen=True)
class GoalOutcome:
    index: int  # 1-based position in the goal list
    origin: str
    status: str  # "COVERED" | "SUBSUMED" | "UNREACHABLE"
    test_id: Optional[str] = None
    position: Optional[int] = None


@dataclass(frozen=True)
class GenerationReport:
    bound: int
    outcomes: tuple
    test_count: int
    element_count: int

    def text(self) -> str:
        lines = []
        for out in self.outcomes:
            if out.status == "COVERED":
                tail = f"COVERED test={out.test_id} pos={out.position}"
            elif out.status == "SUBSUMED":
                tail = f"SUBSUMED test={out.test_id}"
            else:
                tail = f"UNREACHABLE(bound={self.bound})"
            lines.append(f"goal {out.index} {out.origin} :: {tail}")
        lines.append(f"suite {self.test_count}/{self.element_count}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Goal enumeration


def _value_goal(name: str, value, domain) -> Expr:
    if isinstance(domain, BoolDomain):
        return Ref(name) if value else Unary("!", Ref(name))
    return Binary("==", Ref(name), Lit(value))


def _literal_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def enumerate_goals(model: ClosedLoopModel, reqs: list,
                    mode: str = "maximal") -> list:
    """Build the goal list: variable values first, then formula pieces.

    Variable-value goals cover every domain value of every non-nondet
    variable; mode "all-kinds" adds the nondet variables too.  Formula goals
    cover temporal-free subformulas of the requirements in both polarities,
    maximal subtrees by default and every subtree under modes "all" and
    "all-kinds".  Goals that would read a nondet variable other than the
    plain value goals are dropped: their truth would depend on position 0's
    placeholder values.  Duplicates (by predicate structure) keep the first
    occurrence.
    """
    if mode not in ("maximal", "all", "all-kinds"):
        raise ValueError(f"unknown goal mode {mode!r}")
    nondet_names = {v.name for v in model.nondet_variables()}
    goals = []
    seen = set()

    def push(predicate: Expr, origin: str):
        if predicate in seen:
            return
        seen.add(predicate)
        goals.append(CoverageGoal(predicate=predicate, origin=origin))

    for v in model.variables:
        if v.kind is VarKind.NONDET and mode != "all-kinds":
            continue
        for value in v.domain.values():
            push(_value_goal(v.name, value, v.domain),
                 f"var {ref_text(v.name)}={_literal_text(value)}")

    sub_mode = "maximal" if mode == "maximal" else "all"
    for req in reqs:
        for expr in ltl.boolean_subformulas(req.formula, sub_mode):
            names = referenced_names(expr)
            if names & nondet_names:
                continue
            text = str(expr)
            push(expr, f"sub {req.rid} {text}")
            negated = Unary("!", expr)
            push(negated, f"sub {req.rid} {negated}")
    return goals


# --------------------------------------------------------------------------
# Compiled expression evaluation

_UNSET = object()


class _NeedBranch(Exception):
    """A nondet slot was read before any value was chosen for it."""

    def __init__(self, index: int):
        self.index = index


def _div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("division by zero")
    return a // b


def _mod(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("division by zero")
    return a % b


def compile_expr(expr: Expr, slot_of: dict):
    """Turn an expression into a closure over a flat environment list.

    Reading a slot holding the _UNSET marker raises _NeedBranch so a caller
    can split on that variable's domain and retry.
    """
    if isinstance(expr, Lit):
        value = expr.value
        return lambda env: value
    if isinstance(expr, Ref):
        idx = slot_of[expr.name]

        def read(env, _idx=idx):
            v = env[_idx]
            if v is _UNSET:
                raise _NeedBranch(_idx)
            return v
        return read
    if isinstance(expr, Unary):
        sub = compile_expr(expr.operand, slot_of)
        if expr.op == "!":
            return lambda env: not sub(env)
        return lambda env: -sub(env)
    if isinstance(expr, Binary):
        a = compile_expr(expr.lhs, slot_of)
        b = compile_expr(expr.rhs, slot_of)
        op = expr.op
        if op == "&&":
            return lambda env: a(env) and b(env)
        if op == "||":
            return lambda env: a(env) or b(env)
        if op == "->":
            return lambda env: (not a(env)) or b(env)
        if op == "==":
            return lambda env: a(env) == b(env)
        if op == "!=":
            return lambda env: a(env) != b(env)
        if op == "<":
            return lambda env: a(env) < b(env)
        if op == "<=":
            return lambda env: a(env) <= b(env)
        if op == ">":
            return lambda env: a(env) > b(env)
        if op == ">=":
            return lambda env: a(env) >= b(env)
        if op == "+":
            return lambda env: a(env) + b(env)
        if op == "-":
            return lambda env: a(env) - b(env)
        if op == "*":
            return lambda env: a(env) * b(env)
        if op == "/":
            return lambda env: _div(a(env), b(env))
        return lambda env: _mod(a(env), b(env))
    # conditional
    cond = compile_expr(expr.cond, slot_of)
    then = compile_expr(expr.then, slot_of)
    other = compile_expr(expr.other, slot_of)
    return lambda env: then(env) if cond(env) else other(env)


# --------------------------------------------------------------------------
# Bounded exploration


class BoundedExplorer:
    """Breadth-first image of the closed loop up to a step bound.

    States are tuples over the non-nondet variables in declaration order.
    Each discovered node remembers the parent it was first reached from and
    the full nondet column used, chosen lexicographically least (by domain
    value order) among the branches that reach the same successor.
    """

    def __init__(self, model: ClosedLoopModel, max_len: int,
                 state_cap: int = DEFAULT_STATE_CAP,
                 step_cap: int = DEFAULT_STEP_CAP):
        self.model = model
        self.max_len = max_len
        self.state_cap = state_cap
        self.step_cap = step_cap

        names = [v.name for v in model.variables]
        self._slot_of = {n: i for i, n in enumerate(names)}
        self._state_slots = [self._slot_of[v.name]
                             for v in model.state_variables()]
        if len(self._state_slots) == 1:
            only = self._state_slots[0]
            self._state_get = lambda env: (env[only],)
        else:
            self._state_get = itemgetter(*self._state_slots)
        nondet = model.nondet_variables()
        self._nondet_slots = [self._slot_of[v.name] for v in nondet]
        self._nondet_values = {self._slot_of[v.name]: tuple(v.domain.values())
                               for v in nondet}
        self._nondet_rank = {
            slot: {val: i for i, val in enumerate(vals)}
            for slot, vals in self._nondet_values.items()}
        self._default_column = tuple(v.domain.first() for v in nondet)

        self._assigns = []
        for block_name, block in (("plant", model.plant),
                                  ("controller", model.controller)):
            for i, asn in enumerate(block.assignments):
                fn = compile_expr(asn.expr, self._slot_of)
                domain = model.var(asn.target).domain
                where = f"{block_name} assignment {i}"
                self._assigns.append(
                    (self._slot_of[asn.target], fn, domain, asn.target, where))

        root = init_state(model)
        root_tuple = tuple(root[v.name] for v in model.state_variables())
        self.nodes = [root_tuple]
        self.parents = [-1]
        self.columns = [None]  # root has no producing column
        self._visited = {root_tuple: 0}
        self._depth_built = 0
        self._frontier = (0, 1)  # node index range of the deepest built layer
        self._steps = 0
        self._scratch = [_UNSET] * len(names)
        self._goal_cache = {}

    # -- stepping

    def _step_branches(self, state: tuple) -> list:
        """All successor states with the nondet choices that were read."""
        base = [_UNSET] * len(self._scratch)
        for slot, value in zip(self._state_slots, state):
            base[slot] = value
        stack = [(base, 0, {})]
        out = []
        assigns = self._assigns
        count = len(assigns)
        state_get = self._state_get
        nondet_values = self._nondet_values
        steps = self._steps
        cap = self.step_cap
        try:
            while stack:
                env, pos, chosen = stack.pop()
                steps += 1
                if steps > cap:
                    raise StepCapExceeded(
                        f"step budget of {cap} exhausted")
                try:
                    while pos < count:
                        slot, fn, domain, target, where = assigns[pos]
                        value = fn(env)
                        if not domain.contains(value):
                            raise DomainViolation(target, value, where)
                        env[slot] = value
                        pos += 1
                    out.append((state_get(env), chosen))
                except _NeedBranch as need:
                    for value in reversed(nondet_values[need.index]):
                        env2 = env[:]
                        env2[need.index] = value
                        chosen2 = dict(chosen)
                        chosen2[need.index] = value
                        stack.append((env2, pos, chosen2))
        finally:
            self._steps = steps
        return out

    def _column_and_rank(self, chosen: dict) -> tuple:
        column = []
        rank = []
        for slot in self._nondet_slots:
            value = chosen.get(slot)
            if value is None:
                column.append(self._nondet_values[slot][0])
                rank.append(0)
            else:
                column.append(value)
                rank.append(self._nondet_rank[slot][value])
        return tuple(column), tuple(rank)

    def _extend_layer(self) -> bool:
        if self._depth_built >= self.max_len:
            return False
        start, end = self._frontier
        if start == end:
            return False
        new_start = len(self.nodes)
        for idx in range(start, end):
            best = {}
            for succ, chosen in self._step_branches(self.nodes[idx]):
                if succ in self._visited:
                    continue
                column, rank = self._column_and_rank(chosen)
                held = best.get(succ)
                if held is None or rank < held[0]:
                    best[succ] = (rank, column)
            for succ, (rank, column) in sorted(best.items(),
                                               key=lambda kv: kv[1][0]):
                if succ in self._visited:
                    continue
                self._visited[succ] = len(self.nodes)
                self.nodes.append(succ)
                self.parents.append(idx)
                self.columns.append(column)
                if len(self.nodes) > self.state_cap:
                    raise StateCapExceeded(
                        f"state budget of {self.state_cap} exhausted")
        self._depth_built += 1
        self._frontier = (new_start, len(self.nodes))
        return True

    # -- queries

    def _node_env(self, idx: int) -> list:
        env = self._scratch
        for slot, value in zip(self._state_slots, self.nodes[idx]):
            env[slot] = value
        column = self.columns[idx]
        if column is None:
            column = self._default_column
        for slot, value in zip(self._nondet_slots, column):
            env[slot] = value
        return env

    def find(self, predicate: Expr):
        """First node satisfying the predicate, as (columns, position).

        Returns None when no node within the bound satisfies it.  The
        position environment of a node includes the nondet column that
        produced it (first domain values at the root).
        """
        if predicate in self._goal_cache:
            hit = self._goal_cache[predicate]
        else:
            fn = compile_expr(predicate, self._slot_of)
            hit = None
            idx = 0
            while True:
                while idx < len(self.nodes):
                    if fn(self._node_env(idx)):
                        hit = idx
                        break
                    idx += 1
                if hit is not None or not self._extend_layer():
                    break
            self._goal_cache[predicate] = hit
        if hit is None:
            return None
        columns = []
        idx = hit
        while self.parents[idx] >= 0:
            columns.append(self.columns[idx])
            idx = self.parents[idx]
        columns.reverse()
        return columns, len(columns)


# --------------------------------------------------------------------------
# Suite generation


def _case_from_columns(tid: str, names: tuple, columns: list,
                       default_column: tuple) -> TestCase:
    rows = tuple(columns) if columns else (default_column,)
    return TestCase(tid=tid, variables=names, rows=rows)


def _direct_nondet_witness(model: ClosedLoopModel, predicate: Expr):
    """Witness for a goal that reads nondet variables only.

    Such goals (value goals under the all-kinds mode) never depend on the
    reached state, so no exploration is needed: position 0 carries the domain
    defaults, any later position carries exactly the column applied by its
    producing step.  The explorer cannot answer these: it keeps one producing
    column per distinct state, so columns that lead to an already-seen state
    are invisible to it.
    """
    defaults = model.nondet_defaults()
    if eval_expr(predicate, defaults):
        return [], 0
    nondet = model.nondet_variables()
    for combo in itertools.product(*[v.domain.values() for v in nondet]):
        env = {v.name: value for v, value in zip(nondet, combo)}
        if eval_expr(predicate, env):
            return [combo], 1
    return None


def covers(model: ClosedLoopModel, case: TestCase, goal: CoverageGoal,
           step_cap: int = DEFAULT_STEP_CAP) -> bool:
    """True when the case's lasso satisfies the goal predicate somewhere.

    generate_suite runs the same check batched: one simulation per new test,
    scanned against every still-open goal.
    """
    trace = simulate_lasso(model, case, step_cap=step_cap)
    envs, _ = ltl.position_envs(trace)
    return any(eval_expr(goal.predicate, env) for env in envs)


def generate_suite(model: ClosedLoopModel, reqs: list,
                   config: GeneratorConfig):
    """Drive the goal list to a suite.  Returns (suite, report)."""
    goals = enumerate_goals(model, reqs, config.goal_mode)
    explorer = BoundedExplorer(model, config.max_len,
                               state_cap=config.state_cap,
                               step_cap=config.step_cap)
    names = tuple(v.name for v in model.nondet_variables())
    default_column = tuple(v.domain.first()
                           for v in model.nondet_variables())

    nondet_names = {v.name for v in model.nondet_variables()}
    outcomes: list = [None] * len(goals)
    cases = []
    try:
        for i, goal in enumerate(goals):
            if outcomes[i] is not None:
                continue
            reads = referenced_names(goal.predicate)
            if reads and reads <= nondet_names:
                found = _direct_nondet_witness(model, goal.predicate)
            else:
                found = explorer.find(goal.predicate)
            if found is None:
                outcomes[i] = GoalOutcome(index=i + 1, origin=goal.origin,
                                          status="UNREACHABLE")
                continue
            columns, position = found
            tid = f"t{len(cases)}"
            case = _case_from_columns(tid, names, columns, default_column)
            cases.append(case)
            outcomes[i] = GoalOutcome(index=i + 1, origin=goal.origin,
                                      status="COVERED", test_id=tid,
                                      position=position)
            trace = simulate_lasso(model, case, step_cap=config.step_cap)
            envs, _ = ltl.position_envs(trace)
            for j in range(i + 1, len(goals)):
                if outcomes[j] is not None:
                    continue
                later = goals[j].predicate
                if any(eval_expr(later, env) for env in envs):
                    outcomes[j] = GoalOutcome(index=j + 1,
                                              origin=goals[j].origin,
                                              status="SUBSUMED", test_id=tid)
    except ModelError as err:
        # Keep whatever was decided before the abort inspectable.
        done = tuple(out for out in outcomes if out is not None)
        partial = TestSuite(variables=names, cases=tuple(cases))
        err.partial_report = GenerationReport(
            bound=config.max_len, outcomes=done,
            test_count=len(partial.cases),
            element_count=partial.element_count)
        err.partial_suite = partial
        raise

    suite = TestSuite(variables=names, cases=tuple(cases))
    report = GenerationReport(bound=config.max_len, outcomes=tuple(outcomes),
                              test_count=len(suite.cases),
                              element_count=suite.element_count)
    return suite, report
