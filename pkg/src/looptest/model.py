"""Core model representation: variables, domains, expressions, update blocks.

A closed-loop model pairs a plant block with a controller block over a shared
set of typed scalar variables.  One step of the composed system runs the plant
assignments first, then the controller assignments, both in source order with
read-latest semantics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union


class ModelError(Exception):
    """Base class for everything raised by this package."""


class EvalError(ModelError):
    """Runtime failure while evaluating an expression (division by zero etc.)."""


class DomainViolation(ModelError):
    """An assignment produced a value outside the target variable's domain."""

    def __init__(self, name: str, value: object, where: str):
        super().__init__(f"{where}: value {value!r} outside domain of '{name}'")
        self.name = name
        self.value = value
        self.where = where


class VarKind(enum.Enum):
    """The five variable roles a model distinguishes."""

    NONDET = "nondet"
    INPUT = "input"
    OUTPUT = "output"
    PLANT = "plantvar"
    CTRL = "ctrlvar"


PLANT_TARGETS = (VarKind.INPUT, VarKind.PLANT)
CTRL_TARGETS = (VarKind.OUTPUT, VarKind.CTRL)


class BoolDomain:
    """Two-valued domain, printed as 0/1 in files."""

    def values(self):
        return (False, True)

    def contains(self, value: object) -> bool:
        return isinstance(value, bool)

    def first(self):
        return False

    def __eq__(self, other):
        return isinstance(other, BoolDomain)

    def __hash__(self):
        return hash(BoolDomain)

    def __repr__(self):
        return "BoolDomain()"


class IntRange:
    """Inclusive integer interval lo..hi."""

    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi

    def values(self):
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, value: object) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) \
            and self.lo <= value <= self.hi

    def first(self):
        return self.lo

    def __eq__(self, other):
        return isinstance(other, IntRange) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((IntRange, self.lo, self.hi))

    def __repr__(self):
        return f"IntRange({self.lo}, {self.hi})"


class EnumDomain:
    """Finite set of named labels; values are the label strings."""

    def __init__(self, labels: Iterable[str]):
        self.labels = tuple(labels)

    def values(self):
        return self.labels

    def contains(self, value: object) -> bool:
        return value in self.labels

    def first(self):
        return self.labels[0]

    def __eq__(self, other):
        return isinstance(other, EnumDomain) and self.labels == other.labels

    def __hash__(self):
        return hash((EnumDomain, self.labels))

    def __repr__(self):
        return f"EnumDomain({list(self.labels)})"


Domain = Union[BoolDomain, IntRange, EnumDomain]


@dataclass(frozen=True)
class Variable:
    """A declared scalar variable.  Nondeterministic variables carry no init."""

    name: str
    kind: VarKind
    domain: Domain
    init: Optional[object] = None


# --------------------------------------------------------------------------
# Expressions


class Expr:
    """Base class for expression nodes.  Nodes compare structurally."""

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self),) + self._key())

    def _key(self):  # pragma: no cover - abstract
        raise NotImplementedError


class Lit(Expr):
    """Literal: bool, int, or enum label (a string)."""

    def __init__(self, value):
        self.value = value

    def _key(self):
        return (type(self.value).__name__, self.value)

    def __repr__(self):
        return f"Lit({self.value!r})"

    def __str__(self):
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        return str(self.value)


class Ref(Expr):
    """Reference to a declared variable by flattened name."""

    def __init__(self, name: str):
        self.name = name

    def _key(self):
        return (self.name,)

    def __repr__(self):
        return f"Ref({self.name!r})"

    def __str__(self):
        return ref_text(self.name)


class Unary(Expr):
    """Unary operator: '!' (bool) or '-' (int)."""

    def __init__(self, op: str, operand: Expr):
        self.op = op
        self.operand = operand

    def _key(self):
        return (self.op, self.operand)

    def __repr__(self):
        return f"Unary({self.op!r}, {self.operand!r})"

    def __str__(self):
        inner = str(self.operand)
        if not isinstance(self.operand, (Lit, Ref, Unary)):
            inner = f"({inner})"
        return self.op + inner


#: binding strength, larger binds tighter
_PREC = {
    "?": 1,
    "->": 2,
    "||": 3,
    "&&": 4,
    "==": 5, "!=": 5,
    "<": 6, "<=": 6, ">": 6, ">=": 6,
    "+": 7, "-": 7,
    "*": 8, "/": 8, "mod": 8,
}


def _sub_text(parent_prec: int, node: Expr, tighten: bool = False) -> str:
    text = str(node)
    if isinstance(node, Binary):
        prec = _PREC[node.op]
    elif isinstance(node, Cond):
        prec = _PREC["?"]
    else:
        return text
    if prec < parent_prec or (tighten and prec == parent_prec):
        return f"({text})"
    return text


class Binary(Expr):
    """Binary operator application."""

    def __init__(self, op: str, lhs: Expr, rhs: Expr):
        self.op = op
        self.lhs = lhs
        self.rhs = rhs

    def _key(self):
        return (self.op, self.lhs, self.rhs)

    def __repr__(self):
        return f"Binary({self.op!r}, {self.lhs!r}, {self.rhs!r})"

    def __str__(self):
        prec = _PREC[self.op]
        if self.op == "->":
            # right associative
            return f"{_sub_text(prec, self.lhs, tighten=True)} -> {_sub_text(prec, self.rhs)}"
        left = _sub_text(prec, self.lhs)
        right = _sub_text(prec, self.rhs, tighten=True)
        return f"{left} {self.op} {right}"


class Cond(Expr):
    """Conditional choice: cond ? then : other."""

    def __init__(self, cond: Expr, then: Expr, other: Expr):
        self.cond = cond
        self.then = then
        self.other = other

    def _key(self):
        return (self.cond, self.then, self.other)

    def __repr__(self):
        return f"Cond({self.cond!r}, {self.then!r}, {self.other!r})"

    def __str__(self):
        parts = (
            _sub_text(_PREC["?"], self.cond, tighten=True),
            _sub_text(_PREC["?"], self.then, tighten=True),
            # nested conditionals chain in the else arm without parens
            _sub_text(_PREC["?"], self.other),
        )
        return f"{parts[0]} ? {parts[1]} : {parts[2]}"


def ref_text(name: str) -> str:
    """Surface syntax for a flattened variable name: door.2 prints as door[2]."""
    base, dot, idx = name.rpartition(".")
    if dot and idx.isdigit():
        return f"{base}[{idx}]"
    return name


def eval_expr(expr: Expr, env: Mapping[str, object]):
    """Evaluate an expression over a total environment.

    Boolean connectives short-circuit.  Integer division and mod are floored
    (Python semantics); division by zero raises EvalError.
    """
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Ref):
        try:
            return env[expr.name]
        except KeyError:
            raise EvalError(f"undefined variable '{expr.name}'") from None
    if isinstance(expr, Unary):
        value = eval_expr(expr.operand, env)
        return (not value) if expr.op == "!" else -value
    if isinstance(expr, Binary):
        op = expr.op
        lhs = eval_expr(expr.lhs, env)
        if op == "&&":
            return bool(lhs) and bool(eval_expr(expr.rhs, env))
        if op == "||":
            return bool(lhs) or bool(eval_expr(expr.rhs, env))
        if op == "->":
            return (not lhs) or bool(eval_expr(expr.rhs, env))
        rhs = eval_expr(expr.rhs, env)
        if op == "+":
            return lhs + rhs
        if op == "-":
            return lhs - rhs
        if op == "*":
            return lhs * rhs
        if op == "/":
            if rhs == 0:
                raise EvalError("division by zero")
            return lhs // rhs
        if op == "mod":
            if rhs == 0:
                raise EvalError("mod by zero")
            return lhs % rhs
        if op == "==":
            return lhs == rhs
        if op == "!=":
            return lhs != rhs
        if op == "<":
            return lhs < rhs
        if op == "<=":
            return lhs <= rhs
        if op == ">":
            return lhs > rhs
        if op == ">=":
            return lhs >= rhs
        raise EvalError(f"unknown operator '{op}'")
    if isinstance(expr, Cond):
        if eval_expr(expr.cond, env):
            return eval_expr(expr.then, env)
        return eval_expr(expr.other, env)
    raise EvalError(f"cannot evaluate {expr!r}")


def referenced_names(expr: Expr) -> set:
    """All variable names an expression mentions."""
    out = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Ref):
            out.add(node.name)
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.append(node.lhs)
            stack.append(node.rhs)
        elif isinstance(node, Cond):
            stack.extend((node.cond, node.then, node.other))
    return out


# --------------------------------------------------------------------------
# Blocks and the model itself


@dataclass(frozen=True)
class Assignment:
    target: str
    expr: Expr


@dataclass(frozen=True)
class UpdateBlock:
    """An ordered sequence of assignments executed with read-latest semantics."""

    assignments: tuple = ()


@dataclass(frozen=True)
class ClosedLoopModel:
    """A plant/controller pair over declared variables, in declaration order."""

    name: str
    variables: tuple
    plant: UpdateBlock
    controller: UpdateBlock
    _by_name: dict = field(default=None, compare=False, repr=False)
    _nondet: tuple = field(default=None, compare=False, repr=False)
    _state: tuple = field(default=None, compare=False, repr=False)
    _state_names: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {v.name: v for v in self.variables})
        object.__setattr__(self, "_nondet", tuple(
            v for v in self.variables if v.kind is VarKind.NONDET))
        object.__setattr__(self, "_state", tuple(
            v for v in self.variables if v.kind is not VarKind.NONDET))
        object.__setattr__(self, "_state_names", tuple(v.name for v in self._state))

    def var(self, name: str) -> Variable:
        return self._by_name[name]

    def has_var(self, name: str) -> bool:
        return name in self._by_name

    def nondet_variables(self):
        return self._nondet

    def state_variables(self):
        """All non-nondeterministic variables, in declaration order."""
        return self._state

    def nondet_defaults(self) -> dict:
        """Domain-first values, used when no step has applied any yet."""
        return {v.name: v.domain.first() for v in self.nondet_variables()}


class SystemState:
    """Total assignment to the non-nondeterministic variables of a model.

    States compare and hash by value, so they can key visited sets.
    """

    __slots__ = ("_names", "_values")

    def __init__(self, names: tuple, values: tuple):
        self._names = names
        self._values = values

    @classmethod
    def from_env(cls, model: ClosedLoopModel, env: Mapping[str, object]) -> "SystemState":
        names = model._state_names
        return cls(names, tuple(env[n] for n in names))

    @property
    def values(self) -> tuple:
        return self._values

    @property
    def names(self) -> tuple:
        return self._names

    def __getitem__(self, name: str):
        try:
            return self._values[self._names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def as_dict(self) -> dict:
        return dict(zip(self._names, self._values))

    def __eq__(self, other):
        return isinstance(other, SystemState) and self._values == other._values \
            and self._names == other._names

    def __hash__(self):
        return hash(self._values)

    def __repr__(self):
        inner = ", ".join(f"{n}={v!r}" for n, v in zip(self._names, self._values))
        return f"SystemState({inner})"


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    message: str
    where: str

    def __str__(self):
        return f"{self.where}: {self.message}"


def enum_label_map(model: ClosedLoopModel) -> dict:
    """Map each enum label to its domain.  Labels must be globally unambiguous."""
    out = {}
    for v in model.variables:
        if isinstance(v.domain, EnumDomain):
            for label in v.domain.labels:
                out.setdefault(label, v.domain)
    return out


def _type_of(expr: Expr, model: ClosedLoopModel, labels: dict, diags: list, where: str):
    """Infer an expression's type: 'bool', 'int', an EnumDomain, or None on error."""

    def fail(msg):
        diags.append(Diagnostic(msg, where))
        return None

    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return "bool"
        if isinstance(expr.value, int):
            return "int"
        dom = labels.get(expr.value)
        if dom is None:
            return fail(f"unknown enum label '{expr.value}'")
        return dom
    if isinstance(expr, Ref):
        if not model.has_var(expr.name):
            return fail(f"undeclared variable '{expr.name}'")
        dom = model.var(expr.name).domain
        if isinstance(dom, BoolDomain):
            return "bool"
        if isinstance(dom, IntRange):
            return "int"
        return dom
    if isinstance(expr, Unary):
        t = _type_of(expr.operand, model, labels, diags, where)
        want = "bool" if expr.op == "!" else "int"
        if t is not None and t != want:
            return fail(f"operator '{expr.op}' needs {want}, got {_type_name(t)}")
        return want if t is not None else None
    if isinstance(expr, Binary):
        lt = _type_of(expr.lhs, model, labels, diags, where)
        rt = _type_of(expr.rhs, model, labels, diags, where)
        if lt is None or rt is None:
            return None
        op = expr.op
        if op in ("+", "-", "*", "/", "mod"):
            if lt != "int" or rt != "int":
                return fail(f"type mismatch: '{op}' needs int operands, "
                            f"got {_type_name(lt)} and {_type_name(rt)}")
            return "int"
        if op in ("<", "<=", ">", ">="):
            if lt != "int" or rt != "int":
                return fail(f"type mismatch: '{op}' compares ints, "
                            f"got {_type_name(lt)} and {_type_name(rt)}")
            return "bool"
        if op in ("&&", "||", "->"):
            if lt != "bool" or rt != "bool":
                return fail(f"type mismatch: '{op}' needs bool operands, "
                            f"got {_type_name(lt)} and {_type_name(rt)}")
            return "bool"
        if op in ("==", "!="):
            if lt != rt:
                return fail(f"type mismatch: '{op}' compares {_type_name(lt)} "
                            f"with {_type_name(rt)}")
            return "bool"
        return fail(f"unknown operator '{op}'")
    if isinstance(expr, Cond):
        ct = _type_of(expr.cond, model, labels, diags, where)
        if ct is not None and ct != "bool":
            fail(f"conditional guard must be bool, got {_type_name(ct)}")
        tt = _type_of(expr.then, model, labels, diags, where)
        ot = _type_of(expr.other, model, labels, diags, where)
        if tt is None or ot is None:
            return None
        if tt != ot:
            return fail(f"conditional arms disagree: {_type_name(tt)} vs {_type_name(ot)}")
        return tt
    return fail(f"unknown expression node {type(expr).__name__}")


def _type_name(t) -> str:
    if isinstance(t, EnumDomain):
        return "enum{" + ",".join(t.labels) + "}"
    return str(t)


def _domain_type(dom: Domain):
    if isinstance(dom, BoolDomain):
        return "bool"
    if isinstance(dom, IntRange):
        return "int"
    return dom


def validate_model(model: ClosedLoopModel) -> list:
    """Check declarations, kinds, and expression types.  Returns diagnostics."""
    diags = []
    seen = set()
    labels = {}
    for v in model.variables:
        where = f"variable '{v.name}'"
        if v.name in seen:
            diags.append(Diagnostic("duplicate variable name", where))
        seen.add(v.name)
        if isinstance(v.domain, IntRange) and v.domain.lo > v.domain.hi:
            diags.append(Diagnostic(
                f"empty range {v.domain.lo}..{v.domain.hi}", where))
        if isinstance(v.domain, EnumDomain):
            if len(set(v.domain.labels)) != len(v.domain.labels) or not v.domain.labels:
                diags.append(Diagnostic("enum labels must be distinct and nonempty", where))
            for label in v.domain.labels:
                prior = labels.setdefault(label, v.domain)
                if prior != v.domain:
                    diags.append(Diagnostic(
                        f"enum label '{label}' already belongs to a different enum", where))
        if v.kind is VarKind.NONDET:
            if v.init is not None:
                diags.append(Diagnostic("nondet variables take no init value", where))
        else:
            if v.init is None:
                diags.append(Diagnostic("missing init value", where))
            elif not v.domain.contains(v.init):
                diags.append(Diagnostic(f"init value {v.init!r} outside domain", where))

    for block_name, block, allowed in (
        ("plant", model.plant, PLANT_TARGETS),
        ("controller", model.controller, CTRL_TARGETS),
    ):
        for i, asn in enumerate(block.assignments):
            where = f"{block_name} assignment {i + 1} to '{asn.target}'"
            if not model.has_var(asn.target):
                diags.append(Diagnostic("assignment to undeclared variable", where))
                continue
            target = model.var(asn.target)
            if target.kind not in allowed:
                diags.append(Diagnostic(
                    f"{block_name} block may not assign a {target.kind.value} variable",
                    where))
            t = _type_of(asn.expr, model, labels, diags, where)
            want = _domain_type(target.domain)
            if t is not None and t != want:
                diags.append(Diagnostic(
                    f"type mismatch: assigning {_type_name(t)} to {_type_name(want)} "
                    "variable", where))
    return diags


# --------------------------------------------------------------------------
# Execution


def init_state(model: ClosedLoopModel) -> SystemState:
    """The state holding every declared init value."""
    return SystemState(model._state_names,
                       tuple(v.init for v in model.state_variables()))


def step(model: ClosedLoopModel, state: SystemState,
         nondet: Mapping[str, object]) -> SystemState:
    """Run one full step: plant assignments, then controller assignments.

    The nondeterministic values for this step must all be supplied; they are
    readable by both blocks but never assigned.  Every assignment is checked
    against the target's domain.
    """
    env = state.as_dict()
    for v in model.nondet_variables():
        value = nondet[v.name]
        if not v.domain.contains(value):
            raise DomainViolation(v.name, value, "nondet value")
        env[v.name] = value
    for block_name, block in (("plant", model.plant), ("controller", model.controller)):
        for i, asn in enumerate(block.assignments):
            value = eval_expr(asn.expr, env)
            target = model.var(asn.target)
            if not target.domain.contains(value):
                raise DomainViolation(
                    asn.target, value,
                    f"{block_name} assignment {i + 1}")
            env[asn.target] = value
    return SystemState.from_env(model, env)
