"""Independent reference implementations the tests compare against.

Everything here favors the dumbest correct algorithm: formula evaluation by
literally walking an unrolled path, reachability by enumerating every nondet
sequence as a tree without any visited bookkeeping.  Slow on purpose.
"""

from itertools import product

from looptest.ltl import (
    And,
    Atom,
    Finally,
    Globally,
    Implies,
    Next,
    Not,
    Or,
    Until,
)
from looptest.model import eval_expr, init_state, step


def lasso_positions(trace):
    """Position environments of a trace, rebuilt from its raw fields.

    Returns (envs, prefix) in a shape where the loop re-entry is spelled out
    explicitly: the whole first pass becomes the prefix and the loop body
    starts with the wrap environment.  For traces whose loop starts after
    position 0 this is a redundant but equivalent unrolling, which is the
    point: it never takes the shortcut the production code takes.
    """
    defaults = trace.model.nondet_defaults()
    envs = []
    for k, state in enumerate(trace.states):
        env = state.as_dict()
        env.update(defaults if trace.nondet[k] is None else trace.nondet[k])
        envs.append(env)
    wrap = trace.states[trace.prefix_len].as_dict()
    wrap.update(trace.wrap_nondet)
    unrolled = envs + [wrap] + envs[trace.prefix_len + 1:]
    return unrolled, len(envs)


def path_eval(formula, envs, prefix, position=0):
    """Evaluate a formula on a lasso by scanning explicit paths.

    envs[prefix:] repeats forever.  Temporal operators walk the position
    sequence directly: from position i the future consists of i..end plus
    one full loop, which visits every reachable environment at least once.
    """
    m = len(envs)
    cache = {}

    def future(i):
        return list(range(i, m)) + list(range(prefix, m))

    def ev(node, i):
        key = (id(node), i)
        if key in cache:
            return cache[key]
        if isinstance(node, Atom):
            value = bool(eval_expr(node.expr, envs[i]))
        elif isinstance(node, Not):
            value = not ev(node.operand, i)
        elif isinstance(node, And):
            value = ev(node.lhs, i) and ev(node.rhs, i)
        elif isinstance(node, Or):
            value = ev(node.lhs, i) or ev(node.rhs, i)
        elif isinstance(node, Implies):
            value = not ev(node.lhs, i) or ev(node.rhs, i)
        elif isinstance(node, Next):
            value = ev(node.operand, i + 1 if i + 1 < m else prefix)
        elif isinstance(node, Finally):
            value = any(ev(node.operand, j) for j in set(future(i)))
        elif isinstance(node, Globally):
            value = all(ev(node.operand, j) for j in set(future(i)))
        elif isinstance(node, Until):
            value = False
            seq = future(i)
            for k, j in enumerate(seq):
                if ev(node.rhs, j):
                    value = all(ev(node.lhs, seq[x]) for x in range(k))
                    break
        else:
            raise TypeError(f"unknown formula node {node!r}")
        cache[key] = value
        return value

    return ev(formula, position)


def eval_trace(formula, trace, position=0):
    """path_eval over a trace's reconstructed position environments."""
    envs, prefix = lasso_positions(trace)
    return path_eval(formula, envs, prefix, position)


def all_columns(model):
    """Every nondet assignment for one step, as dicts, in domain order."""
    names = [v.name for v in model.nondet_variables()]
    spaces = [v.domain.values() for v in model.nondet_variables()]
    return [dict(zip(names, combo)) for combo in product(*spaces)]


def shortest_hit(model, predicate, max_len):
    """Length of the shortest nondet sequence reaching the predicate.

    Enumerates the full tree of nondet sequences level by level, no state
    dedup, and checks the predicate on each position environment (state plus
    the values applied by the incoming step; domain defaults at the root).
    Returns None when no sequence of length <= max_len reaches it.
    """
    return shortest_hits(model, [predicate], max_len)[0]


def shortest_hits(model, predicates, max_len):
    """shortest_hit for many predicates in one tree walk."""
    hits = [None] * len(predicates)
    pending = set(range(len(predicates)))

    def check(env, depth):
        for i in list(pending):
            if eval_expr(predicates[i], env):
                hits[i] = depth
                pending.discard(i)

    columns = all_columns(model)
    root = init_state(model)
    env = root.as_dict()
    env.update(model.nondet_defaults())
    check(env, 0)
    level = [root]
    for depth in range(1, max_len + 1):
        if not pending:
            break
        grown = []
        for state in level:
            for column in columns:
                after = step(model, state, column)
                env = after.as_dict()
                env.update(column)
                check(env, depth)
                grown.append(after)
        level = grown
    return hits
