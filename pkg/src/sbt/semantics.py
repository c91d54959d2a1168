"""Fastforwarded (big-step) execution: one call ticks the whole tree.

A tick applies the environment choice atomically, then walks the tree depth
first. Sequences stop at the first non-success child, selectors at the first
non-failure child, memory variants resume from their stored child index,
parallel nodes always tick every child, and statuses of nodes the walk never
reached are reset to invalid. Guard evaluation inside actions sees writes
from earlier in the same tick; integer writes clamp to the target domain.
"""

from dataclasses import dataclass

from .model import (
    BLACKBOARD,
    BinaryOp,
    BoolVal,
    CoreExpr,
    ENV,
    EnumVal,
    IntRange,
    IntVal,
    NodeKind,
    ReadVar,
    SbtModel,
    Status,
    UnaryOp,
)


class DomainError(Exception):
    pass


class FrozenViolation(Exception):
    pass


@dataclass
class VariableState:
    env: dict
    blackboard: dict

    def copy(self) -> "VariableState":
        return VariableState(dict(self.env), dict(self.blackboard))

    def value(self, name: str, scope: str):
        return self.env[name] if scope == ENV else self.blackboard[name]


@dataclass
class Configuration:
    """One dynamic tree state: memory indices, variables, last statuses."""

    memory: dict  # memory-composite node id -> resume child ordinal
    vars: VariableState
    statuses: dict  # node id -> Status (as of the end of the last tick)
    tick_count: int = 0

    def copy(self) -> "Configuration":
        return Configuration(dict(self.memory), self.vars.copy(), dict(self.statuses), self.tick_count)


@dataclass(frozen=True)
class LeafStep:
    """One leaf execution: node, resulting status, blackboard writes applied."""

    node_id: int
    status: Status
    writes: tuple[tuple[str, object], ...]


LeafTrace = list[LeafStep]


def initial_configuration(model: SbtModel, env_choice: dict) -> Configuration:
    """Blackboard at declared initials, everything invalid, tick count zero.

    env_choice must bind every environment variable within its domain; a
    frozen variable with a declared initial must be bound to exactly that
    value (it is held constant for the rest of the run).
    """
    env = {}
    for v in model.env_vars:
        if v.name not in env_choice:
            raise DomainError(f"environment variable {v.name} not bound")
        value = env_choice[v.name]
        if not v.domain.contains(value):
            raise DomainError(f"value {value!r} outside domain of {v.name}")
        if v.frozen and v.initial is not None and value != v.initial:
            raise DomainError(f"frozen variable {v.name} must start at {v.initial!r}")
        env[v.name] = value
    for name in env_choice:
        if name not in env:
            raise DomainError(f"{name} is not an environment variable")
    blackboard = {v.name: v.initial for v in model.bb_vars}
    memory = {nid: 0 for nid in model.memory_ids}
    statuses = {n.id: Status.INVALID for n in model.nodes}
    return Configuration(memory, VariableState(env, blackboard), statuses, 0)


def eval_expr(expr: CoreExpr, vars: VariableState):
    """Total evaluation; intermediates are unbounded, clamping happens only
    when a value is assigned to an integer blackboard variable."""
    if isinstance(expr, (IntVal, BoolVal)):
        return expr.value
    if isinstance(expr, EnumVal):
        return expr.label
    if isinstance(expr, ReadVar):
        return vars.value(expr.name, expr.scope)
    if isinstance(expr, UnaryOp):
        v = eval_expr(expr.operand, vars)
        return (not v) if expr.op == "!" else -v
    if isinstance(expr, BinaryOp):
        left = eval_expr(expr.left, vars)
        if expr.op == "&&":
            return bool(left) and bool(eval_expr(expr.right, vars))
        if expr.op == "||":
            return bool(left) or bool(eval_expr(expr.right, vars))
        right = eval_expr(expr.right, vars)
        match expr.op:
            case "==":
                return left == right
            case "!=":
                return left != right
            case "<":
                return left < right
            case "<=":
                return left <= right
            case ">":
                return left > right
            case ">=":
                return left >= right
            case "+":
                return left + right
            case "-":
                return left - right
    raise TypeError(f"unknown expression node: {expr!r}")


def combine_sequence(child_statuses: list[Status]) -> tuple[Status, int]:
    """Success iff all success; otherwise the first non-success status.
    Also reports how many children were (or would be) executed."""
    for i, st in enumerate(child_statuses):
        if st != Status.SUCCESS:
            return st, i + 1
    return Status.SUCCESS, len(child_statuses)


def combine_selector(child_statuses: list[Status]) -> tuple[Status, int]:
    for i, st in enumerate(child_statuses):
        if st != Status.FAILURE:
            return st, i + 1
    return Status.FAILURE, len(child_statuses)


def combine_parallel(threshold: int, child_statuses: list[Status]) -> Status:
    n = len(child_statuses)
    successes = sum(1 for st in child_statuses if st == Status.SUCCESS)
    failures = sum(1 for st in child_statuses if st == Status.FAILURE)
    if successes >= threshold:
        return Status.SUCCESS
    if failures > n - threshold:
        return Status.FAILURE
    return Status.RUNNING


def apply_decorator(kind: NodeKind, child: Status) -> Status:
    if child == Status.RUNNING:
        return Status.RUNNING
    if kind == NodeKind.INVERTER:
        return Status.FAILURE if child == Status.SUCCESS else Status.SUCCESS
    if kind == NodeKind.FORCE_SUCCESS:
        return Status.SUCCESS
    if kind == NodeKind.FORCE_FAILURE:
        return Status.FAILURE
    raise ValueError(f"not a decorator kind: {kind}")


def apply_env_choice(model: SbtModel, config: Configuration, env_choice: dict) -> dict:
    """Validate an env choice against domains and frozenness; returns the
    full new environment valuation."""
    env = {}
    for v in model.env_vars:
        if v.name not in env_choice:
            raise DomainError(f"environment variable {v.name} not bound")
        value = env_choice[v.name]
        if not v.domain.contains(value):
            raise DomainError(f"value {value!r} outside domain of {v.name}")
        if v.frozen and value != config.vars.env[v.name]:
            raise FrozenViolation(f"frozen variable {v.name} cannot change")
        env[v.name] = value
    return env


def run_leaf(model: SbtModel, node_id: int, vars: VariableState) -> LeafStep:
    """Execute a check or action against the current variable state,
    mutating the blackboard in place."""
    node = model.nodes[node_id]
    if node.kind == NodeKind.CHECK:
        ok = eval_expr(node.expr, vars)
        return LeafStep(node_id, Status.SUCCESS if ok else Status.FAILURE, ())
    writes = []
    for guard in node.guards:
        if not eval_expr(guard.condition, vars):
            continue
        for target, rhs in guard.assigns:
            value = eval_expr(rhs, vars)
            domain = model.var(target).domain
            if isinstance(domain, IntRange):
                value = domain.clamp(value)
            vars.blackboard[target] = value
            writes.append((target, value))
        return LeafStep(node_id, guard.status, tuple(writes))
    return LeafStep(node_id, Status.FAILURE, ())  # no guard fired


def tick_big_step(
    model: SbtModel, config: Configuration, env_choice: dict
) -> tuple[Configuration, Status, LeafTrace]:
    """One full tick, collapsed into a single transition.

    Returns the successor configuration, the overall (root wrapper) status,
    and the ordered trace of executed leaves. Deterministic in its inputs;
    the given configuration is not mutated.
    """
    env = apply_env_choice(model, config, env_choice)
    new = config.copy()
    new.vars.env = env
    new.statuses = {n.id: Status.INVALID for n in model.nodes}
    trace: LeafTrace = []

    def exec_node(node_id: int) -> Status:
        node = model.nodes[node_id]
        kind = node.kind
        if kind in (NodeKind.CHECK, NodeKind.ACTION):
            step = run_leaf(model, node_id, new.vars)
            trace.append(step)
            new.statuses[node_id] = step.status
            return step.status
        if kind in (NodeKind.SEQUENCE, NodeKind.FALLBACK, NodeKind.SEQUENCE_M, NodeKind.FALLBACK_M):
            is_seq = kind in (NodeKind.SEQUENCE, NodeKind.SEQUENCE_M)
            start = new.memory.get(node_id, 0)
            continue_on = Status.SUCCESS if is_seq else Status.FAILURE
            result = continue_on
            for ordinal in range(start, len(node.children)):
                st = exec_node(node.children[ordinal])
                if st != continue_on:
                    result = st
                    break
            if node_id in new.memory:
                new.memory[node_id] = ordinal if result == Status.RUNNING else 0
            new.statuses[node_id] = result
            return result
        if kind == NodeKind.PARALLEL:
            statuses = [exec_node(child) for child in node.children]
            result = combine_parallel(node.threshold, statuses)
            new.statuses[node_id] = result
            return result
        if kind in (NodeKind.INVERTER, NodeKind.FORCE_SUCCESS, NodeKind.FORCE_FAILURE):
            result = apply_decorator(kind, exec_node(node.children[0]))
            new.statuses[node_id] = result
            return result
        raise ValueError(f"unexpected node kind: {kind}")

    root_child = model.nodes[model.root_id].children[0]
    root_status = exec_node(root_child)
    new.statuses[model.root_id] = root_status
    new.tick_count += 1
    return new, root_status, trace
