"""Micro-step execution: one node event per step.

A tick is a sequence of atomic machine steps, each emitting exactly one
event: EnterNode when the walk reaches a node, LeafResult when a leaf
executes, ExitNode when a node's status is decided. Enter/Exit events
bracket in depth-first order, so a tick over a tree with n nodes takes at
most 3n steps. Running every step of a tick must land on exactly the
configuration tick_big_step produces in one call; the equivalence suite
holds the two engines to that.

The __root wrapper is transparent here: it emits no events and simply takes
over the declared root's status when the walk finishes.
"""

from dataclasses import dataclass, field

from .model import NodeKind, SbtModel, Status
from .semantics import (
    Configuration,
    apply_decorator,
    apply_env_choice,
    combine_parallel,
    run_leaf,
)


@dataclass(frozen=True)
class EnterNode:
    node_id: int


@dataclass(frozen=True)
class LeafResult:
    node_id: int
    status: Status


@dataclass(frozen=True)
class ExitNode:
    node_id: int
    status: Status


StepEvent = EnterNode | LeafResult | ExitNode

_ENTER = 0
_LEAF = 1
_EXIT = 2


class StepOnDone(Exception):
    """step() was called on a machine whose tick already finished."""


@dataclass
class _Frame:
    node_id: int
    phase: int = _ENTER
    start: int = 0  # first child ordinal (resume index for memory nodes)
    ordinal: int = 0  # child currently being executed
    child_statuses: list = field(default_factory=list)
    result: Status | None = None


@dataclass
class MachineState:
    config: Configuration  # in-progress successor configuration
    stack: list  # of _Frame, mirroring an ancestor path
    pending_env: dict
    done: Status | None = None


def begin_tick(model: SbtModel, config: Configuration, env_choice: dict) -> MachineState:
    """Apply the environment choice and stand at the declared root."""
    env = apply_env_choice(model, config, env_choice)
    working = config.copy()
    working.vars.env = env
    working.statuses = {n.id: Status.INVALID for n in model.nodes}
    first = model.nodes[model.root_id].children[0]
    return MachineState(working, [_Frame(first)], dict(env_choice))


def step(model: SbtModel, m: MachineState) -> tuple[MachineState, StepEvent]:
    """Run one FSM micro-step, emitting exactly one event."""
    if m.done is not None:
        raise StepOnDone()
    frame: _Frame = m.stack[-1]
    node = model.nodes[frame.node_id]

    if frame.phase == _ENTER:
        if node.kind in (NodeKind.CHECK, NodeKind.ACTION):
            frame.phase = _LEAF
        else:
            if node.kind in (NodeKind.SEQUENCE_M, NodeKind.FALLBACK_M):
                frame.start = m.config.memory[node.id]
            frame.ordinal = frame.start
            frame.phase = _EXIT  # will be revisited when the child exits
            m.stack.append(_Frame(node.children[frame.ordinal]))
        return m, EnterNode(node.id)

    if frame.phase == _LEAF:
        leaf = run_leaf(model, node.id, m.config.vars)
        m.config.statuses[node.id] = leaf.status
        frame.result = leaf.status
        frame.phase = _EXIT
        return m, LeafResult(node.id, leaf.status)

    # _EXIT: the node's own result is decided.
    m.stack.pop()
    status = frame.result
    m.config.statuses[node.id] = status
    if node.kind in (NodeKind.SEQUENCE_M, NodeKind.FALLBACK_M):
        m.config.memory[node.id] = frame.ordinal if status == Status.RUNNING else 0
    if m.stack:
        _absorb_child_result(model, m, m.stack[-1], status)
    else:
        m.config.statuses[model.root_id] = status
        m.config.tick_count += 1
        m.done = status
    return m, ExitNode(node.id, status)


def _absorb_child_result(model: SbtModel, m: MachineState, parent: _Frame, status: Status) -> None:
    """Record a finished child; either schedule the next child or decide."""
    node = model.nodes[parent.node_id]
    kind = node.kind
    parent.child_statuses.append(status)

    if kind in (NodeKind.INVERTER, NodeKind.FORCE_SUCCESS, NodeKind.FORCE_FAILURE):
        parent.result = apply_decorator(kind, status)
        return
    if kind == NodeKind.PARALLEL:
        if parent.ordinal + 1 < len(node.children):
            parent.ordinal += 1
            m.stack.append(_Frame(node.children[parent.ordinal]))
        else:
            parent.result = combine_parallel(node.threshold, parent.child_statuses)
        return
    continue_on = (
        Status.SUCCESS if kind in (NodeKind.SEQUENCE, NodeKind.SEQUENCE_M) else Status.FAILURE
    )
    if status == continue_on and parent.ordinal + 1 < len(node.children):
        parent.ordinal += 1
        m.stack.append(_Frame(node.children[parent.ordinal]))
    else:
        # Early exit or last child: remaining children stay invalid.
        parent.result = status


def run_to_completion(
    model: SbtModel, m: MachineState
) -> tuple[Configuration, Status, list[StepEvent]]:
    """Iterate step until the tick finishes; the composition fastforwarding
    collapses into a single big-step call."""
    events: list[StepEvent] = []
    while m.done is None:
        m, event = step(model, m)
        events.append(event)
    return m.config, m.done, events
