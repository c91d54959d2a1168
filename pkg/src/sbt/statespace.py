"""Explicit-state enumeration of the reachable configuration graph.

States are canonical flat vectors of small integers covering memory indices,
blackboard values, environment values, and per-node statuses; the tick
counter is deliberately excluded so the system stays finite. Each admissible
environment choice contributes one outgoing edge per state; free variables
range over their whole domain every tick, frozen ones are pinned to their
current value. Enumeration is a breadth-first search from every admissible
initial state, with ids assigned in discovery order, so two runs over the
same model produce identical systems.
"""

import itertools
from collections import deque
from dataclasses import dataclass, field

from .model import (
    ExprAtom,
    STATUS_CODE,
    STATUS_FROM_CODE,
    SbtModel,
    Status,
    StatusAtom,
)
from .semantics import Configuration, VariableState, eval_expr, tick_big_step


@dataclass(frozen=True)
class Limits:
    max_states: int = 1_000_000
    max_edges: int = 10_000_000


class StateLimitExceeded(Exception):
    def __init__(self, stats: dict):
        super().__init__(f"state limit exceeded: {stats}")
        self.stats = stats


@dataclass(frozen=True)
class TsState:
    vec: tuple[int, ...]
    id: int = -1


@dataclass
class TransitionSystem:
    """Finite graph of reachable configurations with atom labeling."""

    states: list[TsState]
    initials: list[int]
    edges: list[list[int]]  # state id -> ascending successor ids
    stats: dict = field(default_factory=dict)
    model: SbtModel | None = None
    labeling: dict | None = None  # synthetic systems: (sid, label) -> bool

    @property
    def num_states(self) -> int:
        return len(self.states)

    def ap_eval(self, sid: int, label) -> bool:
        if self.model is not None:
            return eval_atom(self.model, self.states[sid], label)
        return bool(self.labeling.get((sid, label), False))


# ---------------------------------------------------------------------------
# Canonical encoding


def encode_config(model: SbtModel, config: Configuration) -> tuple[int, ...]:
    """Injective over configurations modulo tick_count."""
    vec = [config.memory[nid] for nid in model.memory_ids]
    for v in model.bb_vars:
        vec.append(v.domain.values().index(config.vars.blackboard[v.name]))
    for v in model.env_vars:
        vec.append(v.domain.values().index(config.vars.env[v.name]))
    for node in model.nodes:
        vec.append(STATUS_CODE[config.statuses[node.id]])
    return tuple(vec)


def decode_state(model: SbtModel, state: TsState) -> Configuration:
    vec = state.vec
    i = 0
    memory = {}
    for nid in model.memory_ids:
        memory[nid] = vec[i]
        i += 1
    blackboard = {}
    for v in model.bb_vars:
        blackboard[v.name] = v.domain.values()[vec[i]]
        i += 1
    env = {}
    for v in model.env_vars:
        env[v.name] = v.domain.values()[vec[i]]
        i += 1
    statuses = {}
    for node in model.nodes:
        statuses[node.id] = STATUS_FROM_CODE[vec[i]]
        i += 1
    return Configuration(memory, VariableState(env, blackboard), statuses, 0)


def env_choices(model: SbtModel, current_env: dict | None):
    """All admissible environment choices, in deterministic lexicographic
    order (declaration order of variables, domain order of values).

    With current_env given, frozen variables are pinned to their current
    value; without it (initial choice), a frozen variable with a declared
    initial is pinned to that, anything else ranges over its full domain.
    """
    axes = []
    for v in model.env_vars:
        if v.frozen and current_env is not None:
            axes.append((current_env[v.name],))
        elif v.frozen and v.initial is not None:
            axes.append((v.initial,))
        else:
            axes.append(v.domain.values())
    names = [v.name for v in model.env_vars]
    for combo in itertools.product(*axes):
        yield dict(zip(names, combo))


def successors(model: SbtModel, state: TsState) -> list[TsState]:
    """One successor per admissible env choice, duplicates merged, sorted
    lexicographically on the encoding."""
    config = decode_state(model, state)
    seen = set()
    out = []
    for choice in env_choices(model, config.vars.env):
        succ, _, _ = tick_big_step(model, config, choice)
        vec = encode_config(model, succ)
        if vec not in seen:
            seen.add(vec)
            out.append(vec)
    out.sort()
    return [TsState(vec) for vec in out]


def initial_states(model: SbtModel) -> list[TsState]:
    from .semantics import initial_configuration

    seen = set()
    out = []
    for choice in env_choices(model, None):
        config = initial_configuration(model, choice)
        vec = encode_config(model, config)
        if vec not in seen:
            seen.add(vec)
            out.append(TsState(vec))
    return out


def enumerate_system(model: SbtModel, limits: Limits = Limits()) -> TransitionSystem:
    """BFS over the reachable state space; raises StateLimitExceeded with
    partial stats when a limit is hit."""
    ids: dict[tuple, int] = {}
    states: list[TsState] = []
    edges: list[list[int]] = []
    queue: deque[int] = deque()
    edge_count = 0
    frontier_peak = 0

    def discover(vec: tuple) -> int:
        if vec in ids:
            return ids[vec]
        if len(states) >= limits.max_states:
            raise StateLimitExceeded(
                {"states": len(states), "edges": edge_count, "frontier_peak": frontier_peak}
            )
        sid = len(states)
        ids[vec] = sid
        states.append(TsState(vec, sid))
        edges.append([])
        queue.append(sid)
        return sid

    for st in initial_states(model):
        discover(st.vec)
    initials = list(range(len(states)))

    while queue:
        frontier_peak = max(frontier_peak, len(queue))
        sid = queue.popleft()
        succ_ids = []
        for succ in successors(model, states[sid]):
            succ_ids.append(discover(succ.vec))
        succ_ids = sorted(set(succ_ids))
        edge_count += len(succ_ids)
        if edge_count > limits.max_edges:
            raise StateLimitExceeded(
                {"states": len(states), "edges": edge_count, "frontier_peak": frontier_peak}
            )
        edges[sid] = succ_ids

    stats = {"states": len(states), "edges": edge_count, "frontier_peak": frontier_peak}
    return TransitionSystem(states, initials, edges, stats, model)


# ---------------------------------------------------------------------------
# Atom evaluation and export


def eval_atom(model: SbtModel, state: TsState, label) -> bool:
    if isinstance(label, StatusAtom):
        config = decode_state(model, state)
        return config.statuses[label.node_id] == label.status
    if isinstance(label, ExprAtom):
        config = decode_state(model, state)
        return bool(eval_expr(label.expr, config.vars))
    raise TypeError(f"unknown atom label: {label!r}")


def spec_atoms(model: SbtModel):
    """Distinct atoms across all specs, in first-occurrence order."""
    from .ltl import atoms_of

    seen: dict = {}
    for spec in model.specs:
        for label in atoms_of(spec.formula):
            seen.setdefault(label, None)
    return list(seen)


def dump_system(ts: TransitionSystem, model: SbtModel) -> str:
    """Graph export: header, one line per edge, then one labeling block per
    named atom. Deterministic bytes for golden tests. Initial states are
    always ids 0..k-1 by construction."""
    lines = [
        f"states={ts.num_states} edges={sum(len(e) for e in ts.edges)} initials={len(ts.initials)}"
    ]
    for src, succ in enumerate(ts.edges):
        for dst in succ:
            lines.append(f"{src} {dst}")
    for i, label in enumerate(spec_atoms(model)):
        text = getattr(label, "text", str(label))
        true_at = [str(sid) for sid in range(ts.num_states) if ts.ap_eval(sid, label)]
        lines.append(f"ap {i} {text}")
        lines.append(" ".join(true_at))
    return "\n".join(lines) + "\n"


def parse_dump(text: str) -> tuple[int, list[tuple[int, int]], int]:
    """Re-read a dump's graph part: (state count, edge list, initial count)."""
    lines = text.splitlines()
    head = dict(part.split("=") for part in lines[0].split())
    n, m, k = int(head["states"]), int(head["edges"]), int(head["initials"])
    edge_list = []
    for line in lines[1 : 1 + m]:
        a, b = line.split()
        edge_list.append((int(a), int(b)))
    return n, edge_list, k
