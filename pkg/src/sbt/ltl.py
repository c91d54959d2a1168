"""LTL formulas over state atoms, translation to Buchi automata, and
explicit-state model checking with lasso counterexamples.

The checking pipeline is the classical one: negate, desugar to the
{next, until, not, and, or} core, push negations to atoms (introducing the
release dual), build a generalized Buchi automaton with the closure-set
tableau, degeneralize with a counter, and run a nested depth-first search
over the synchronous product with the transition system.

Atoms are opaque hashable labels; the transition system supplies their
per-state truth through ``ap_eval(state_id, label)``.
"""

from dataclasses import dataclass


class LtlFormula:
    pass


@dataclass(frozen=True)
class TrueF(LtlFormula):
    pass


@dataclass(frozen=True)
class FalseF(LtlFormula):
    pass


@dataclass(frozen=True)
class Atom(LtlFormula):
    label: object


@dataclass(frozen=True)
class Not(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class And(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Or(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Implies(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Next(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class Until(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Release(LtlFormula):
    """Dual of Until; introduced by negation normal form."""

    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class StrongRelease(LtlFormula):
    """right holds up to and including the moment left holds, which must occur."""

    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Globally(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class Finally(LtlFormula):
    operand: LtlFormula


def atoms_of(f: LtlFormula) -> list:
    """Distinct atom labels in first-occurrence order."""
    seen: dict = {}

    def walk(g: LtlFormula) -> None:
        if isinstance(g, Atom):
            seen.setdefault(g.label, None)
        elif isinstance(g, (Not, Next, Globally, Finally)):
            walk(g.operand)
        elif isinstance(g, (And, Or, Implies, Until, Release, StrongRelease)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return list(seen)


def formula_to_str(f: LtlFormula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return str(getattr(f.label, "text", f.label))
    if isinstance(f, Not):
        return f"!({formula_to_str(f.operand)})"
    if isinstance(f, Next):
        return f"X ({formula_to_str(f.operand)})"
    if isinstance(f, Globally):
        return f"G ({formula_to_str(f.operand)})"
    if isinstance(f, Finally):
        return f"F ({formula_to_str(f.operand)})"
    pairs = {And: "&&", Or: "||", Implies: "->", Until: "U", Release: "R", StrongRelease: "M"}
    for cls, op in pairs.items():
        if isinstance(f, cls):
            return f"({formula_to_str(f.left)} {op} {formula_to_str(f.right)})"
    raise TypeError(f"unknown formula node: {f!r}")


def _key(f: LtlFormula) -> str:
    # repr of frozen dataclasses is deterministic, which keeps tableau
    # processing (and therefore automaton state numbering) stable across runs.
    return repr(f)


# ---------------------------------------------------------------------------
# Rewriting


def desugar(f: LtlFormula) -> LtlFormula:
    """Rewrite G, F, M, and -> into the {X, U, !, &&, ||} core."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.operand))
    if isinstance(f, Next):
        return Next(desugar(f.operand))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Or(desugar(f.left), desugar(f.right))
    if isinstance(f, Implies):
        return Or(Not(desugar(f.left)), desugar(f.right))
    if isinstance(f, Until):
        return Until(desugar(f.left), desugar(f.right))
    if isinstance(f, Release):
        return Release(desugar(f.left), desugar(f.right))
    if isinstance(f, Finally):
        return Until(TrueF(), desugar(f.operand))
    if isinstance(f, Globally):
        return Not(Until(TrueF(), Not(desugar(f.operand))))
    if isinstance(f, StrongRelease):
        left, right = desugar(f.left), desugar(f.right)
        return Until(right, And(left, right))
    raise TypeError(f"unknown formula node: {f!r}")


def to_nnf(f: LtlFormula) -> LtlFormula:
    """Push negations down to atoms. Input must be in core operators."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Next):
        return Next(to_nnf(f.operand))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Not):
        g = f.operand
        if isinstance(g, Atom):
            return f
        if isinstance(g, TrueF):
            return FalseF()
        if isinstance(g, FalseF):
            return TrueF()
        if isinstance(g, Not):
            return to_nnf(g.operand)
        if isinstance(g, And):
            return Or(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Or):
            return And(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Next):
            return Next(to_nnf(Not(g.operand)))
        if isinstance(g, Until):
            return Release(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Release):
            return Until(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    raise ValueError(f"not a core-operator formula: {f!r}")


# ---------------------------------------------------------------------------
# Tableau construction (closure sets -> generalized Buchi -> counter NBA)


@dataclass
class BuchiAutomaton:
    """Nondeterministic Buchi automaton over atom valuations.

    Every transition into state q carries q's guard: a conjunction of atom
    literals given as (label, polarity) pairs. An empty guard is `true`.
    """

    num_states: int
    initial: list[int]
    guards: list[tuple[tuple[object, bool], ...]]
    succ: list[list[int]]
    accepting: frozenset[int]

    def guard_holds(self, state: int, ap_eval, sid: int) -> bool:
        return all(ap_eval(sid, label) == pol for label, pol in self.guards[state])

    def to_text(self) -> str:
        lines = [f"states={self.num_states} initial={sorted(self.initial)}"]
        for q in range(self.num_states):
            guard = " & ".join(
                ("" if pol else "!") + str(getattr(label, "text", label))
                for label, pol in self.guards[q]
            )
            acc = " accepting" if q in self.accepting else ""
            lines.append(f"state {q} [{guard or 'true'}]{acc} -> {sorted(self.succ[q])}")
        return "\n".join(lines) + "\n"


class _Node:
    __slots__ = ("incoming", "new", "old", "nxt")

    def __init__(self, incoming, new, old, nxt):
        self.incoming = set(incoming)
        self.new = dict(new)
        self.old = dict(old)
        self.nxt = dict(nxt)


_INIT = -1


def _expand(node: _Node, done: list, index: dict) -> None:
    if not node.new:
        key = (frozenset(node.old), frozenset(node.nxt))
        if key in index:
            done[index[key]].incoming |= node.incoming
            return
        node_id = len(done)
        index[key] = node_id
        done.append(node)
        succ = _Node({node_id}, node.nxt, {}, {})
        _expand(succ, done, index)
        return
    eta = min(node.new, key=_key)
    del node.new[eta]
    if eta in node.old:
        _expand(node, done, index)
        return
    if isinstance(eta, TrueF):
        _expand(node, done, index)
        return
    if isinstance(eta, FalseF):
        return  # inconsistent branch
    if isinstance(eta, Atom) or (isinstance(eta, Not) and isinstance(eta.operand, Atom)):
        negated = eta.operand if isinstance(eta, Not) else Not(eta)
        if negated in node.old:
            return  # contradiction
        node.old[eta] = None
        _expand(node, done, index)
        return
    node.old[eta] = None
    if isinstance(eta, And):
        for part in (eta.left, eta.right):
            if part not in node.old:
                node.new[part] = None
        _expand(node, done, index)
        return
    if isinstance(eta, Next):
        node.nxt[eta.operand] = None
        _expand(node, done, index)
        return
    if isinstance(eta, (Or, Until, Release)):
        left = _Node(node.incoming, node.new, node.old, node.nxt)
        right = _Node(node.incoming, node.new, node.old, node.nxt)
        if isinstance(eta, Or):
            left.new[eta.left] = None
            right.new[eta.right] = None
        elif isinstance(eta, Until):
            left.new[eta.left] = None
            left.nxt[eta] = None
            right.new[eta.right] = None
        else:  # Release
            left.new[eta.right] = None
            left.nxt[eta] = None
            right.new[eta.left] = None
            right.new[eta.right] = None
        _expand(left, done, index)
        _expand(right, done, index)
        return
    raise ValueError(f"formula not in negation normal form: {eta!r}")


def _until_subformulas(f: LtlFormula) -> list[Until]:
    found: dict = {}

    def walk(g: LtlFormula) -> None:
        if isinstance(g, Until):
            found.setdefault(g, None)
        if isinstance(g, (Not, Next)):
            walk(g.operand)
        elif isinstance(g, (And, Or, Until, Release)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return sorted(found, key=_key)


def to_buchi(f: LtlFormula) -> BuchiAutomaton:
    """Translate an NNF formula into a (degeneralized) Buchi automaton."""
    done: list[_Node] = []
    index: dict = {}
    _expand(_Node({_INIT}, {f: None}, {}, {}), done, index)

    guards = []
    for node in done:
        literals = []
        for g in node.old:
            if isinstance(g, Atom):
                literals.append((g.label, True))
            elif isinstance(g, Not) and isinstance(g.operand, Atom):
                literals.append((g.operand.label, False))
        literals.sort(key=lambda item: (repr(item[0]), item[1]))
        guards.append(tuple(literals))

    initial = [q for q, node in enumerate(done) if _INIT in node.incoming]
    succ: list[list[int]] = [[] for _ in done]
    for q, node in enumerate(done):
        for r in sorted(node.incoming):
            if r != _INIT:
                succ[r].append(q)
    for lst in succ:
        lst.sort()

    acc_sets = []
    for u in _until_subformulas(f):
        acc_sets.append(frozenset(q for q, n in enumerate(done) if u not in n.old or u.right in n.old))

    return _degeneralize(len(done), initial, guards, succ, acc_sets)


def _degeneralize(n, initial, guards, succ, acc_sets) -> BuchiAutomaton:
    if not acc_sets:
        return BuchiAutomaton(n, initial, guards, succ, frozenset(range(n)))
    k = len(acc_sets)
    # Counter copies (q, i); the counter advances when leaving a state in F_i,
    # and acceptance is every F_0 state in copy 0.
    state_id: dict[tuple[int, int], int] = {}
    new_guards: list = []
    new_succ: list[list[int]] = []

    def intern(q: int, i: int) -> int:
        key = (q, i)
        if key not in state_id:
            state_id[key] = len(new_guards)
            new_guards.append(guards[q])
            new_succ.append([])
        return state_id[key]

    new_initial = [intern(q, 0) for q in initial]
    frontier = list(state_id)
    seen = set(frontier)
    while frontier:
        q, i = frontier.pop(0)
        j = (i + 1) % k if q in acc_sets[i] else i
        src = state_id[(q, i)]
        for q2 in succ[q]:
            if (q2, j) not in seen:
                seen.add((q2, j))
                frontier.append((q2, j))
            new_succ[src].append(intern(q2, j))
        new_succ[src].sort()
    accepting = frozenset(
        state_id[(q, 0)] for q in acc_sets[0] if (q, 0) in state_id
    )
    return BuchiAutomaton(len(new_guards), new_initial, new_guards, new_succ, accepting)


# ---------------------------------------------------------------------------
# Model checking


@dataclass(frozen=True)
class Verdict:
    """Holds, or a counterexample lasso of transition-system state ids."""

    holds: bool
    stem: tuple[int, ...] = ()
    loop: tuple[int, ...] = ()


HOLDS = Verdict(True)


class ResourceExceeded(Exception):
    def __init__(self, stats: dict):
        super().__init__(f"resource limit exceeded: {stats}")
        self.stats = stats


def eval_state_formula(ts, sid: int, f: LtlFormula) -> bool:
    """Evaluate a temporal-operator-free formula at one state."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        return bool(ts.ap_eval(sid, f.label))
    if isinstance(f, Not):
        return not eval_state_formula(ts, sid, f.operand)
    if isinstance(f, And):
        return eval_state_formula(ts, sid, f.left) and eval_state_formula(ts, sid, f.right)
    if isinstance(f, Or):
        return eval_state_formula(ts, sid, f.left) or eval_state_formula(ts, sid, f.right)
    if isinstance(f, Implies):
        return (not eval_state_formula(ts, sid, f.left)) or eval_state_formula(ts, sid, f.right)
    raise ValueError(f"not a state formula: {f!r}")


def model_check(ts, f: LtlFormula, max_product_states: int | None = None) -> Verdict:
    """Check that every infinite path of ts from an initial state satisfies f.

    Searches the product of ts with the automaton for the negation; a
    reachable accepting cycle yields a Violated verdict whose lasso is the
    product path projected back onto transition-system states.
    """
    nba = to_buchi(to_nnf(desugar(Not(f))))
    ap_eval = ts.ap_eval
    edges = ts.edges

    def psucc(state):
        sid, q = state
        out = []
        for t in edges[sid]:
            for q2 in nba.succ[q]:
                if nba.guard_holds(q2, ap_eval, t):
                    out.append((t, q2))
        return out

    inits = []
    for sid in ts.initials:
        for q in nba.initial:
            if nba.guard_holds(q, ap_eval, sid):
                inits.append((sid, q))

    blue: set = set()
    red: set = set()
    explored = 0

    for p0 in inits:
        if p0 in blue:
            continue
        stack = [(p0, iter(psucc(p0)))]
        on_stack = {p0: 0}
        blue.add(p0)
        explored += 1
        while stack:
            node, it = stack[-1]
            pushed = False
            for nxt in it:
                if nxt not in blue:
                    blue.add(nxt)
                    explored += 1
                    if max_product_states is not None and explored > max_product_states:
                        raise ResourceExceeded({"product_states": explored})
                    on_stack[nxt] = len(stack)
                    stack.append((nxt, iter(psucc(nxt))))
                    pushed = True
                    break
            if pushed:
                continue
            # post-order visit
            if node[1] in nba.accepting:
                hit = _red_search(node, psucc, red, on_stack)
                if hit is not None:
                    rpath, w = hit
                    blue_path = [s for s, _ in stack]
                    j = on_stack[w]
                    stem = blue_path[:j]
                    loop = blue_path[j:] + rpath[1:]
                    return Verdict(False, tuple(p[0] for p in stem), tuple(p[0] for p in loop))
            stack.pop()
            del on_stack[node]
    return HOLDS


def _red_search(seed, psucc, red, on_stack):
    """Inner DFS: from an accepting seed, look for an edge back onto the
    outer DFS stack. Returns (red path, stack state hit) or None."""
    red.add(seed)
    rstack = [(seed, iter(psucc(seed)))]
    rpath = [seed]
    while rstack:
        node, it = rstack[-1]
        pushed = False
        for nxt in it:
            if nxt in on_stack:
                return list(rpath), nxt
            if nxt not in red:
                red.add(nxt)
                rstack.append((nxt, iter(psucc(nxt))))
                rpath.append(nxt)
                pushed = True
                break
        if pushed:
            continue
        rstack.pop()
        rpath.pop()
    return None


def check_invariant(ts, p: LtlFormula) -> Verdict:
    """Fast path for safety properties of shape G p with p a state formula.

    Breadth-first search for a reachable state violating p; the returned
    counterexample has a minimal stem to the violation, extended by a
    deterministic walk to any cycle so the result is still a valid lasso.
    """
    from collections import deque

    parent: dict[int, int | None] = {}
    queue = deque()
    for sid in ts.initials:
        if sid not in parent:
            parent[sid] = None
            queue.append(sid)
    violating = None
    while queue:
        sid = queue.popleft()
        if not eval_state_formula(ts, sid, p):
            violating = sid
            break
        for t in ts.edges[sid]:
            if t not in parent:
                parent[t] = sid
                queue.append(t)
    if violating is None:
        return HOLDS

    path = [violating]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()  # initial .. violating

    walk = [violating]
    seen_at = {violating: 0}
    while True:
        nxt = ts.edges[walk[-1]][0]
        if nxt in seen_at:
            j = seen_at[nxt]
            loop = walk[j:]
            stem = path[:-1] + walk[:j]
            return Verdict(False, tuple(stem), tuple(loop))
        seen_at[nxt] = len(walk)
        walk.append(nxt)
