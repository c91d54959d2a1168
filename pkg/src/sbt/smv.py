"""SMV emission at four optimization levels, plus an in-process
interpreter for the emitted subset used to cross-validate encodings.

The transition relation is obtained by executing one tick symbolically:
every node status, every blackboard write, and every resume index becomes
an expression over the pre-tick variables and the incoming environment
choice (referenced as next(e), legal on the right-hand side of next()
assignments). The optimization ladder then decides which status signals
stay state variables and which become DEFINEs:

  no_opt     every node status is a VAR, assigned its exact tick value.
  first_opt  internal-node statuses become DEFINEs reconstructed from their
             children's stored statuses; this is exact, including the
             all-invalid initial state.
  last_opt   check statuses additionally become DEFINEs that re-evaluate
             the check's condition against the observed state.
  full_opt   action statuses become DEFINEs too (guard scan, no writes);
             only blackboard, environment, and memory indices remain VARs.

Variable dynamics are identical at every level, so the reachable sets
projected onto (blackboard, env, memory) always agree with the native
enumeration. Stored statuses are not functions of the post-tick variables,
so at last_opt/full_opt the define-based status signals are re-evaluation
semantics by construction, not the stored values; no_opt and first_opt
reproduce stored statuses exactly, root included.
"""

from dataclasses import dataclass, field
from enum import Enum

from . import ltl
from .model import (
    BLACKBOARD,
    BinaryOp,
    BoolDomain,
    BoolVal,
    CoreExpr,
    ENV,
    EnumDomain,
    EnumVal,
    ExprAtom,
    IntRange,
    IntVal,
    NodeDef,
    NodeKind,
    ReadVar,
    SbtModel,
    Status,
    StatusAtom,
    UnaryOp,
)
from .statespace import Limits, TransitionSystem, decode_state, enumerate_system


class OptLevel(Enum):
    NO_OPT = "no_opt"
    FIRST_OPT = "first_opt"
    LAST_OPT = "last_opt"
    FULL_OPT = "full_opt"


_LADDER = [OptLevel.NO_OPT, OptLevel.FIRST_OPT, OptLevel.LAST_OPT, OptLevel.FULL_OPT]

_STATUS_VALUES = ("invalid", "success", "failure", "running")


# ---------------------------------------------------------------------------
# Expression forms (constructed by emit, evaluated by the interpreter)


@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class SNextVar:
    name: str


@dataclass(frozen=True)
class SConst:
    value: object  # int | bool | str (enum label or status symbol)


@dataclass(frozen=True)
class SOp:
    op: str  # SMV spelling: = != < <= > >= + - & | !
    args: tuple


@dataclass(frozen=True)
class SCase:
    branches: tuple  # ordered (condition, value); last condition is TRUE


@dataclass(frozen=True)
class SSet:
    values: tuple  # nondeterministic choice, init/next right-hand sides only


SmvExpr = SVar | SNextVar | SConst | SOp | SCase | SSet

TRUE = SConst(True)
FALSE = SConst(False)
_INVALID = SConst("invalid")


def scase(branches: list) -> SmvExpr:
    """Ordered case with the obvious simplifications."""
    pruned = []
    for cond, value in branches:
        if cond == FALSE:
            continue
        pruned.append((cond, value))
        if cond == TRUE:
            break
    if not pruned:
        raise ValueError("case with no reachable branch")
    if pruned[-1][0] != TRUE:
        raise ValueError("case must end with a TRUE branch")
    if all(v == pruned[0][1] for _, v in pruned):
        return pruned[0][1]
    if len(pruned) == 1:
        return pruned[0][1]
    return SCase(tuple(pruned))


def sand(a: SmvExpr, b: SmvExpr) -> SmvExpr:
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    if a == FALSE or b == FALSE:
        return FALSE
    return SOp("&", (a, b))


def sor(a: SmvExpr, b: SmvExpr) -> SmvExpr:
    if a == FALSE:
        return b
    if b == FALSE:
        return a
    if a == TRUE or b == TRUE:
        return TRUE
    return SOp("|", (a, b))


def seq_(a: SmvExpr, value: str) -> SmvExpr:
    return SOp("=", (a, SConst(value)))


def sne(a: SmvExpr, value: str) -> SmvExpr:
    return SOp("!=", (a, SConst(value)))


# ---------------------------------------------------------------------------
# Types and the document


@dataclass(frozen=True)
class SBoolType:
    def contains(self, v):
        return isinstance(v, bool)

    def values(self):
        return (False, True)

    def render(self) -> str:
        return "boolean"


@dataclass(frozen=True)
class SRangeType:
    lo: int
    hi: int

    def values(self):
        return tuple(range(self.lo, self.hi + 1))

    def render(self) -> str:
        return f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class SEnumType:
    labels: tuple

    def values(self):
        return self.labels

    def render(self) -> str:
        return "{" + ", ".join(self.labels) + "}"


@dataclass
class SmvDocument:
    """Structured SMV module; render() is a pure function of the content."""

    module_name: str
    variables: list  # (name, type) in declaration order
    defines: list  # (name, SmvExpr)
    init_assigns: list  # (name, SmvExpr)
    next_assigns: list  # (name, SmvExpr)
    ltlspecs: list  # (spec name, rendered line, ltl.LtlFormula)
    level: OptLevel

    def var_count(self) -> int:
        return len(self.variables)

    def render(self) -> str:
        lines = [f"MODULE {self.module_name}"]
        if self.variables:
            lines.append("VAR")
            for name, vtype in self.variables:
                lines.append(f"    {name} : {vtype.render()};")
        if self.defines:
            lines.append("DEFINE")
            for name, expr in self.defines:
                lines.append(f"    {name} := {render_expr(expr)};")
        if self.init_assigns or self.next_assigns:
            lines.append("ASSIGN")
            nexts = dict(self.next_assigns)
            for name, expr in self.init_assigns:
                lines.append(f"    init({name}) := {render_expr(expr)};")
                lines.append(f"    next({name}) := {render_expr(nexts[name])};")
        for name, line, _ in self.ltlspecs:
            lines.append(f"-- spec {name}")
            lines.append(line)
        return "\n".join(lines) + "\n"


def render_expr(e: SmvExpr) -> str:
    if isinstance(e, SVar):
        return e.name
    if isinstance(e, SNextVar):
        return f"next({e.name})"
    if isinstance(e, SConst):
        if e.value is True:
            return "TRUE"
        if e.value is False:
            return "FALSE"
        return str(e.value)
    if isinstance(e, SOp):
        if e.op == "!":
            return f"!{_paren(e.args[0])}"
        if e.op == "-" and len(e.args) == 1:
            return f"-{_paren(e.args[0])}"
        return f"{_paren(e.args[0])} {e.op} {_paren(e.args[1])}"
    if isinstance(e, SCase):
        parts = "; ".join(f"{render_expr(c)} : {render_expr(v)}" for c, v in e.branches)
        return f"case {parts}; esac"
    if isinstance(e, SSet):
        return "{" + ", ".join(render_expr(SConst(v)) for v in e.values) + "}"
    raise TypeError(f"unknown SMV expression: {e!r}")


def _paren(e: SmvExpr) -> str:
    text = render_expr(e)
    if isinstance(e, (SVar, SNextVar, SConst)):
        return text
    return f"({text})"


# ---------------------------------------------------------------------------
# Symbolic tick


def _tx(expr: CoreExpr, sym: dict, env_next: bool) -> SmvExpr:
    """DSL expression to SMV, blackboard reads through the threaded symbolic
    state, environment reads as next(e) during the tick or e afterwards."""
    if isinstance(expr, IntVal):
        return SConst(expr.value)
    if isinstance(expr, BoolVal):
        return SConst(expr.value)
    if isinstance(expr, EnumVal):
        return SConst(expr.label)
    if isinstance(expr, ReadVar):
        if expr.scope == ENV:
            return SNextVar(expr.name) if env_next else SVar(expr.name)
        return sym[expr.name]
    if isinstance(expr, UnaryOp):
        operand = _tx(expr.operand, sym, env_next)
        if expr.op == "!":
            if operand == TRUE:
                return FALSE
            if operand == FALSE:
                return TRUE
            return SOp("!", (operand,))
        return SOp("-", (operand,))
    if isinstance(expr, BinaryOp):
        left = _tx(expr.left, sym, env_next)
        right = _tx(expr.right, sym, env_next)
        op = {"==": "=", "&&": "&", "||": "|"}.get(expr.op, expr.op)
        if op == "&":
            return sand(left, right)
        if op == "|":
            return sor(left, right)
        return SOp(op, (left, right))
    raise TypeError(f"unknown expression node: {expr!r}")


def _status_name(node: NodeDef) -> str:
    return f"st_{node.name}"


def _mem_name(node: NodeDef) -> str:
    return f"mem_{node.name}"


class _SymbolicTick:
    """Collects, for one symbolic execution of the whole tick, each node's
    (execution condition, status) pairs, the blackboard write-through
    expressions, and the next resume indices."""

    def __init__(self, model: SbtModel):
        self.model = model
        self.status_cases: dict[int, list] = {n.id: [] for n in model.nodes}
        self.mem_cases: dict[int, list] = {nid: [] for nid in model.memory_ids}
        self.sym = {v.name: SVar(v.name) for v in model.bb_vars}
        self.run()

    def run(self) -> None:
        model = self.model
        root_child = model.nodes[model.root_id].children[0]
        status, self.sym = self.exec_node(root_child, TRUE, self.sym)
        self.status_cases[model.root_id].append((TRUE, status))

    def status_of(self, node_id: int) -> SmvExpr:
        """The node's next status: its collected cases, invalid otherwise."""
        return scase(self.status_cases[node_id] + [(TRUE, _INVALID)])

    def mem_of(self, node_id: int) -> SmvExpr:
        name = _mem_name(self.model.nodes[node_id])
        return scase(self.mem_cases[node_id] + [(TRUE, SVar(name))])

    def exec_node(self, nid: int, cond: SmvExpr, sym: dict) -> tuple[SmvExpr, dict]:
        """Status (valid under cond) and the post-execution blackboard.
        Writes inside the result are already guarded by cond."""
        node = self.model.nodes[nid]
        kind = node.kind
        if kind == NodeKind.CHECK:
            status = scase([(_tx(node.expr, sym, True), SConst("success")), (TRUE, SConst("failure"))])
            self.status_cases[nid].append((cond, status))
            return status, sym
        if kind == NodeKind.ACTION:
            return self.exec_action(node, cond, sym)
        if kind == NodeKind.PARALLEL:
            statuses = []
            for child in node.children:
                st, sym = self.exec_node(child, cond, sym)
                statuses.append(st)
            count_s = self._count(statuses, "success")
            count_f = self._count(statuses, "failure")
            n = len(statuses)
            status = scase(
                [
                    (SOp(">=", (count_s, SConst(node.threshold))), SConst("success")),
                    (SOp(">", (count_f, SConst(n - node.threshold))), SConst("failure")),
                    (TRUE, SConst("running")),
                ]
            )
            self.status_cases[nid].append((cond, status))
            return status, sym
        if kind in (NodeKind.INVERTER, NodeKind.FORCE_SUCCESS, NodeKind.FORCE_FAILURE):
            child_status, sym = self.exec_node(node.children[0], cond, sym)
            mapping = {
                NodeKind.INVERTER: [
                    (seq_(child_status, "success"), SConst("failure")),
                    (seq_(child_status, "failure"), SConst("success")),
                    (TRUE, SConst("running")),
                ],
                NodeKind.FORCE_SUCCESS: [
                    (seq_(child_status, "running"), SConst("running")),
                    (TRUE, SConst("success")),
                ],
                NodeKind.FORCE_FAILURE: [
                    (seq_(child_status, "running"), SConst("running")),
                    (TRUE, SConst("failure")),
                ],
            }[kind]
            status = scase(mapping)
            self.status_cases[nid].append((cond, status))
            return status, sym
        # Composites with sequential semantics (memoryless and memory).
        is_seq = kind in (NodeKind.SEQUENCE, NodeKind.SEQUENCE_M)
        if kind in (NodeKind.SEQUENCE, NodeKind.FALLBACK):
            status, sym = self.exec_chain(node, 0, cond, sym, is_seq)
            self.status_cases[nid].append((cond, status))
            return status, sym
        # Memory composite: one branch per possible resume index.
        mem_var = SVar(_mem_name(node))
        branch_results = []
        for start in range(len(node.children)):
            bcond = sand(cond, SOp("=", (mem_var, SConst(start))))
            status, bsym = self.exec_chain(node, start, bcond, sym, is_seq)
            branch_results.append((SOp("=", (mem_var, SConst(start))), status, bsym))
        status = scase([(c, st) for c, st, _ in branch_results])
        merged = {}
        for name in sym:
            merged[name] = scase([(c, bsym[name]) for c, _, bsym in branch_results[:-1]] + [(TRUE, branch_results[-1][2][name])])
        running_ordinal = self.running_ordinal(node, branch_results)
        self.mem_cases[nid].append(
            (cond, scase([(seq_(status, "running"), running_ordinal), (TRUE, SConst(0))]))
        )
        self.status_cases[nid].append((cond, status))
        return status, merged

    def exec_chain(
        self, node: NodeDef, start: int, cond: SmvExpr, sym: dict, is_seq: bool
    ) -> tuple[SmvExpr, dict]:
        """Tick children start.. with early exit; returns combined status."""
        continue_on = "success" if is_seq else "failure"
        statuses = []
        child_cond = cond
        for i in range(start, len(node.children)):
            st, sym = self.exec_node(node.children[i], child_cond, sym)
            statuses.append(st)
            child_cond = sand(child_cond, seq_(st, continue_on))
        branches = [(sne(st, continue_on), st) for st in statuses[:-1]]
        branches.append((TRUE, statuses[-1]))
        return scase(branches), sym

    def running_ordinal(self, node: NodeDef, branch_results) -> SmvExpr:
        """Which child is running, per resume branch, scanning the chain."""
        is_seq = node.kind == NodeKind.SEQUENCE_M
        continue_on = "success" if is_seq else "failure"
        outer = []
        mem_var = SVar(_mem_name(node))
        for start, (bc, _, _) in enumerate(branch_results):
            # Recompute per-child statuses cheaply from the recorded cases:
            # the running child is the first from `start` whose status is
            # running, assuming the chain stopped there.
            inner = []
            for i in range(start, len(node.children)):
                child = self.model.nodes[node.children[i]]
                inner.append((seq_(self.status_of(child.id), "running"), SConst(i)))
            inner.append((TRUE, SConst(start)))
            outer.append((bc, scase(inner)))
        outer[-1] = (TRUE, outer[-1][1])
        return scase(outer)

    def _count(self, statuses: list, which: str) -> SmvExpr:
        total: SmvExpr | None = None
        for st in statuses:
            one = scase([(seq_(st, which), SConst(1)), (TRUE, SConst(0))])
            total = one if total is None else SOp("+", (total, one))
        return total

    def exec_action(self, node: NodeDef, cond: SmvExpr, sym: dict) -> tuple[SmvExpr, dict]:
        guard_exprs = [_tx(g.condition, sym, True) for g in node.guards]
        status = scase(
            [(g, SConst(st.status.value)) for g, st in zip(guard_exprs, node.guards)]
            + [(TRUE, SConst("failure"))]
        )
        self.status_cases[node.id].append((cond, status))
        # Each guard's assignments thread sequentially from the incoming
        # state; the ordered case across guards keeps firing exclusive.
        per_guard_syms = []
        for g, gexpr in zip(node.guards, guard_exprs):
            gsym = dict(sym)
            for target, rhs in g.assigns:
                value = _tx(rhs, gsym, True)
                domain = self.model.var(target).domain
                if isinstance(domain, IntRange):
                    value = scase(
                        [
                            (SOp("<", (value, SConst(domain.lo))), SConst(domain.lo)),
                            (SOp(">", (value, SConst(domain.hi))), SConst(domain.hi)),
                            (TRUE, value),
                        ]
                    )
                gsym[target] = value
            per_guard_syms.append((sand(cond, gexpr), gsym))
        merged = {}
        for name in sym:
            branches = [(c, gsym[name]) for c, gsym in per_guard_syms if gsym[name] != sym[name]]
            merged[name] = scase(branches + [(TRUE, sym[name])]) if branches else sym[name]
        return status, merged


# ---------------------------------------------------------------------------
# Define bodies for the optimization ladder


def _exact_internal_define(model: SbtModel, node: NodeDef, signal) -> SmvExpr:
    """Reconstruct an internal node's stored status from its children's
    stored statuses; exact whenever the child signals are exact."""
    kind = node.kind
    children = [signal(cid) for cid in node.children]
    if kind == NodeKind.ROOT:
        return children[0]
    if kind in (NodeKind.INVERTER, NodeKind.FORCE_SUCCESS, NodeKind.FORCE_FAILURE):
        child = children[0]
        mapping = {
            NodeKind.INVERTER: [
                (seq_(child, "invalid"), _INVALID),
                (seq_(child, "success"), SConst("failure")),
                (seq_(child, "failure"), SConst("success")),
                (TRUE, SConst("running")),
            ],
            NodeKind.FORCE_SUCCESS: [
                (seq_(child, "invalid"), _INVALID),
                (seq_(child, "running"), SConst("running")),
                (TRUE, SConst("success")),
            ],
            NodeKind.FORCE_FAILURE: [
                (seq_(child, "invalid"), _INVALID),
                (seq_(child, "running"), SConst("running")),
                (TRUE, SConst("failure")),
            ],
        }[kind]
        return scase(mapping)
    if kind == NodeKind.PARALLEL:
        all_invalid = None
        for c in children:
            term = seq_(c, "invalid")
            all_invalid = term if all_invalid is None else sand(all_invalid, term)
        count_s = _count_signal(children, "success")
        count_f = _count_signal(children, "failure")
        n = len(children)
        return scase(
            [
                (all_invalid, _INVALID),
                (SOp(">=", (count_s, SConst(node.threshold))), SConst("success")),
                (SOp(">", (count_f, SConst(n - node.threshold))), SConst("failure")),
                (TRUE, SConst("running")),
            ]
        )
    # Sequence/fallback family: the stopping child is the unique one whose
    # stored status breaks the chain; all-invalid means not executed.
    stop = ("failure", "running") if kind in (NodeKind.SEQUENCE, NodeKind.SEQUENCE_M) else (
        "success",
        "running",
    )
    settled = "success" if stop[0] == "failure" else "failure"
    branches = []
    for c in children:
        branches.append((sor(seq_(c, stop[0]), seq_(c, stop[1])), c))
    any_settled = None
    for c in children:
        term = seq_(c, settled)
        any_settled = term if any_settled is None else sor(any_settled, term)
    branches.append((any_settled, SConst(settled)))
    branches.append((TRUE, _INVALID))
    return scase(branches)


def _count_signal(children: list, which: str) -> SmvExpr:
    total = None
    for c in children:
        one = scase([(seq_(c, which), SConst(1)), (TRUE, SConst(0))])
        total = one if total is None else SOp("+", (total, one))
    return total


def _reeval_leaf_define(model: SbtModel, node: NodeDef) -> SmvExpr:
    """Observed-state re-evaluation of a leaf; never invalid."""
    sym = {v.name: SVar(v.name) for v in model.bb_vars}
    if node.kind == NodeKind.CHECK:
        return scase(
            [(_tx(node.expr, sym, False), SConst("success")), (TRUE, SConst("failure"))]
        )
    return scase(
        [(_tx(g.condition, sym, False), SConst(g.status.value)) for g in node.guards]
        + [(TRUE, SConst("failure"))]
    )


# ---------------------------------------------------------------------------
# emit / emit_spec


def _var_statuses(model: SbtModel, level: OptLevel) -> list[int]:
    """Node ids whose status stays a state variable at this level."""
    keep = []
    for node in model.nodes:
        if level == OptLevel.NO_OPT:
            keep.append(node.id)
        elif level == OptLevel.FIRST_OPT and node.kind in (NodeKind.CHECK, NodeKind.ACTION):
            keep.append(node.id)
        elif level == OptLevel.LAST_OPT and node.kind == NodeKind.ACTION:
            keep.append(node.id)
    return keep


def emit(model: SbtModel, level: OptLevel) -> SmvDocument:
    """Build the SMV document for one optimization level; byte-deterministic."""
    tick = _SymbolicTick(model)
    status_type = SEnumType(_STATUS_VALUES)

    variables: list = []
    init_assigns: list = []
    next_assigns: list = []
    defines: list = []

    for v in model.env_vars:
        variables.append((v.name, _smv_type(v.domain)))
        if v.frozen and v.initial is not None:
            init_assigns.append((v.name, SConst(v.initial)))
        else:
            init_assigns.append((v.name, SSet(v.domain.values())))
        if v.frozen:
            next_assigns.append((v.name, SVar(v.name)))
        else:
            next_assigns.append((v.name, SSet(v.domain.values())))
    for v in model.bb_vars:
        variables.append((v.name, _smv_type(v.domain)))
        init_assigns.append((v.name, SConst(v.initial)))
        next_assigns.append((v.name, tick.sym[v.name]))
    for nid in model.memory_ids:
        name = _mem_name(model.nodes[nid])
        variables.append((name, SRangeType(0, len(model.nodes[nid].children) - 1)))
        init_assigns.append((name, SConst(0)))
        next_assigns.append((name, tick.mem_of(nid)))

    kept = set(_var_statuses(model, level))
    for node in model.nodes:
        name = _status_name(node)
        if node.id in kept:
            variables.append((name, status_type))
            init_assigns.append((name, SConst("invalid")))
            next_assigns.append((name, tick.status_of(node.id)))

    def signal(nid: int) -> SmvExpr:
        return SVar(_status_name(model.nodes[nid]))

    for node in model.nodes:
        if node.id in kept:
            continue
        if node.kind in (NodeKind.CHECK, NodeKind.ACTION):
            body = _reeval_leaf_define(model, node)
        else:
            body = _exact_internal_define(model, node, signal)
        defines.append((_status_name(node), body))

    ltlspecs = []
    for spec in model.specs:
        ltlspecs.append((spec.name, emit_spec(spec.formula, model), spec.formula))

    return SmvDocument("main", variables, defines, init_assigns, next_assigns, ltlspecs, level)


def _smv_type(domain):
    if isinstance(domain, IntRange):
        return SRangeType(domain.lo, domain.hi)
    if isinstance(domain, BoolDomain):
        return SBoolType()
    return SEnumType(domain.labels)


def _desugar_m(f: ltl.LtlFormula) -> ltl.LtlFormula:
    if isinstance(f, ltl.StrongRelease):
        left, right = _desugar_m(f.left), _desugar_m(f.right)
        return ltl.Until(right, ltl.And(left, right))
    if isinstance(f, (ltl.Not, ltl.Next, ltl.Globally, ltl.Finally)):
        return type(f)(_desugar_m(f.operand))
    if isinstance(f, (ltl.And, ltl.Or, ltl.Implies, ltl.Until, ltl.Release)):
        return type(f)(_desugar_m(f.left), _desugar_m(f.right))
    return f


def emit_spec(f: ltl.LtlFormula, model: SbtModel) -> str:
    """One LTLSPEC line; the M operator is emitted in desugared form."""
    return "LTLSPEC " + _render_formula(_desugar_m(f), model)


def _render_formula(f: ltl.LtlFormula, model: SbtModel) -> str:
    def atom_text(label) -> tuple[str, bool]:
        if isinstance(label, StatusAtom):
            name = _status_name(model.nodes[label.node_id])
            return f"{name} = {label.status.value}", False
        sym = {v.name: SVar(v.name) for v in model.bb_vars}
        expr = _tx(label.expr, sym, False)
        return render_expr(expr), isinstance(expr, (SVar, SConst))

    def walk(g) -> tuple[str, bool]:
        # (text, atomic enough to appear bare as an operand)
        if isinstance(g, ltl.Atom):
            return atom_text(g.label)
        if isinstance(g, ltl.TrueF):
            return "TRUE", True
        if isinstance(g, ltl.FalseF):
            return "FALSE", True
        if isinstance(g, ltl.Not):
            text, atomic = walk(g.operand)
            return ("!" + (text if atomic else f"({text})")), False
        if isinstance(g, (ltl.Next, ltl.Globally, ltl.Finally)):
            op = {ltl.Next: "X", ltl.Globally: "G", ltl.Finally: "F"}[type(g)]
            text, _ = walk(g.operand)
            return f"{op} ({text})", False
        ops = {ltl.And: "&", ltl.Or: "|", ltl.Implies: "->", ltl.Until: "U", ltl.Release: "V"}
        op = ops[type(g)]
        lt, la = walk(g.left)
        rt, ra = walk(g.right)
        lt = lt if la else f"({lt})"
        rt = rt if ra else f"({rt})"
        return f"{lt} {op} {rt}", False

    text, _ = walk(f)
    return text


# ---------------------------------------------------------------------------
# In-process interpreter for the emitted subset


class SmvSystem:
    """Reachable states of an emitted document, shaped like a
    TransitionSystem so the LTL checker can run on it directly."""

    def __init__(self, doc: SmvDocument, model: SbtModel, max_states: int = 1_000_000):
        self.doc = doc
        self.model = model
        self.var_names = [name for name, _ in doc.variables]
        self.var_types = dict(doc.variables)
        self.defines = dict(doc.defines)
        self.init_map = dict(doc.init_assigns)
        self.next_map = dict(doc.next_assigns)
        self.env_names = [v.name for v in model.env_vars]
        self._explore(max_states)

    # -- evaluation --------------------------------------------------------

    def _eval(self, e: SmvExpr, state: dict, next_env: dict | None):
        if isinstance(e, SVar):
            if e.name in state:
                return state[e.name]
            return self._eval(self.defines[e.name], state, next_env)
        if isinstance(e, SNextVar):
            return next_env[e.name]
        if isinstance(e, SConst):
            return e.value
        if isinstance(e, SOp):
            args = [self._eval(a, state, next_env) for a in e.args]
            match e.op:
                case "=":
                    return args[0] == args[1]
                case "!=":
                    return args[0] != args[1]
                case "<":
                    return args[0] < args[1]
                case "<=":
                    return args[0] <= args[1]
                case ">":
                    return args[0] > args[1]
                case ">=":
                    return args[0] >= args[1]
                case "+":
                    return args[0] + args[1]
                case "-":
                    return -args[0] if len(args) == 1 else args[0] - args[1]
                case "&":
                    return args[0] and args[1]
                case "|":
                    return args[0] or args[1]
                case "!":
                    return not args[0]
            raise ValueError(f"unknown operator {e.op!r}")
        if isinstance(e, SCase):
            for cond, value in e.branches:
                if self._eval(cond, state, next_env):
                    return self._eval(value, state, next_env)
            raise ValueError("case fell through")
        raise TypeError(f"cannot evaluate {e!r}")

    def _state_dict(self, vec: tuple) -> dict:
        return dict(zip(self.var_names, vec))

    # -- exploration --------------------------------------------------------

    def _explore(self, max_states: int) -> None:
        import itertools
        from collections import deque

        init_axes = []
        for name in self.var_names:
            rhs = self.init_map[name]
            init_axes.append(rhs.values if isinstance(rhs, SSet) else (rhs.value,))
        ids: dict[tuple, int] = {}
        states: list[tuple] = []
        edges: list[list[int]] = []
        queue: deque[int] = deque()

        def discover(vec: tuple) -> int:
            if vec in ids:
                return ids[vec]
            if len(states) >= max_states:
                raise MemoryError("SMV interpreter state limit")
            ids[vec] = len(states)
            states.append(vec)
            edges.append([])
            queue.append(ids[vec])
            return ids[vec]

        for combo in itertools.product(*init_axes):
            discover(tuple(combo))
        self.initials = list(range(len(states)))

        nondet_env = [
            name for name in self.env_names if isinstance(self.next_map[name], SSet)
        ]
        while queue:
            sid = queue.popleft()
            state = self._state_dict(states[sid])
            axes = [self.next_map[name].values for name in nondet_env]
            succ = set()
            for combo in itertools.product(*axes):
                next_env = dict(zip(nondet_env, combo))
                for name in self.env_names:
                    if name not in next_env:
                        next_env[name] = self._eval(self.next_map[name], state, None)
                vec = []
                for name in self.var_names:
                    if name in next_env:
                        vec.append(next_env[name])
                    else:
                        vec.append(self._eval(self.next_map[name], state, next_env))
                succ.add(tuple(vec))
            edges[sid] = sorted(discover(v) for v in sorted(succ))
        self.states = states
        self.edges = edges

    # -- TransitionSystem interface -----------------------------------------

    @property
    def num_states(self) -> int:
        return len(self.states)

    def ap_eval(self, sid: int, label) -> bool:
        state = self._state_dict(self.states[sid])
        if isinstance(label, StatusAtom):
            name = _status_name(self.model.nodes[label.node_id])
            if name in state:
                value = state[name]
            else:
                value = self._eval(self.defines[name], state, None)
            return value == label.status.value
        if isinstance(label, ExprAtom):
            sym = {v.name: SVar(v.name) for v in self.model.bb_vars}
            return bool(self._eval(_tx(label.expr, sym, False), state, None))
        raise TypeError(f"unknown atom label: {label!r}")

    def project(self, sid: int, with_root_status: bool) -> tuple:
        state = self._state_dict(self.states[sid])
        values = [state[v.name] for v in self.model.bb_vars]
        values += [state[v.name] for v in self.model.env_vars]
        values += [state[_mem_name(self.model.nodes[nid])] for nid in self.model.memory_ids]
        if with_root_status:
            root = _status_name(self.model.nodes[0])
            if root in state:
                values.append(state[root])
            else:
                values.append(self._eval(self.defines[root], state, None))
        return tuple(values)


# ---------------------------------------------------------------------------
# Cross-checking an encoding against the native enumeration


@dataclass
class CrossCheckReport:
    level: OptLevel
    native_states: int
    smv_states: int
    projected_states: int
    verdicts: list  # (spec name, native holds, smv holds)


class DivergenceFound(Exception):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


def _native_projection(model: SbtModel, ts: TransitionSystem, with_root_status: bool) -> set:
    out = set()
    for st in ts.states:
        config = decode_state(model, st)
        values = [config.vars.blackboard[v.name] for v in model.bb_vars]
        values += [config.vars.env[v.name] for v in model.env_vars]
        values += [config.memory[nid] for nid in model.memory_ids]
        if with_root_status:
            values.append(config.statuses[0].value)
        out.add(tuple(values))
    return out


def compare_document(
    model: SbtModel, doc: SmvDocument, limits: Limits = Limits()
) -> CrossCheckReport:
    """Enumerate the document with the in-process interpreter and compare
    its projection (and spec verdicts) against the native pipeline."""
    native = enumerate_system(model, limits)
    system = SmvSystem(doc, model, max_states=limits.max_states)
    with_root = doc.level in (OptLevel.NO_OPT, OptLevel.FIRST_OPT)

    native_proj = _native_projection(model, native, with_root)
    smv_proj = {system.project(sid, with_root) for sid in range(system.num_states)}
    if native_proj != smv_proj:
        missing = sorted(native_proj - smv_proj)
        extra = sorted(smv_proj - native_proj)
        witness = missing[0] if missing else extra[0]
        side = "missing from SMV" if missing else "not reachable natively"
        raise DivergenceFound(f"projected state {witness!r} {side}", witness)

    verdicts = []
    for spec in model.specs:
        native_v = ltl.model_check(native, spec.formula)
        smv_v = ltl.model_check(system, spec.formula)
        verdicts.append((spec.name, native_v.holds, smv_v.holds))
        if native_v.holds != smv_v.holds:
            raise DivergenceFound(
                f"spec {spec.name}: native {'holds' if native_v.holds else 'violated'}, "
                f"SMV {'holds' if smv_v.holds else 'violated'}",
                spec.name,
            )
    return CrossCheckReport(
        doc.level, native.num_states, system.num_states, len(native_proj), verdicts
    )


def cross_check(model: SbtModel, level: OptLevel, limits: Limits = Limits()) -> CrossCheckReport:
    return compare_document(model, emit(model, level), limits)
