"""Name resolution, type checking, and model construction.

Typing is strict: int, bool, and enum values never coerce. Assignment
targets must be blackboard variables; environment variables are read-only
from the tree and may carry an initial value only when frozen. Temporal
operators and status tests are only legal inside spec declarations. A
wrapper node named __root is inserted above the declared root; names
starting with a double underscore are reserved for it and for the
auto-generated names of anonymous nodes.
"""

from dataclasses import dataclass

from . import ast, ltl
from .diagnostics import ERROR, WARNING, Diagnostic, has_errors
from .lexer import LexError, tokenize
from .model import (
    BLACKBOARD,
    BinaryOp,
    BoolDomain,
    BoolVal,
    CoreExpr,
    Domain,
    ENV,
    EnumDomain,
    EnumVal,
    ExprAtom,
    GuardedCommand,
    IntRange,
    IntVal,
    NodeDef,
    NodeKind,
    ReadVar,
    ROOT_NAME,
    SbtModel,
    SpecDef,
    Status,
    StatusAtom,
    UnaryOp,
    VarDef,
)
from .printer import expr_to_text

_INT = "int"
_BOOL = "bool"
# enum types are represented by their label tuple

_NODE_KIND = {
    "sequence": NodeKind.SEQUENCE,
    "sequence_m": NodeKind.SEQUENCE_M,
    "fallback": NodeKind.FALLBACK,
    "fallback_m": NodeKind.FALLBACK_M,
    "parallel": NodeKind.PARALLEL,
    "inverter": NodeKind.INVERTER,
    "force_success": NodeKind.FORCE_SUCCESS,
    "force_failure": NodeKind.FORCE_FAILURE,
}


def _domain_type(domain: Domain):
    if isinstance(domain, IntRange):
        return _INT
    if isinstance(domain, BoolDomain):
        return _BOOL
    return domain.labels


def _type_name(t) -> str:
    if t == _INT or t == _BOOL:
        return t
    return "enum {" + ", ".join(t) + "}"


@dataclass
class _Ctx:
    diags: list
    vars: dict  # name -> VarDef
    in_spec: bool = False
    node_names: dict | None = None  # name -> node id, for status tests

    def error(self, message: str, pos: ast.Pos) -> None:
        self.diags.append(Diagnostic(ERROR, message, pos.line, pos.column))

    def warn(self, message: str, pos: ast.Pos) -> None:
        self.diags.append(Diagnostic(WARNING, message, pos.line, pos.column))


def validate(tree: ast.Ast) -> tuple[SbtModel | None, list[Diagnostic]]:
    """Check an AST and build the model; returns (model, diagnostics) with
    model None whenever any error was reported."""
    diags: list[Diagnostic] = []
    vars_by_name: dict[str, VarDef] = {}

    for decls, scope in ((tree.env_decls, ENV), (tree.bb_decls, BLACKBOARD)):
        for decl in decls:
            vd = _check_decl(decl, scope, vars_by_name, diags)
            if vd is not None:
                vars_by_name[vd.name] = vd

    ctx = _Ctx(diags, vars_by_name)

    # First pass over the tree: assign ids (preorder, wrapper gets 0) and
    # check name uniqueness so status tests can resolve in spec formulas.
    flat: list[tuple[int, ast.NodeAst, str]] = []  # (id, ast node, name)
    names: dict[str, int] = {ROOT_NAME: 0}

    def assign_ids(node: ast.NodeAst) -> None:
        node_id = len(flat) + 1  # 0 is the wrapper
        name = getattr(node, "name", None)
        if name is None:
            name = f"__n{node_id}"
        else:
            if name.startswith("__"):
                ctx.error(f"name {name!r} is reserved (double underscore prefix)", node.pos)
            if name in names:
                ctx.error(f"duplicate node name {name!r}", node.pos)
            elif name in vars_by_name:
                ctx.error(f"node name {name!r} collides with a variable", node.pos)
        names[name] = node_id
        flat.append((node_id, node, name))
        if isinstance(node, ast.CompositeAst):
            for child in node.children:
                assign_ids(child)
        elif isinstance(node, ast.DecoratorAst):
            assign_ids(node.child)

    assign_ids(tree.root)
    ctx.node_names = names

    # Second pass: per-node checks and NodeDef construction.
    nodes: dict[int, NodeDef] = {}

    def build(node: ast.NodeAst) -> int:
        node_id, _, name = flat[_index_of(node)]
        if isinstance(node, ast.CompositeAst):
            children = tuple(build(c) for c in node.children)
            kind = _NODE_KIND[node.kind]
            threshold = node.threshold
            if kind == NodeKind.PARALLEL:
                if not (1 <= threshold <= len(children)):
                    ctx.error(
                        f"parallel threshold {threshold} outside 1..{len(children)}", node.pos
                    )
                    threshold = max(1, min(threshold, len(children)))
            nodes[node_id] = NodeDef(node_id, kind, name, children, threshold=threshold)
        elif isinstance(node, ast.DecoratorAst):
            child = build(node.child)
            nodes[node_id] = NodeDef(node_id, _NODE_KIND[node.kind], name, (child,))
        elif isinstance(node, ast.CheckAst):
            expr = _check_expr(node.expr, ctx, expected=_BOOL, where="check condition")
            nodes[node_id] = NodeDef(node_id, NodeKind.CHECK, name, (), expr=expr)
        elif isinstance(node, ast.ActionAst):
            guards = tuple(_check_guard(g, ctx) for g in node.guards)
            nodes[node_id] = NodeDef(node_id, NodeKind.ACTION, name, (), guards=guards)
        else:
            raise TypeError(f"unknown node: {node!r}")
        return node_id

    index_cache = {id(entry[1]): i for i, entry in enumerate(flat)}

    def _index_of(node: ast.NodeAst) -> int:
        return index_cache[id(node)]

    root_child = build(tree.root)
    nodes[0] = NodeDef(0, NodeKind.ROOT, ROOT_NAME, (root_child,))

    # Specs last, with node names available for status tests.
    specs: list[SpecDef] = []
    spec_names: set[str] = set()
    for sp in tree.specs:
        if sp.name in spec_names:
            ctx.error(f"duplicate spec name {sp.name!r}", sp.pos)
        spec_names.add(sp.name)
        ctx.in_spec = True
        formula = _spec_formula(sp.formula, ctx)
        ctx.in_spec = False
        if formula is not None:
            specs.append(SpecDef(sp.name, formula))

    if has_errors(diags):
        return None, diags

    node_list = [nodes[i] for i in range(len(nodes))]
    model = SbtModel(
        tree.tree_name,
        node_list,
        [vars_by_name[d.name] for d in tree.env_decls if d.name in vars_by_name],
        [vars_by_name[d.name] for d in tree.bb_decls if d.name in vars_by_name],
        specs,
    )
    return model, diags


def compile_source(source: str) -> tuple[SbtModel | None, list[Diagnostic]]:
    """Tokenize, parse, and validate in one step."""
    from .parser import parse

    try:
        tokens = tokenize(source)
    except LexError as exc:
        return None, [Diagnostic(ERROR, exc.message, exc.line, exc.column)]
    tree, diags = parse(tokens)
    if tree is None:
        return None, diags
    model, vdiags = validate(tree)
    return model, diags + vdiags


# ---------------------------------------------------------------------------
# Declarations


def _check_decl(decl: ast.VarDeclAst, scope: str, known: dict, diags: list) -> VarDef | None:
    def error(msg: str) -> None:
        diags.append(Diagnostic(ERROR, msg, decl.pos.line, decl.pos.column))

    ok = True
    if decl.name.startswith("__"):
        error(f"name {decl.name!r} is reserved (double underscore prefix)")
        ok = False
    if decl.name in known:
        error(f"duplicate variable {decl.name!r} (env and blackboard share one namespace)")
        ok = False

    domain: Domain | None = None
    if isinstance(decl.domain, ast.IntDomainAst):
        if decl.domain.lo > decl.domain.hi:
            error(f"empty integer range [{decl.domain.lo}..{decl.domain.hi}]")
            ok = False
        domain = IntRange(decl.domain.lo, decl.domain.hi)
    elif isinstance(decl.domain, ast.BoolDomainAst):
        domain = BoolDomain()
    elif isinstance(decl.domain, ast.EnumDomainAst):
        labels = decl.domain.labels
        if len(set(labels)) != len(labels):
            error("enum labels must be distinct")
            ok = False
        for label in labels:
            if label in ("TRUE", "FALSE") or label.startswith("__"):
                error(f"enum label {label!r} is reserved")
                ok = False
            if label in known:
                error(f"enum label {label!r} collides with a variable")
                ok = False
        domain = EnumDomain(labels)

    frozen = decl.frozen
    if frozen and scope == BLACKBOARD:
        error("only environment variables can be frozen")
        ok = False

    initial = None
    if decl.initial is not None:
        if scope == ENV and not frozen:
            error(f"environment variable {decl.name!r} cannot have an initial value unless frozen")
            ok = False
        initial = _literal_value(decl.initial, domain, error)
        if initial is None:
            ok = False
    elif scope == BLACKBOARD:
        error(f"blackboard variable {decl.name!r} requires an initial value")
        ok = False

    if not ok or domain is None:
        return None
    return VarDef(decl.name, scope, domain, initial, frozen)


def _literal_value(expr: ast.Expr, domain: Domain | None, error):
    value = None
    if isinstance(expr, ast.IntLit):
        value = expr.value
    elif isinstance(expr, ast.Unary) and expr.op == "-" and isinstance(expr.operand, ast.IntLit):
        value = -expr.operand.value
    elif isinstance(expr, ast.BoolLit):
        value = expr.value
    elif isinstance(expr, ast.Name):
        value = expr.ident
    else:
        error("initial value must be a literal")
        return None
    if domain is not None and not domain.contains(value):
        error(f"initial value {value!r} outside the declared domain")
        return None
    return value


# ---------------------------------------------------------------------------
# Expressions


def _check_expr(expr: ast.Expr, ctx: _Ctx, expected=None, where: str = "expression"):
    """Type-check and resolve an expression; returns a CoreExpr or None.

    expected is a type (int/bool/label-tuple) used to resolve enum literals
    bidirectionally; when given, a mismatch is an error.
    """
    core, actual = _infer(expr, ctx, expected)
    if core is None:
        return None
    if expected is not None and actual != expected:
        ctx.error(f"{where} has type {_type_name(actual)}, expected {_type_name(expected)}", _pos(expr))
        return None
    return core


def _pos(expr: ast.Expr) -> ast.Pos:
    return getattr(expr, "pos", ast.Pos(0, 0))


def _infer(expr: ast.Expr, ctx: _Ctx, expected=None):
    """Returns (core expression, type) or (None, None) after reporting."""
    if isinstance(expr, ast.IntLit):
        return IntVal(expr.value), _INT
    if isinstance(expr, ast.BoolLit):
        return BoolVal(expr.value), _BOOL
    if isinstance(expr, ast.Name):
        vd = ctx.vars.get(expr.ident)
        if vd is not None:
            return ReadVar(vd.name, vd.scope), _domain_type(vd.domain)
        if isinstance(expected, tuple) and expr.ident in expected:
            return EnumVal(expr.ident), expected
        hosts = {
            _domain_type(v.domain)
            for v in ctx.vars.values()
            if isinstance(v.domain, EnumDomain) and expr.ident in v.domain.labels
        }
        if expected is None and len(hosts) == 1:
            return EnumVal(expr.ident), next(iter(hosts))
        if not hosts:
            ctx.error(f"unknown name {expr.ident!r}", _pos(expr))
        elif expected is None:
            ctx.error(
                f"enum label {expr.ident!r} is ambiguous here; compare it with a variable",
                _pos(expr),
            )
        else:
            ctx.error(
                f"enum label {expr.ident!r} is not a value of {_type_name(expected)}", _pos(expr)
            )
        return None, None
    if isinstance(expr, ast.Unary):
        if expr.op == "!":
            operand = _check_expr(expr.operand, ctx, _BOOL, "operand of !")
            return (None, None) if operand is None else (UnaryOp("!", operand), _BOOL)
        operand = _check_expr(expr.operand, ctx, _INT, "operand of unary -")
        return (None, None) if operand is None else (UnaryOp("-", operand), _INT)
    if isinstance(expr, ast.Binary):
        return _infer_binary(expr, ctx)
    if isinstance(expr, (ast.StatusTest, ast.TemporalUnary, ast.TemporalBinary)):
        ctx.error("temporal operators and status tests are only allowed in specs", _pos(expr))
        return None, None
    raise TypeError(f"unknown expression node: {expr!r}")


def _infer_binary(expr: ast.Binary, ctx: _Ctx):
    op = expr.op
    if op in ("&&", "||"):
        left = _check_expr(expr.left, ctx, _BOOL, f"operand of {op}")
        right = _check_expr(expr.right, ctx, _BOOL, f"operand of {op}")
        if left is None or right is None:
            return None, None
        return BinaryOp(op, left, right), _BOOL
    if op in ("+", "-", "<", "<=", ">", ">="):
        left = _check_expr(expr.left, ctx, _INT, f"operand of {op}")
        right = _check_expr(expr.right, ctx, _INT, f"operand of {op}")
        if left is None or right is None:
            return None, None
        return BinaryOp(op, left, right), _INT if op in ("+", "-") else _BOOL
    if op in ("==", "!="):
        # A bare non-variable name on the left is an enum literal whose type
        # comes from the right side; otherwise type flows left to right.
        if isinstance(expr.left, ast.Name) and expr.left.ident not in ctx.vars:
            right, rtype = _infer(expr.right, ctx)
            if right is None:
                return None, None
            left = _check_expr(expr.left, ctx, rtype, f"left operand of {op}")
            if left is None:
                return None, None
        else:
            left, ltype = _infer(expr.left, ctx)
            if left is None:
                return None, None
            right = _check_expr(expr.right, ctx, ltype, f"right operand of {op}")
            if right is None:
                return None, None
        return BinaryOp(op, left, right), _BOOL
    if op == "->":
        ctx.error("implication is only allowed in specs", _pos(expr))
        return None, None
    raise ValueError(f"unknown operator {op!r}")


def _check_guard(g: ast.GuardedAst, ctx: _Ctx) -> GuardedCommand:
    cond = _check_expr(g.guard, ctx, _BOOL, "guard condition") or BoolVal(False)
    assigns = []
    for a in g.assigns:
        vd = ctx.vars.get(a.target)
        if vd is None:
            ctx.error(f"unknown variable {a.target!r}", a.pos)
            continue
        if vd.scope == ENV:
            ctx.error(f"environment variable {a.target!r} is read-only from the tree", a.pos)
            continue
        target_type = _domain_type(vd.domain)
        rhs = _check_expr(a.value, ctx, target_type, f"value assigned to {a.target}")
        if rhs is None:
            continue
        if isinstance(vd.domain, IntRange):
            lo, hi = _int_bounds(rhs, ctx)
            if lo < vd.domain.lo or hi > vd.domain.hi:
                ctx.warn(
                    f"assignment to {a.target} may clamp to [{vd.domain.lo}..{vd.domain.hi}]",
                    a.pos,
                )
        assigns.append((a.target, rhs))
    return GuardedCommand(cond, tuple(assigns), Status(g.status))


def _int_bounds(expr: CoreExpr, ctx: _Ctx) -> tuple[int, int]:
    """Interval estimate for a resolved integer expression."""
    if isinstance(expr, IntVal):
        return expr.value, expr.value
    if isinstance(expr, ReadVar):
        domain = ctx.vars[expr.name].domain
        return domain.lo, domain.hi
    if isinstance(expr, UnaryOp) and expr.op == "-":
        lo, hi = _int_bounds(expr.operand, ctx)
        return -hi, -lo
    if isinstance(expr, BinaryOp) and expr.op in ("+", "-"):
        llo, lhi = _int_bounds(expr.left, ctx)
        rlo, rhi = _int_bounds(expr.right, ctx)
        if expr.op == "+":
            return llo + rlo, lhi + rhi
        return llo - rhi, lhi - rlo
    raise TypeError(f"not an integer expression: {expr!r}")


# ---------------------------------------------------------------------------
# Spec formulas -> LTL


def _spec_formula(expr: ast.Expr, ctx: _Ctx) -> ltl.LtlFormula | None:
    """Translate a spec body. Boolean structure above temporal operators or
    status tests becomes LTL connectives; every maximal temporal-free and
    status-free subexpression becomes a single atom."""
    if _is_state_expr(expr):
        core = _check_expr(expr, ctx, _BOOL, "spec atom")
        if core is None:
            return None
        return ltl.Atom(ExprAtom(core, expr_to_text(expr)))
    if isinstance(expr, ast.StatusTest):
        node_id = (ctx.node_names or {}).get(expr.node)
        if node_id is None or (expr.node.startswith("__") and expr.node != ROOT_NAME):
            ctx.error(f"unknown node name {expr.node!r} in status test", _pos(expr))
            return None
        return ltl.Atom(StatusAtom(node_id, expr.node, Status(expr.status)))
    if isinstance(expr, ast.Unary) and expr.op == "!":
        sub = _spec_formula(expr.operand, ctx)
        return None if sub is None else ltl.Not(sub)
    if isinstance(expr, ast.TemporalUnary):
        sub = _spec_formula(expr.operand, ctx)
        if sub is None:
            return None
        return {"G": ltl.Globally, "F": ltl.Finally, "X": ltl.Next}[expr.op](sub)
    if isinstance(expr, ast.TemporalBinary):
        left = _spec_formula(expr.left, ctx)
        right = _spec_formula(expr.right, ctx)
        if left is None or right is None:
            return None
        return (ltl.Until if expr.op == "U" else ltl.StrongRelease)(left, right)
    if isinstance(expr, ast.Binary) and expr.op in ("&&", "||", "->"):
        left = _spec_formula(expr.left, ctx)
        right = _spec_formula(expr.right, ctx)
        if left is None or right is None:
            return None
        cls = {"&&": ltl.And, "||": ltl.Or, "->": ltl.Implies}[expr.op]
        return cls(left, right)
    ctx.error("spec formula must be boolean", _pos(expr))
    return None


def _is_state_expr(expr: ast.Expr) -> bool:
    """True when the subtree contains no temporal operator or status test."""
    if isinstance(expr, (ast.TemporalUnary, ast.TemporalBinary, ast.StatusTest)):
        return False
    if isinstance(expr, ast.Unary):
        return _is_state_expr(expr.operand)
    if isinstance(expr, ast.Binary):
        return _is_state_expr(expr.left) and _is_state_expr(expr.right)
    return True
