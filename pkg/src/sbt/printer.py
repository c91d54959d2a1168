"""Canonical pretty-printer: 4-space indent, one child per line.

parse(tokenize(pretty_print(ast))) is structurally equal to ast, and
pretty_print is idempotent across a parse round trip.
"""

from .ast import (
    ActionAst,
    Ast,
    Binary,
    BoolDomainAst,
    BoolLit,
    CheckAst,
    CompositeAst,
    DecoratorAst,
    DomainAst,
    EnumDomainAst,
    Expr,
    IntDomainAst,
    IntLit,
    Name,
    NodeAst,
    StatusTest,
    TemporalBinary,
    TemporalUnary,
    Unary,
    VarDeclAst,
)

_INDENT = "    "

# Binding strength; mirrors the parser's precedence ladder.
_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNTIL = 4
_PREC_UNARY = 5
_PREC_CMP = 6
_PREC_ADD = 7
_PREC_NEG = 8
_PREC_ATOM = 9

_BIN_PREC = {
    "->": _PREC_IMPLIES,
    "||": _PREC_OR,
    "&&": _PREC_AND,
    "==": _PREC_CMP,
    "!=": _PREC_CMP,
    "<": _PREC_CMP,
    "<=": _PREC_CMP,
    ">": _PREC_CMP,
    ">=": _PREC_CMP,
    "+": _PREC_ADD,
    "-": _PREC_ADD,
}
_RIGHT_ASSOC = {"->"}


def expr_to_text(e: Expr, min_prec: int = 0) -> str:
    text, prec = _render(e)
    if prec < min_prec:
        return f"({text})"
    return text


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, IntLit):
        return str(e.value), _PREC_ATOM
    if isinstance(e, BoolLit):
        return ("true" if e.value else "false"), _PREC_ATOM
    if isinstance(e, Name):
        return e.ident, _PREC_ATOM
    if isinstance(e, StatusTest):
        return f"status({e.node}) == {e.status}", _PREC_CMP
    if isinstance(e, Unary):
        prec = _PREC_NEG if e.op == "-" else _PREC_UNARY
        return e.op + expr_to_text(e.operand, prec), prec
    if isinstance(e, TemporalUnary):
        # Parenthesize any non-atomic operand: `F (status(n) == success)`.
        return f"{e.op} {expr_to_text(e.operand, _PREC_ATOM)}", _PREC_UNARY
    if isinstance(e, TemporalBinary):
        left = expr_to_text(e.left, _PREC_UNTIL + 1)
        right = expr_to_text(e.right, _PREC_UNTIL)
        return f"{left} {e.op} {right}", _PREC_UNTIL
    if isinstance(e, Binary):
        prec = _BIN_PREC[e.op]
        if e.op in _RIGHT_ASSOC:
            lmin, rmin = prec + 1, prec
        elif prec == _PREC_CMP:
            lmin = rmin = prec + 1
        else:
            lmin, rmin = prec, prec + 1
        return f"{expr_to_text(e.left, lmin)} {e.op} {expr_to_text(e.right, rmin)}", prec
    raise TypeError(f"unknown expression node: {e!r}")


def _domain_text(d: DomainAst) -> str:
    if isinstance(d, IntDomainAst):
        return f"int[{d.lo}..{d.hi}]"
    if isinstance(d, BoolDomainAst):
        return "bool"
    if isinstance(d, EnumDomainAst):
        return "enum {" + ", ".join(d.labels) + "}"
    raise TypeError(f"unknown domain node: {d!r}")


def _decl_line(decl: VarDeclAst) -> str:
    parts = [f"{decl.name}: {_domain_text(decl.domain)}"]
    if decl.initial is not None:
        parts.append(f"= {expr_to_text(decl.initial)}")
    if decl.frozen:
        parts.append("frozen")
    return " ".join(parts) + ";"


def _node_lines(node: NodeAst, depth: int) -> list[str]:
    pad = _INDENT * depth
    if isinstance(node, CompositeAst):
        head = node.kind
        if node.kind == "parallel":
            head += f" ({node.threshold})"
        if node.name:
            head += f" {node.name}"
        lines = [f"{pad}{head} {{"]
        for child in node.children:
            lines.extend(_node_lines(child, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(node, DecoratorAst):
        head = node.kind + (f" {node.name}" if node.name else "")
        lines = [f"{pad}{head} {{"]
        lines.extend(_node_lines(node.child, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(node, CheckAst):
        return [f"{pad}check {node.name} {{ {expr_to_text(node.expr)} }}"]
    if isinstance(node, ActionAst):
        lines = [f"{pad}action {node.name} {{"]
        inner = _INDENT * (depth + 1)
        for g in node.guards:
            pieces = [f"on {expr_to_text(g.guard)} ->"]
            for a in g.assigns:
                pieces.append(f"{a.target} := {expr_to_text(a.value)};")
            pieces.append(f"return {g.status};")
            lines.append(inner + " ".join(pieces))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"unknown node: {node!r}")


def pretty_print(ast: Ast) -> str:
    lines = [f"tree {ast.tree_name} {{"]
    if ast.env_decls:
        lines.append(f"{_INDENT}env {{")
        for decl in ast.env_decls:
            lines.append(f"{_INDENT * 2}{_decl_line(decl)}")
        lines.append(f"{_INDENT}}}")
    if ast.bb_decls:
        lines.append(f"{_INDENT}blackboard {{")
        for decl in ast.bb_decls:
            lines.append(f"{_INDENT * 2}{_decl_line(decl)}")
        lines.append(f"{_INDENT}}}")
    root_lines = _node_lines(ast.root, 1)
    root_lines[0] = f"{_INDENT}root: {root_lines[0].lstrip()}"
    lines.extend(root_lines)
    for spec in ast.specs:
        lines.append(f"{_INDENT}spec {spec.name}: {expr_to_text(spec.formula)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
