"""Abstract syntax for the DSL, as produced by the parser.

Equality on AST nodes is structural and ignores source positions, so a
pretty-printed and re-parsed tree compares equal to the original.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pos:
    line: int
    column: int


_NOPOS = Pos(0, 0)


def _pos_field():
    return field(default=_NOPOS, compare=False)


# ---------------------------------------------------------------------------
# Expressions and spec formulas share one node family; validation decides
# which operators are legal in which context (temporal operators and status
# tests only inside spec declarations).


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Name(Expr):
    """Identifier reference: a variable or an enum label (resolved later)."""

    ident: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "!" or "-"
    operand: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # == != < <= > >= + - && || ->
    left: Expr
    right: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class StatusTest(Expr):
    """status(<node>) == <status literal>; only legal in specs."""

    node: str
    status: str  # success | failure | running | invalid
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class TemporalUnary(Expr):
    op: str  # G | F | X
    operand: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class TemporalBinary(Expr):
    op: str  # U | M
    left: Expr
    right: Expr
    pos: Pos = _pos_field()


# ---------------------------------------------------------------------------
# Declarations and tree structure.


@dataclass(frozen=True)
class DomainAst:
    pass


@dataclass(frozen=True)
class IntDomainAst(DomainAst):
    lo: int
    hi: int


@dataclass(frozen=True)
class BoolDomainAst(DomainAst):
    pass


@dataclass(frozen=True)
class EnumDomainAst(DomainAst):
    labels: tuple[str, ...]


@dataclass(frozen=True)
class VarDeclAst:
    name: str
    domain: DomainAst
    initial: Expr | None
    frozen: bool
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class NodeAst:
    pass


@dataclass(frozen=True)
class CompositeAst(NodeAst):
    kind: str  # fallback | fallback_m | sequence | sequence_m | parallel
    name: str | None
    threshold: int | None  # parallel only
    children: tuple[NodeAst, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class DecoratorAst(NodeAst):
    kind: str  # inverter | force_success | force_failure
    name: str | None
    child: NodeAst
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class CheckAst(NodeAst):
    name: str
    expr: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class AssignAst:
    target: str
    value: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class GuardedAst:
    guard: Expr
    assigns: tuple[AssignAst, ...]
    status: str  # success | failure | running
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ActionAst(NodeAst):
    name: str
    guards: tuple[GuardedAst, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SpecAst:
    name: str
    formula: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Ast:
    tree_name: str
    env_decls: tuple[VarDeclAst, ...]
    bb_decls: tuple[VarDeclAst, ...]
    root: NodeAst
    specs: tuple[SpecAst, ...]
    pos: Pos = _pos_field()
