"""Recursive descent parser for the DSL.

Grammar sketch (see README for the full reference):

    file      := "tree" IDENT "{" envBlock? bbBlock? "root" ":" node spec* "}"
    node      := composite | decorator | leaf
    spec      := "spec" IDENT ":" formula ";"

Formulas and expressions share one precedence-climbing parser; from loosest
to tightest: "->" (right), "||", "&&", U/M (right), unary (! G F X),
comparisons (non associative), additive "+"/"-", unary minus, primary.
The parser is purely syntactic: name resolution, typing, and the rule that
temporal operators may only appear in specs all live in validate.
"""

from .ast import (
    AssignAst,
    Ast,
    ActionAst,
    Binary,
    BoolDomainAst,
    BoolLit,
    CheckAst,
    CompositeAst,
    DecoratorAst,
    DomainAst,
    EnumDomainAst,
    Expr,
    GuardedAst,
    IntDomainAst,
    IntLit,
    Name,
    NodeAst,
    Pos,
    SpecAst,
    StatusTest,
    TemporalBinary,
    TemporalUnary,
    Unary,
    VarDeclAst,
)
from .diagnostics import ERROR, Diagnostic
from .lexer import EOF, IDENT, INT, Token

_COMPOSITE_KINDS = ("fallback", "fallback_m", "sequence", "sequence_m")
_DECORATOR_KINDS = ("inverter", "force_success", "force_failure")
_NODE_STARTERS = _COMPOSITE_KINDS + _DECORATOR_KINDS + ("parallel", "check", "action")


class _Panic(Exception):
    """Internal signal: abandon the current construct and resynchronize."""


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.advance()
        return None

    def error(self, message: str, tok: Token | None = None) -> None:
        tok = tok or self.peek()
        self.diags.append(Diagnostic(ERROR, message, tok.line, tok.column))

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.at(kind):
            return self.advance()
        found = self.peek().lexeme or "end of input"
        self.error(f"expected {what or kind!r}, found {found!r}")
        raise _Panic()

    def sync(self, *stop: str) -> None:
        """Skip tokens until one of the stop kinds (consuming a ';')."""
        stops = set(stop) | {EOF}
        while self.peek().kind not in stops:
            self.advance()
        if self.at(";"):
            self.advance()

    # -- file structure ----------------------------------------------------

    def parse_file(self) -> Ast | None:
        try:
            start = self.expect("tree")
            name = self.expect(IDENT, "tree name").lexeme
            self.expect("{")
        except _Panic:
            return None
        env_decls: tuple[VarDeclAst, ...] = ()
        bb_decls: tuple[VarDeclAst, ...] = ()
        if self.at("env"):
            env_decls = self.parse_var_block("env")
        if self.at("blackboard"):
            bb_decls = self.parse_var_block("blackboard")
        root: NodeAst | None = None
        try:
            self.expect("root")
            self.expect(":")
            root = self.parse_node()
        except _Panic:
            self.sync("spec", "}")
        specs: list[SpecAst] = []
        while self.at("spec"):
            sp = self.parse_spec()
            if sp is not None:
                specs.append(sp)
        try:
            self.expect("}", "'}' closing the tree")
            if not self.at(EOF):
                self.error("trailing input after tree")
        except _Panic:
            pass
        if root is None or self.diags:
            return None
        return Ast(name, env_decls, bb_decls, root, tuple(specs), Pos(start.line, start.column))

    def parse_var_block(self, keyword: str) -> tuple[VarDeclAst, ...]:
        self.advance()  # keyword
        decls: list[VarDeclAst] = []
        try:
            self.expect("{")
        except _Panic:
            self.sync("}", ";")
            return ()
        while not self.at("}", EOF):
            try:
                decls.append(self.parse_var_decl())
            except _Panic:
                self.sync(";", "}")
        self.accept("}")
        return tuple(decls)

    def parse_var_decl(self) -> VarDeclAst:
        name_tok = self.expect(IDENT, "variable name")
        self.expect(":")
        domain = self.parse_domain()
        initial: Expr | None = None
        if self.accept("="):
            initial = self.parse_literal()
        frozen = self.accept("frozen") is not None
        self.expect(";")
        return VarDeclAst(
            name_tok.lexeme, domain, initial, frozen, Pos(name_tok.line, name_tok.column)
        )

    def parse_domain(self) -> DomainAst:
        if self.accept("int"):
            self.expect("[")
            lo = self.parse_int_bound()
            self.expect("..")
            hi = self.parse_int_bound()
            self.expect("]")
            return IntDomainAst(lo, hi)
        if self.accept("bool"):
            return BoolDomainAst()
        if self.accept("enum"):
            self.expect("{")
            labels = [self.expect(IDENT, "enum label").lexeme]
            while self.accept(","):
                labels.append(self.expect(IDENT, "enum label").lexeme)
            self.expect("}")
            return EnumDomainAst(tuple(labels))
        self.error("expected a domain (int[lo..hi], bool, or enum {...})")
        raise _Panic()

    def parse_int_bound(self) -> int:
        neg = self.accept("-") is not None
        tok = self.expect(INT, "integer")
        value = int(tok.lexeme)
        return -value if neg else value

    def parse_literal(self) -> Expr:
        tok = self.peek()
        if self.accept("true"):
            return BoolLit(True, Pos(tok.line, tok.column))
        if self.accept("false"):
            return BoolLit(False, Pos(tok.line, tok.column))
        if self.at("-") or self.at(INT):
            value = self.parse_int_bound()
            return IntLit(value, Pos(tok.line, tok.column))
        if self.at(IDENT):
            self.advance()
            return Name(tok.lexeme, Pos(tok.line, tok.column))
        self.error("expected a literal")
        raise _Panic()

    # -- nodes ---------------------------------------------------------------

    def parse_node(self) -> NodeAst:
        tok = self.peek()
        kind = tok.kind
        if kind in _COMPOSITE_KINDS:
            self.advance()
            name = self.accept_name()
            children = self.parse_children(tok)
            return CompositeAst(kind, name, None, children, Pos(tok.line, tok.column))
        if kind == "parallel":
            self.advance()
            self.expect("(")
            threshold = int(self.expect(INT, "parallel threshold").lexeme)
            self.expect(")")
            name = self.accept_name()
            children = self.parse_children(tok)
            return CompositeAst("parallel", name, threshold, children, Pos(tok.line, tok.column))
        if kind in _DECORATOR_KINDS:
            self.advance()
            name = self.accept_name()
            self.expect("{")
            child = self.parse_node()
            self.expect("}")
            return DecoratorAst(kind, name, child, Pos(tok.line, tok.column))
        if kind == "check":
            self.advance()
            name = self.expect(IDENT, "check name").lexeme
            self.expect("{")
            expr = self.parse_expr()
            self.expect("}")
            return CheckAst(name, expr, Pos(tok.line, tok.column))
        if kind == "action":
            self.advance()
            name = self.expect(IDENT, "action name").lexeme
            self.expect("{")
            guards: list[GuardedAst] = []
            while self.at("on"):
                guards.append(self.parse_guarded())
            if not guards:
                self.error("action requires at least one guarded command", tok)
            self.expect("}")
            return ActionAst(name, tuple(guards), Pos(tok.line, tok.column))
        self.error(f"expected a node, found {tok.lexeme or 'end of input'!r}")
        raise _Panic()

    def accept_name(self) -> str | None:
        tok = self.accept(IDENT)
        return tok.lexeme if tok else None

    def parse_children(self, head: Token) -> tuple[NodeAst, ...]:
        self.expect("{")
        children: list[NodeAst] = []
        while self.at(*_NODE_STARTERS):
            children.append(self.parse_node())
        self.expect("}")
        if not children:
            self.error("composite node requires at least one child", head)
            raise _Panic()
        return tuple(children)

    def parse_guarded(self) -> GuardedAst:
        on_tok = self.expect("on")
        guard = self.parse_expr()
        self.expect("->")
        assigns: list[AssignAst] = []
        while self.at(IDENT):
            target = self.advance()
            self.expect(":=")
            value = self.parse_expr()
            self.expect(";")
            assigns.append(AssignAst(target.lexeme, value, Pos(target.line, target.column)))
        self.expect("return")
        status_tok = self.peek()
        if status_tok.kind not in ("success", "failure", "running"):
            self.error("expected a return status (success, failure, or running)")
            raise _Panic()
        self.advance()
        self.expect(";")
        return GuardedAst(guard, tuple(assigns), status_tok.kind, Pos(on_tok.line, on_tok.column))

    def parse_spec(self) -> SpecAst | None:
        tok = self.advance()  # "spec"
        try:
            name = self.expect(IDENT, "spec name").lexeme
            self.expect(":")
            formula = self.parse_formula()
            self.expect(";")
            return SpecAst(name, formula, Pos(tok.line, tok.column))
        except _Panic:
            self.sync(";", "}")
            return None

    # -- expressions and formulas -------------------------------------------

    def parse_formula(self) -> Expr:
        return self.parse_implies()

    def parse_expr(self) -> Expr:
        # Guard/check/assignment contexts: no top-level "->", which the
        # guarded-command arrow would swallow. Parenthesized subexpressions
        # still admit the full formula grammar; validation rejects temporal
        # operators and implication outside specs.
        return self.parse_or()

    def parse_implies(self) -> Expr:
        left = self.parse_or()
        tok = self.peek()
        if self.accept("->"):
            right = self.parse_implies()  # right associative
            return Binary("->", left, right, Pos(tok.line, tok.column))
        return left

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("||"):
            tok = self.advance()
            right = self.parse_and()
            left = Binary("||", left, right, Pos(tok.line, tok.column))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_until()
        while self.at("&&"):
            tok = self.advance()
            right = self.parse_until()
            left = Binary("&&", left, right, Pos(tok.line, tok.column))
        return left

    def parse_until(self) -> Expr:
        left = self.parse_unary()
        tok = self.peek()
        if tok.kind in ("U", "M"):
            self.advance()
            right = self.parse_until()  # right associative
            return TemporalBinary(tok.kind, left, right, Pos(tok.line, tok.column))
        return left

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "!":
            self.advance()
            return Unary("!", self.parse_unary(), Pos(tok.line, tok.column))
        if tok.kind in ("G", "F", "X"):
            self.advance()
            return TemporalUnary(tok.kind, self.parse_unary(), Pos(tok.line, tok.column))
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        if self.at("status"):
            return self.parse_status_test()
        left = self.parse_additive()
        tok = self.peek()
        if tok.kind in ("==", "!=", "<", "<=", ">", ">="):
            self.advance()
            right = self.parse_additive()
            return Binary(tok.kind, left, right, Pos(tok.line, tok.column))
        return left

    def parse_status_test(self) -> Expr:
        tok = self.advance()  # "status"
        self.expect("(")
        node = self.expect(IDENT, "node name").lexeme
        self.expect(")")
        self.expect("==")
        status_tok = self.peek()
        if status_tok.kind not in ("success", "failure", "running", "invalid"):
            self.error("expected a status literal after status(...) ==")
            raise _Panic()
        self.advance()
        return StatusTest(node, status_tok.kind, Pos(tok.line, tok.column))

    def parse_additive(self) -> Expr:
        left = self.parse_term()
        while self.at("+", "-"):
            tok = self.advance()
            right = self.parse_term()
            left = Binary(tok.kind, left, right, Pos(tok.line, tok.column))
        return left

    def parse_term(self) -> Expr:
        tok = self.peek()
        if self.accept("("):
            inner = self.parse_formula()
            self.expect(")")
            return inner
        if tok.kind == "-":
            self.advance()
            return Unary("-", self.parse_term(), Pos(tok.line, tok.column))
        if tok.kind == INT:
            self.advance()
            return IntLit(int(tok.lexeme), Pos(tok.line, tok.column))
        if tok.kind == "true":
            self.advance()
            return BoolLit(True, Pos(tok.line, tok.column))
        if tok.kind == "false":
            self.advance()
            return BoolLit(False, Pos(tok.line, tok.column))
        if tok.kind == IDENT:
            self.advance()
            return Name(tok.lexeme, Pos(tok.line, tok.column))
        self.error(f"expected an expression, found {tok.lexeme or 'end of input'!r}")
        raise _Panic()


def parse(tokens: list[Token]) -> tuple[Ast | None, list[Diagnostic]]:
    """Parse a token stream; returns (ast, diagnostics).

    The ast is None whenever any error diagnostic was produced. The parser
    resynchronizes at ';' and '}' so several errors can be reported at once.
    """
    p = _Parser(tokens)
    ast = p.parse_file()
    return ast, p.diags
