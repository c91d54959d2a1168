"""Tokenizer for the behavior tree DSL.

Produces a flat token stream with 1-based source positions. Keywords are
reserved globally, so single capital letters G, F, X, U, M cannot be used
as identifiers (they are temporal operators).
"""

from dataclasses import dataclass

KEYWORDS = frozenset(
    {
        "tree", "env", "blackboard", "root", "int", "bool", "enum", "frozen",
        "fallback", "fallback_m", "sequence", "sequence_m", "parallel",
        "inverter", "force_success", "force_failure", "check", "action",
        "on", "return", "spec", "status",
        "success", "failure", "running", "invalid",
        "true", "false",
        "G", "F", "X", "U", "M",
    }
)

# Multi-char symbols first so maximal munch is a simple ordered scan.
_SYMBOLS = (
    "..", ":=", "==", "!=", "<=", ">=", "&&", "||", "->",
    "{", "}", "(", ")", "[", "]", ":", ";", ",", "=", "<", ">", "+", "-", "!",
)

EOF = "eof"
IDENT = "ident"
INT = "int_lit"


class LexError(Exception):
    """Raised on a character outside the token alphabet."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # keyword/symbol lexeme itself, or "ident" / "int_lit" / "eof"
    lexeme: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    """Tokenize DSL source, skipping whitespace and '#' line comments."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def bump(text: str) -> None:
        nonlocal line, col
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            bump(ch)
            i += 1
            continue
        if ch == "#":
            j = source.find("\n", i)
            if j == -1:
                j = n
            bump(source[i:j])
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = word if word in KEYWORDS else IDENT
            tokens.append(Token(kind, word, line, col))
            bump(word)
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            word = source[i:j]
            tokens.append(Token(INT, word, line, col))
            bump(word)
            i = j
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col))
                bump(sym)
                i += len(sym)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", line, col)

    tokens.append(Token(EOF, "", line, col))
    return tokens
