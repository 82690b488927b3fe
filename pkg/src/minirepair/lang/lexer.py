"""Tokenizer for the mini language."""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(Exception):
    """Lex or parse failure with position and the token set that was expected."""

    def __init__(self, message: str, line: int, col: int,
                 expected: frozenset[str] = frozenset()):
        super().__init__(f"{message} at {line}:{col}")
        self.line = line
        self.col = col
        self.expected = expected


KEYWORDS = frozenset({
    "func", "let", "if", "else", "while", "return", "true", "false",
    "int", "bool", "str",
})

# Longest-match first for the two-char operators.
TWO_CHAR = ("==", "!=", "<=", ">=", "&&", "||")
ONE_CHAR = frozenset("(){},;:=<>+-*/%!")

IDENT = "IDENT"
INT = "INT"
STRING = "STRING"
SYM = "SYM"  # keywords, operators and punctuation; text distinguishes them
EOF = "EOF"

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def end(self) -> tuple[int, int]:
        return self.line, self.col + max(len(self.source_text()), 1) - 1

    def source_text(self) -> str:
        if self.kind == STRING:
            return '"' + _escape(self.text) + '"'
        return self.text


def _escape(value: str) -> str:
    out = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return "".join(out)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith(TWO_CHAR, i):
            for op in TWO_CHAR:
                if source.startswith(op, i):
                    tokens.append(Token(SYM, op, line, col))
                    i += 2
                    col += 2
                    break
            continue
        if ch.isdigit():
            start = i
            while i < n and source[i].isdigit():
                i += 1
            text = source[start:i]
            tokens.append(Token(INT, text, line, col))
            col += len(text)
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            text = source[start:i]
            kind = SYM if text in KEYWORDS else IDENT
            tokens.append(Token(kind, text, line, col))
            col += len(text)
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            value = []
            while True:
                if i >= n or source[i] == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                c = source[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in _ESCAPES:
                        raise ParseError("bad escape", line, col)
                    value.append(_ESCAPES[source[i + 1]])
                    i += 2
                    col += 2
                    continue
                value.append(c)
                i += 1
                col += 1
            tok = Token(STRING, "".join(value), start_line, start_col)
            tokens.append(tok)
            continue
        if ch in ONE_CHAR:
            tokens.append(Token(SYM, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token(EOF, "", line, col))
    return tokens
