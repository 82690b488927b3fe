"""Recursive-descent parser producing AstNode trees with preorder ids."""

from __future__ import annotations

from . import ast
from .ast import AstNode
from .lexer import EOF, IDENT, INT, STRING, SYM, ParseError, Token, tokenize

_TYPES = ("int", "bool", "str")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at_sym(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == SYM and tok.text in texts

    def expect_sym(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind != SYM or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col, frozenset({text}))
        return self.advance()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != IDENT:
            raise ParseError(f"expected identifier, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col, frozenset({IDENT}))
        return self.advance()

    def expect_type(self) -> Token:
        tok = self.peek()
        if tok.kind != SYM or tok.text not in _TYPES:
            raise ParseError(f"expected type, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col, frozenset(_TYPES))
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def program(self) -> AstNode:
        methods = [self.method()]
        while not self.peek().kind == EOF:
            methods.append(self.method())
        span = (methods[0].span[0], methods[0].span[1],
                methods[-1].span[2], methods[-1].span[3])
        return AstNode(0, ast.PROGRAM, "", methods, span)

    def method(self) -> AstNode:
        start = self.expect_sym("func")
        name = self.expect_ident()
        self.expect_sym("(")
        params: list[AstNode] = []
        if not self.at_sym(")"):
            params.append(self.param())
            while self.at_sym(","):
                self.advance()
                params.append(self.param())
        self.expect_sym(")")
        label = name.text
        if self.at_sym(":"):
            self.advance()
            label += ":" + self.expect_type().text
        body = self.block()
        span = (start.line, start.col, body.span[2], body.span[3])
        return AstNode(0, ast.METHOD, label, params + [body], span)

    def param(self) -> AstNode:
        name = self.expect_ident()
        self.expect_sym(":")
        ptype = self.expect_type()
        return AstNode(0, ast.PARAM, f"{name.text}:{ptype.text}", [],
                       (name.line, name.col, *ptype.end))

    def block(self) -> AstNode:
        open_tok = self.expect_sym("{")
        stmts: list[AstNode] = []
        while not self.at_sym("}"):
            if self.peek().kind == EOF:
                tok = self.peek()
                raise ParseError("expected '}'", tok.line, tok.col, frozenset({"}"}))
            stmts.append(self.statement())
        close_tok = self.advance()
        return AstNode(0, ast.BLOCK, "", stmts,
                       (open_tok.line, open_tok.col, *close_tok.end))

    def statement(self) -> AstNode:
        tok = self.peek()
        if tok.kind == SYM and tok.text == "let":
            self.advance()
            name = self.expect_ident()
            self.expect_sym("=")
            value = self.expression()
            semi = self.expect_sym(";")
            return AstNode(0, ast.VAR_DECL, name.text, [value],
                           (tok.line, tok.col, *semi.end))
        if tok.kind == SYM and tok.text == "if":
            self.advance()
            self.expect_sym("(")
            cond = self.expression()
            self.expect_sym(")")
            then_block = self.block()
            children = [cond, then_block]
            end = then_block.span[2:]
            if self.at_sym("else"):
                self.advance()
                else_block = self.block()
                children.append(else_block)
                end = else_block.span[2:]
            return AstNode(0, ast.IF, "", children, (tok.line, tok.col, *end))
        if tok.kind == SYM and tok.text == "while":
            self.advance()
            self.expect_sym("(")
            cond = self.expression()
            self.expect_sym(")")
            body = self.block()
            return AstNode(0, ast.WHILE, "", [cond, body],
                           (tok.line, tok.col, *body.span[2:]))
        if tok.kind == SYM and tok.text == "return":
            self.advance()
            children = []
            if not self.at_sym(";"):
                children.append(self.expression())
            semi = self.expect_sym(";")
            return AstNode(0, ast.RETURN, "", children,
                           (tok.line, tok.col, *semi.end))
        if tok.kind == IDENT and self._next_is_assign():
            name = self.advance()
            self.expect_sym("=")
            value = self.expression()
            semi = self.expect_sym(";")
            return AstNode(0, ast.ASSIGN, name.text, [value],
                           (tok.line, tok.col, *semi.end))
        expr = self.expression()
        semi = self.expect_sym(";")
        return AstNode(0, ast.EXPR_STMT, "", [expr],
                       (expr.span[0], expr.span[1], *semi.end))

    def _next_is_assign(self) -> bool:
        nxt = self.tokens[self.pos + 1]
        return nxt.kind == SYM and nxt.text == "="

    # Precedence climbing: || < && < (== !=) < (< <= > >=) < (+ -) < (* / %).
    def expression(self) -> AstNode:
        return self._binary(0)

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="),
               ("+", "-"), ("*", "/", "%"))

    def _binary(self, level: int) -> AstNode:
        if level == len(self._LEVELS):
            return self.unary()
        node = self._binary(level + 1)
        while self.at_sym(*self._LEVELS[level]):
            op = self.advance()
            rhs = self._binary(level + 1)
            node = AstNode(0, ast.BIN_OP, op.text, [node, rhs],
                           (node.span[0], node.span[1], *rhs.span[2:]))
        return node

    def unary(self) -> AstNode:
        if self.at_sym("!", "-"):
            op = self.advance()
            operand = self.unary()
            return AstNode(0, ast.UNARY_OP, op.text, [operand],
                           (op.line, op.col, *operand.span[2:]))
        return self.primary()

    def primary(self) -> AstNode:
        tok = self.peek()
        if tok.kind == INT:
            self.advance()
            return AstNode(0, ast.INT_LIT, tok.text, [], (tok.line, tok.col, *tok.end))
        if tok.kind == STRING:
            self.advance()
            return AstNode(0, ast.STR_LIT, tok.text, [], (tok.line, tok.col, *tok.end))
        if tok.kind == SYM and tok.text in ("true", "false"):
            self.advance()
            return AstNode(0, ast.BOOL_LIT, tok.text, [], (tok.line, tok.col, *tok.end))
        if tok.kind == IDENT:
            self.advance()
            if self.at_sym("("):
                self.advance()
                args: list[AstNode] = []
                if not self.at_sym(")"):
                    args.append(self.expression())
                    while self.at_sym(","):
                        self.advance()
                        args.append(self.expression())
                close = self.expect_sym(")")
                return AstNode(0, ast.CALL, tok.text, args,
                               (tok.line, tok.col, *close.end))
            return AstNode(0, ast.VAR, tok.text, [], (tok.line, tok.col, *tok.end))
        if tok.kind == SYM and tok.text == "(":
            self.advance()
            inner = self.expression()
            self.expect_sym(")")
            return inner
        raise ParseError(f"expected expression, found {tok.text or 'end of input'!r}",
                         tok.line, tok.col,
                         frozenset({INT, STRING, IDENT, "true", "false", "(", "!", "-"}))


def parse(source: str) -> AstNode:
    """Parses a program; raises ParseError with position and expected tokens."""
    parser = _Parser(tokenize(source))
    root = parser.program()
    ast.assign_ids(root)
    return root
