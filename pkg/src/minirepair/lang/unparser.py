"""Source rendering for AST trees.

unparse() pretty-prints a whole program; render_stmt() produces the compact
one-line form used in change summaries ("return true;").  Parentheses are
reinserted from operator precedence so reparsing gives back the same tree.
"""

from __future__ import annotations

from . import ast
from .ast import AstNode
from .lexer import _escape

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7


class UnparseError(ValueError):
    """Tree shape that has no source form (wrong arity or unknown kind)."""


def _expr(node: AstNode) -> str:
    kind = node.kind
    if kind == ast.INT_LIT:
        return node.label
    if kind == ast.BOOL_LIT:
        return node.label
    if kind == ast.STR_LIT:
        return '"' + _escape(node.label) + '"'
    if kind == ast.VAR:
        if node.children:
            raise UnparseError("Var with children")
        return node.label
    if kind == ast.CALL:
        return node.label + "(" + ", ".join(_expr(a) for a in node.children) + ")"
    if kind == ast.UNARY_OP:
        if len(node.children) != 1:
            raise UnparseError("UnaryOp arity")
        operand = node.children[0]
        text = _expr(operand)
        if operand.kind == ast.BIN_OP:
            text = "(" + text + ")"
        return node.label + text
    if kind == ast.BIN_OP:
        if len(node.children) != 2:
            raise UnparseError("BinOp arity")
        prec = _PREC.get(node.label)
        if prec is None:
            # Unknown operator label: render anyway, the reparse filter decides.
            prec = 0
        lhs, rhs = node.children
        left = _expr(lhs)
        if lhs.kind == ast.BIN_OP and _PREC.get(lhs.label, 0) < prec:
            left = "(" + left + ")"
        right = _expr(rhs)
        if rhs.kind == ast.BIN_OP and _PREC.get(rhs.label, 0) <= prec:
            right = "(" + right + ")"
        return f"{left} {node.label} {right}"
    raise UnparseError(f"not an expression kind: {kind}")


def _stmt_lines(node: AstNode, indent: int) -> list[str]:
    pad = "  " * indent
    kind = node.kind
    if kind == ast.VAR_DECL:
        if len(node.children) != 1:
            raise UnparseError("VarDecl arity")
        return [f"{pad}let {node.label} = {_expr(node.children[0])};"]
    if kind == ast.ASSIGN:
        if len(node.children) != 1:
            raise UnparseError("Assign arity")
        return [f"{pad}{node.label} = {_expr(node.children[0])};"]
    if kind == ast.RETURN:
        if len(node.children) > 1:
            raise UnparseError("Return arity")
        if node.children:
            return [f"{pad}return {_expr(node.children[0])};"]
        return [f"{pad}return;"]
    if kind == ast.EXPR_STMT:
        if len(node.children) != 1:
            raise UnparseError("ExprStmt arity")
        return [f"{pad}{_expr(node.children[0])};"]
    if kind == ast.IF:
        if len(node.children) not in (2, 3):
            raise UnparseError("If arity")
        lines = [f"{pad}if ({_expr(node.children[0])}) {{"]
        lines.extend(_block_lines(node.children[1], indent + 1))
        if len(node.children) == 3:
            lines.append(f"{pad}}} else {{")
            lines.extend(_block_lines(node.children[2], indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if kind == ast.WHILE:
        if len(node.children) != 2:
            raise UnparseError("While arity")
        lines = [f"{pad}while ({_expr(node.children[0])}) {{"]
        lines.extend(_block_lines(node.children[1], indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise UnparseError(f"not a statement kind: {kind}")


def _block_lines(block: AstNode, indent: int) -> list[str]:
    if block.kind != ast.BLOCK:
        raise UnparseError("expected Block")
    lines: list[str] = []
    for stmt in block.children:
        lines.extend(_stmt_lines(stmt, indent))
    return lines


def _method_lines(method: AstNode) -> list[str]:
    name, _, rtype = method.label.partition(":")
    params = []
    for p in ast.method_params(method):
        pname, ptype = ast.param_name_type(p)
        params.append(f"{pname}: {ptype}")
    head = f"func {name}({', '.join(params)})"
    if rtype:
        head += f": {rtype}"
    lines = [head + " {"]
    lines.extend(_block_lines(ast.method_body(method), 1))
    lines.append("}")
    return lines


def unparse(node: AstNode) -> str:
    """Renders a Program (or a single Method) back to source text."""
    if node.kind == ast.PROGRAM:
        chunks = [_method_lines(m) for m in ast.methods(node)]
        return "\n\n".join("\n".join(c) for c in chunks) + "\n"
    if node.kind == ast.METHOD:
        return "\n".join(_method_lines(node)) + "\n"
    raise UnparseError(f"cannot unparse {node.kind} at top level")


def render_stmt(node: AstNode) -> str:
    """Single-line compact rendering of one statement, e.g. 'a = a + 1;'."""
    lines = [ln.strip() for ln in _stmt_lines(node, 0)]
    return " ".join(lines)


def render_expr(node: AstNode) -> str:
    return _expr(node)
