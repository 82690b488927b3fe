"""Token views of programs used by every learned component.

Two views exist so that sequence models and tree models share one vocabulary:
  * source view: lexer tokens of a statement's rendered text;
  * node view: one token per AST node (the label where present, otherwise a
    fixed keyword stand-in for the kind), preceded by the kind stand-in when
    it differs, so both token families co-occur during embedding training.
"""

from __future__ import annotations

from ..lang import ast, render_stmt, tokenize
from ..lang.ast import AstNode

# Context-tree-only kinds (see repair.context); listed here so token mapping
# and encoders treat them uniformly.
SUMMARY = "Summary"
EMPTY = "Empty"

KIND_TOKENS = {
    ast.PROGRAM: "func",
    ast.METHOD: "func",
    ast.PARAM: "param",
    ast.BLOCK: "{",
    ast.VAR_DECL: "let",
    ast.ASSIGN: "=",
    ast.IF: "if",
    ast.WHILE: "while",
    ast.RETURN: "return",
    ast.EXPR_STMT: ";",
    ast.CALL: "(",
    ast.BIN_OP: "",     # the label is the operator itself
    ast.UNARY_OP: "",
    ast.VAR: "id",
    ast.INT_LIT: "num",
    ast.BOOL_LIT: "lit",
    ast.STR_LIT: "lit",
    SUMMARY: "SUMMARY",
    EMPTY: "EMPTY",
}

# Kinds whose label is a free token the repair stage may re-choose.
LABELED_KINDS = frozenset({
    ast.VAR_DECL, ast.ASSIGN, ast.CALL, ast.BIN_OP, ast.UNARY_OP, ast.VAR,
    ast.INT_LIT, ast.BOOL_LIT, ast.STR_LIT,
})


def node_token(node: AstNode) -> str:
    if node.kind in (ast.METHOD, ast.PARAM):
        return node.label.split(":", 1)[0] or KIND_TOKENS[node.kind]
    if node.label:
        return node.label
    return KIND_TOKENS.get(node.kind, node.kind)


def kind_token(node: AstNode) -> str:
    tok = KIND_TOKENS.get(node.kind, node.kind)
    return tok if tok else node_token(node)


def source_tokens(stmt: AstNode) -> list[str]:
    """Lexer token texts of the statement's compact rendering."""
    toks = tokenize(render_stmt(stmt))
    return [t.text for t in toks if t.kind != "EOF"]


def node_tokens(root: AstNode) -> list[str]:
    """Preorder node-view token stream, kind stand-ins interleaved."""
    out: list[str] = []
    for node in root.walk():
        kt = kind_token(node)
        nt = node_token(node)
        if kt != nt:
            out.append(kt)
        out.append(nt)
    return out


def embedding_sentences(method: AstNode) -> list[list[str]]:
    """Per-statement sentences in both views for co-occurrence counting."""
    sentences: list[list[str]] = []
    for stmt in ast.method_body(method).statements():
        try:
            sentences.append(source_tokens(stmt))
        except Exception:
            pass
        sentences.append(node_tokens(stmt))
    return sentences
