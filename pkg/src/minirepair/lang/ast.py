"""AST node type and helpers shared by the whole pipeline.

Trees are plain records: every node carries a tree-unique integer id, a kind
string, a textual label (identifier, operator symbol, literal lexeme, or empty)
and ordered children.  Spans are 1-based (startLine, startCol, endLine, endCol)
with inclusive end positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

PROGRAM = "Program"
METHOD = "Method"
PARAM = "Param"
BLOCK = "Block"
VAR_DECL = "VarDecl"
ASSIGN = "Assign"
IF = "If"
WHILE = "While"
RETURN = "Return"
EXPR_STMT = "ExprStmt"
CALL = "Call"
BIN_OP = "BinOp"
UNARY_OP = "UnaryOp"
VAR = "Var"
INT_LIT = "IntLit"
BOOL_LIT = "BoolLit"
STR_LIT = "StrLit"

ALL_KINDS = frozenset({
    PROGRAM, METHOD, PARAM, BLOCK, VAR_DECL, ASSIGN, IF, WHILE, RETURN,
    EXPR_STMT, CALL, BIN_OP, UNARY_OP, VAR, INT_LIT, BOOL_LIT, STR_LIT,
})

# Statement granularity used by coverage, SBFL, hunks and repair targets.
STMT_KINDS = frozenset({VAR_DECL, ASSIGN, IF, WHILE, RETURN, EXPR_STMT})

Span = tuple[int, int, int, int]


@dataclass
class AstNode:
    id: int
    kind: str
    label: str = ""
    children: list["AstNode"] = field(default_factory=list)
    span: Span = (0, 0, 0, 0)

    def walk(self) -> Iterator["AstNode"]:
        """Preorder traversal of the subtree rooted here."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def find(self, node_id: int) -> Optional["AstNode"]:
        for node in self.walk():
            if node.id == node_id:
                return node
        return None

    def statements(self) -> list["AstNode"]:
        """All statement nodes in the subtree, in source (preorder) order."""
        return [n for n in self.walk() if n.kind in STMT_KINDS]

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def clone(self) -> "AstNode":
        """Deep copy preserving ids and spans."""
        return AstNode(self.id, self.kind, self.label,
                       [c.clone() for c in self.children], self.span)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "label": self.label,
            "children": [c.to_dict() for c in self.children],
            "span": list(self.span),
        }

    @staticmethod
    def from_dict(data: dict) -> "AstNode":
        return AstNode(
            id=int(data["id"]),
            kind=data["kind"],
            label=data.get("label", ""),
            children=[AstNode.from_dict(c) for c in data.get("children", [])],
            span=tuple(data.get("span", (0, 0, 0, 0))),
        )


def structural_key(node: AstNode) -> tuple:
    """Hashable shape of a subtree with ids and spans excluded."""
    return (node.kind, node.label, tuple(structural_key(c) for c in node.children))


def structurally_equal(a: AstNode, b: AstNode) -> bool:
    if a.kind != b.kind or a.label != b.label or len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


def assign_ids(root: AstNode, start: int = 0) -> int:
    """Renumber the tree with fresh preorder ids; returns the next free id."""
    next_id = start
    for node in root.walk():
        node.id = next_id
        next_id += 1
    return next_id


def parent_map(root: AstNode) -> dict[int, AstNode]:
    """Maps node id to its parent node; the root is absent."""
    parents: dict[int, AstNode] = {}
    for node in root.walk():
        for child in node.children:
            parents[child.id] = node
    return parents


def index_nodes(root: AstNode) -> dict[int, AstNode]:
    return {node.id: node for node in root.walk()}


def methods(program: AstNode) -> list[AstNode]:
    return [c for c in program.children if c.kind == METHOD]


def method_name(method: AstNode) -> str:
    return method.label.split(":", 1)[0]


def method_params(method: AstNode) -> list[AstNode]:
    return [c for c in method.children if c.kind == PARAM]


def method_body(method: AstNode) -> AstNode:
    return method.children[-1]


def param_name_type(param: AstNode) -> tuple[str, str]:
    name, _, ptype = param.label.partition(":")
    return name, ptype


def enclosing_method(program: AstNode, stmt_id: int) -> Optional[AstNode]:
    for m in methods(program):
        if m.find(stmt_id) is not None:
            return m
    return None


def map_labels(root: AstNode, fn: Callable[[AstNode], str]) -> None:
    """Rewrites labels in place; fn receives the node and returns the new label."""
    for node in root.walk():
        node.label = fn(node)
