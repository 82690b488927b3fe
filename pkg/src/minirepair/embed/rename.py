"""Alpha renaming of method-local variables to VAR_1, VAR_2, ...

Placeholders are assigned by first occurrence in preorder.  The language is
shadow-free (one variable scope per method), so a single dictionary per method
is enough.  Method names are not variables and stay as they are.
"""

from __future__ import annotations

from ..lang import ast
from ..lang.ast import AstNode

PLACEHOLDER_PREFIX = "VAR_"


def is_placeholder(name: str) -> bool:
    return name.startswith(PLACEHOLDER_PREFIX) and name[len(PLACEHOLDER_PREFIX):].isdigit()


def _variable_slots(method: AstNode):
    """Yields (node, get, set) accessors for every variable-name occurrence."""
    for node in method.walk():
        if node.kind == ast.PARAM:
            yield node, "param"
        elif node.kind in (ast.VAR_DECL, ast.ASSIGN, ast.VAR):
            yield node, "label"


def alpha_rename(method: AstNode,
                 seed_names: dict[str, str] | None = None) -> tuple[AstNode, dict[str, str]]:
    """Returns (renamed clone, mapping placeholder -> original name).

    seed_names maps original -> placeholder and lets a second tree (the fixed
    version of the same method) reuse the first tree's assignments.
    """
    renamed = method.clone()
    forward: dict[str, str] = dict(seed_names) if seed_names else {}
    counter = len(forward)
    for node, slot in _variable_slots(renamed):
        if slot == "param":
            name, ptype = ast.param_name_type(node)
        else:
            name = node.label
        if name not in forward:
            counter += 1
            forward[name] = f"{PLACEHOLDER_PREFIX}{counter}"
        if slot == "param":
            node.label = f"{forward[name]}:{ptype}"
        else:
            node.label = forward[name]
    reverse = {placeholder: original for original, placeholder in forward.items()}
    return renamed, reverse


def forward_mapping(reverse: dict[str, str]) -> dict[str, str]:
    return {original: placeholder for placeholder, original in reverse.items()}


def restore(method: AstNode, mapping: dict[str, str]) -> AstNode:
    """Applies the placeholder -> original dictionary; unknown names stay."""
    restored = method.clone()
    for node, slot in _variable_slots(restored):
        if slot == "param":
            name, ptype = ast.param_name_type(node)
            node.label = f"{mapping.get(name, name)}:{ptype}"
        else:
            node.label = mapping.get(node.label, node.label)
    return restored
