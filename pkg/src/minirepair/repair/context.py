"""Fixing-context construction.

The context for one target is its method with the target subtree collapsed to
a single Summary node and every other buggy subtree replaced by its current
fix (ground truth while training, the latest prediction while repairing).
The input- and output-side contexts share this skeleton; only the vector
carried at the Summary position differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..embed.tokens import SUMMARY
from ..lang import ast
from ..lang.ast import AstNode


@dataclass
class ContextTree:
    tree: AstNode
    summary_id: int


@dataclass
class Replacement:
    """How to treat one non-target buggy statement while building context.

    fixed=None deletes the statement (its fix was a deletion); an insertion
    fix has target_stmt_id=None and places the fixed statement at
    (block_id, index)."""
    target_stmt_id: Optional[int]
    fixed: Optional[AstNode]
    block_id: Optional[int] = None
    index: Optional[int] = None


def build_fixing_context(method: AstNode,
                         target_stmt_id: Optional[int],
                         replacements: list[Replacement] | None = None,
                         insert_at: tuple[int, int] | None = None) -> ContextTree:
    """target_stmt_id None means the target is an insertion; insert_at gives
    the (block id, child index) where the Summary placeholder goes."""
    clone = method.clone()
    nodes = ast.index_nodes(clone)
    parents = ast.parent_map(clone)

    # resolve all surgery points against the pristine clone before editing;
    # replacement subtrees carry foreign ids that must never be looked up
    plan: list[tuple[AstNode, AstNode | None, AstNode | None]] = []
    inserts: list[tuple[AstNode, int, AstNode]] = []
    for rep in replacements or []:
        if rep.target_stmt_id is not None:
            target = nodes.get(rep.target_stmt_id)
            if target is None:
                raise ValueError(f"replacement target {rep.target_stmt_id} not in method")
            plan.append((parents[target.id], target,
                         rep.fixed.clone() if rep.fixed is not None else None))
        elif rep.fixed is not None and rep.block_id is not None:
            block = nodes.get(rep.block_id)
            if block is not None:
                inserts.append((block, rep.index or 0, rep.fixed.clone()))

    summary = AstNode(0, SUMMARY, "", [], (0, 0, 0, 0))
    if target_stmt_id is not None:
        target = nodes.get(target_stmt_id)
        if target is None:
            raise ValueError(f"target statement {target_stmt_id} not in method")
        plan.append((parents[target.id], target, summary))
    else:
        if insert_at is None:
            raise ValueError("insertion target needs insert_at")
        block = nodes.get(insert_at[0])
        if block is None:
            raise ValueError(f"anchor block {insert_at[0]} not in method")
        inserts.append((block, insert_at[1], summary))

    for parent, old, new in plan:
        for i, child in enumerate(parent.children):
            if child is old:
                if new is None:
                    parent.children.pop(i)
                else:
                    parent.children[i] = new
                break
    for block, index, node in inserts:
        block.children.insert(min(index, len(block.children)), node)

    ast.assign_ids(clone)
    summary_id = next(n.id for n in clone.walk() if n.kind == SUMMARY)
    return ContextTree(tree=clone, summary_id=summary_id)
