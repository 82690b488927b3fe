"""Mutation operators: house-style site mutations and free-form tree edits."""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..lang import ast, unparse
from ..lang.ast import AstNode

ARITH_SWAPS = {"+": ["-", "*"], "-": ["+", "*"], "*": ["+", "-"]}
CMP_SWAPS = {">": ["<"], "<": [">"], ">=": ["<"], "<=": [">"],
             "==": ["!="], "!=": ["=="]}
WRAP_HELPERS = ["twice", "bump"]


@dataclass
class SiteMutation:
    stmt_id: int          # statement id in the fixed program
    mutated: AstNode      # replacement statement subtree
    op_name: str


def _own_expr_roots(stmt: AstNode) -> list[AstNode]:
    # if/while own only their condition; arms are separate statements
    if stmt.kind in (ast.IF, ast.WHILE):
        return stmt.children[:1]
    return [c for c in stmt.children if c.kind != ast.BLOCK]


def _region_nodes(stmt: AstNode) -> list[AstNode]:
    out = []
    for root in _own_expr_roots(stmt):
        out.extend(root.walk())
    return out


def _parent_in(stmt: AstNode, target: AstNode) -> tuple[AstNode, int] | None:
    for node in stmt.walk():
        for i, c in enumerate(node.children):
            if c is target:
                return node, i
    return None


def mutate_statement(stmt: AstNode, rng: random.Random,
                     visible_vars: list[str]) -> SiteMutation | None:
    """One in-statement mutation on a clone; None when nothing applies."""
    ops = ["op_swap", "var_swap", "wrap", "unwrap"]
    weights = [0.45, 0.3, 0.15, 0.1]
    for _ in range(12):
        clone = stmt.clone()
        choice = rng.choices(ops, weights)[0]
        region = _region_nodes(clone)
        if choice == "op_swap":
            bins = [n for n in region if n.kind == ast.BIN_OP
                    and (n.label in ARITH_SWAPS or n.label in CMP_SWAPS)]
            if not bins:
                continue
            node = rng.choice(bins)
            table = ARITH_SWAPS if node.label in ARITH_SWAPS else CMP_SWAPS
            node.label = rng.choice(table[node.label])
            return SiteMutation(stmt.id, clone, choice)
        if choice == "var_swap":
            cands = [n for n in region if n.kind == ast.VAR and len(visible_vars) > 1]
            if not cands:
                continue
            node = rng.choice(cands)
            others = [v for v in visible_vars if v != node.label]
            if not others:
                continue
            node.label = rng.choice(others)
            return SiteMutation(stmt.id, clone, choice)
        if choice == "wrap":
            cands = [n for n in region if n.kind in (ast.VAR, ast.BIN_OP)]
            if not cands:
                continue
            node = rng.choice(cands)
            spot = _parent_in(clone, node)
            if spot is None:
                continue
            parent, idx = spot
            call = AstNode(0, ast.CALL, rng.choice(WRAP_HELPERS), [node], node.span)
            parent.children[idx] = call
            return SiteMutation(stmt.id, clone, choice)
        if choice == "unwrap":
            cands = [n for n in region if n.kind == ast.CALL
                     and n.label in WRAP_HELPERS and len(n.children) == 1]
            if not cands:
                continue
            node = rng.choice(cands)
            spot = _parent_in(clone, node)
            if spot is None:
                continue
            parent, idx = spot
            parent.children[idx] = node.children[0]
            return SiteMutation(stmt.id, clone, choice)
    return None


def apply_sites(program: AstNode, sites: list[SiteMutation]) -> str:
    """Source text of the program with the given statements replaced."""
    clone = program.clone()
    parents = ast.parent_map(clone)
    nodes = ast.index_nodes(clone)
    for site in sites:
        target = nodes[site.stmt_id]
        parent = parents[target.id]
        for i, c in enumerate(parent.children):
            if c.id == target.id:
                parent.children[i] = site.mutated.clone()
                break
    return unparse(clone)


# ---------------------------------------------------------------------------
# free-form edits for differ/replay stress tests

_VAR_POOL = ["a", "b", "x", "y", "q"]


def random_tree_mutation(rng: random.Random, program: AstNode,
                         max_edits: int = 3) -> AstNode:
    clone = program.clone()
    edits = rng.randint(1, max_edits)
    done = 0
    for _ in range(edits * 6):
        if done >= edits:
            break
        kind = rng.choice(["relabel", "delete", "insert"])
        nodes = list(clone.walk())
        if kind == "relabel":
            cands = [n for n in nodes if n.kind in (ast.BIN_OP, ast.VAR, ast.INT_LIT)]
            if not cands:
                continue
            node = rng.choice(cands)
            if node.kind == ast.BIN_OP:
                pool = ARITH_SWAPS.get(node.label) or CMP_SWAPS.get(node.label)
                if not pool:
                    continue
                node.label = rng.choice(pool)
            elif node.kind == ast.VAR:
                node.label = rng.choice([v for v in _VAR_POOL if v != node.label])
            else:
                node.label = str((int(node.label) + rng.randint(1, 9)) % 100)
            done += 1
        elif kind == "delete":
            blocks = [n for n in nodes if n.kind == ast.BLOCK and n.children]
            if not blocks:
                continue
            block = rng.choice(blocks)
            block.children.pop(rng.randrange(len(block.children)))
            done += 1
        else:
            stmts = clone.statements()
            blocks = [n for n in nodes if n.kind == ast.BLOCK]
            if not stmts or not blocks:
                continue
            block = rng.choice(blocks)
            block.children.insert(rng.randint(0, len(block.children)),
                                  rng.choice(stmts).clone())
            done += 1
    ast.assign_ids(clone)
    return clone
