"""Intraprocedural def/use sets, control flow and reaching definitions.

Statement granularity matches the coverage layer: an if or while statement
owns exactly its condition; the statements in its blocks are separate nodes.
data_dependent() is the symmetric "a definition in one statement reaches a
use in the other" check used by multi-statement expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import ast
from .lang.ast import AstNode


@dataclass
class DefUse:
    """Per-statement defined and used variable names."""
    defs: dict[int, frozenset[str]] = field(default_factory=dict)
    uses: dict[int, frozenset[str]] = field(default_factory=dict)


def _own_exprs(stmt: AstNode) -> list[AstNode]:
    """Expression children belonging to the statement itself, not nested blocks."""
    if stmt.kind in (ast.IF, ast.WHILE):
        return [stmt.children[0]]
    return [c for c in stmt.children if c.kind != ast.BLOCK]


def _vars_read(expr: AstNode) -> set[str]:
    return {n.label for n in expr.walk() if n.kind == ast.VAR}


def compute_def_use(method: AstNode) -> DefUse:
    du = DefUse()
    for stmt in ast.method_body(method).statements():
        uses: set[str] = set()
        for expr in _own_exprs(stmt):
            uses |= _vars_read(expr)
        defs: set[str] = set()
        if stmt.kind in (ast.VAR_DECL, ast.ASSIGN):
            defs.add(stmt.label)
        du.defs[stmt.id] = frozenset(defs)
        du.uses[stmt.id] = frozenset(uses)
    return du


@dataclass
class Cfg:
    """Statement-level control flow graph of one method body."""
    entry: list[int]                       # statements reachable first
    succ: dict[int, list[int]]
    stmt_ids: list[int]                    # source order


def build_cfg(method: AstNode) -> Cfg:
    succ: dict[int, list[int]] = {}
    stmt_ids = [s.id for s in ast.method_body(method).statements()]
    for sid in stmt_ids:
        succ[sid] = []

    def link(frm: list[int], to: int) -> None:
        for f in frm:
            if to not in succ[f]:
                succ[f].append(to)

    def wire_block(block: AstNode, incoming: list[int]) -> list[int]:
        """Wires a block given the dangling predecessors; returns new dangling."""
        current = incoming
        for stmt in block.children:
            link(current, stmt.id)
            current = wire_stmt(stmt)
        return current

    def wire_stmt(stmt: AstNode) -> list[int]:
        if stmt.kind == ast.IF:
            then_out = wire_block(stmt.children[1], [stmt.id])
            if len(stmt.children) == 3:
                else_out = wire_block(stmt.children[2], [stmt.id])
                return then_out + else_out
            return then_out + [stmt.id]
        if stmt.kind == ast.WHILE:
            body_out = wire_block(stmt.children[1], [stmt.id])
            # loop back edge, then fall through on a false condition
            link(body_out, stmt.id)
            return [stmt.id]
        if stmt.kind == ast.RETURN:
            return []
        return [stmt.id]

    body = ast.method_body(method)
    entry = [body.children[0].id] if body.children else []
    if body.children:
        wire_block(body, [])
    return Cfg(entry=entry, succ=succ, stmt_ids=stmt_ids)


Definition = tuple[str, int]  # (variable, defining statement id)


def reaching_definitions(method: AstNode,
                         du: DefUse | None = None) -> dict[int, frozenset[Definition]]:
    """IN sets per statement via the classic worklist fixpoint."""
    du = du or compute_def_use(method)
    cfg = build_cfg(method)
    all_defs: dict[str, set[Definition]] = {}
    for sid in cfg.stmt_ids:
        for var in du.defs[sid]:
            all_defs.setdefault(var, set()).add((var, sid))

    in_sets: dict[int, set[Definition]] = {sid: set() for sid in cfg.stmt_ids}
    out_sets: dict[int, set[Definition]] = {sid: set() for sid in cfg.stmt_ids}
    pred: dict[int, list[int]] = {sid: [] for sid in cfg.stmt_ids}
    for sid, nexts in cfg.succ.items():
        for nxt in nexts:
            pred[nxt].append(sid)

    work = list(cfg.stmt_ids)
    while work:
        sid = work.pop(0)
        new_in: set[Definition] = set()
        for p in pred[sid]:
            new_in |= out_sets[p]
        gen = {(var, sid) for var in du.defs[sid]}
        kill: set[Definition] = set()
        for var in du.defs[sid]:
            kill |= all_defs.get(var, set())
        new_out = gen | (new_in - kill)
        changed = new_in != in_sets[sid] or new_out != out_sets[sid]
        in_sets[sid] = new_in
        out_sets[sid] = new_out
        if changed:
            for nxt in cfg.succ[sid]:
                if nxt not in work:
                    work.append(nxt)
    return {sid: frozenset(in_sets[sid]) for sid in cfg.stmt_ids}


def _def_reaches_use(def_stmt: int, use_stmt: int, du: DefUse,
                     reach: dict[int, frozenset[Definition]]) -> bool:
    for var in du.defs.get(def_stmt, frozenset()):
        if var in du.uses.get(use_stmt, frozenset()) and (var, def_stmt) in reach.get(use_stmt, frozenset()):
            return True
    return False


def data_dependent(s1: int, s2: int, method: AstNode,
                   du: DefUse | None = None,
                   reach: dict[int, frozenset[Definition]] | None = None) -> bool:
    """True iff a definition in one statement reaches a use in the other.

    Symmetric by construction (both directions checked); reflexive queries are
    False; only direct dependence counts, no transitive closure.
    """
    if s1 == s2:
        return False
    du = du or compute_def_use(method)
    reach = reach if reach is not None else reaching_definitions(method, du)
    return (_def_reaches_use(s1, s2, du, reach)
            or _def_reaches_use(s2, s1, du, reach))


def make_dependency(method: AstNode):
    """Precomputed symmetric dependence predicate for one method."""
    du = compute_def_use(method)
    reach = reaching_definitions(method, du)

    def dep(s1: int, s2: int) -> bool:
        return data_dependent(s1, s2, method, du, reach)

    return dep


def make_node_dependency(method: AstNode):
    """Like make_dependency but over AstNode arguments."""
    dep = make_dependency(method)

    def node_dep(a: AstNode, b: AstNode) -> bool:
        return dep(a.id, b.id)

    return node_dep
