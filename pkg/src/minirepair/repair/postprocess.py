"""Candidate postprocessing: name restoration, static filters, re-ranking,
and test-based validation.

A raw candidate edits the alpha-renamed method.  The filter chain restores
original variable names, splices the method back into the program, reparses,
and statically checks name resolution; survivors are re-ranked and then run
against the test suite in order until one passes everything.
"""

from __future__ import annotations

import difflib
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from ..embed.rename import is_placeholder, restore
from ..lang import ast, parse, tokenize, unparse
from ..lang.ast import AstNode
from ..lang.interp import BUILTINS, TestCase, execute
from .generate import CandidatePatch, Edit


class EditError(Exception):
    pass


def apply_edits(method: AstNode, edits: Sequence[Edit]) -> AstNode:
    """Applies replace/delete/insert edits (renamed-method stmt ids) to a clone."""
    patched = method.clone()
    index = {n.id: n for n in patched.walk()}
    parents = ast.parent_map(patched)
    inserts = []
    for edit in edits:
        if edit.stmt_id is None:
            if edit.block_id is None or edit.index is None:
                raise EditError("insertion without an anchor")
            inserts.append(edit)
            continue
        target = index.get(edit.stmt_id)
        if target is None:
            raise EditError(f"no statement with id {edit.stmt_id}")
        parent = parents.get(edit.stmt_id)
        if parent is None:
            raise EditError(f"statement {edit.stmt_id} has no parent")
        pos = parent.children.index(target)
        if edit.subtree is None:
            parent.children.pop(pos)
        else:
            parent.children[pos] = edit.subtree.clone()
    for edit in sorted(inserts, key=lambda e: (e.block_id, e.index)):
        block = index.get(edit.block_id)
        if block is None or block.kind != ast.BLOCK:
            raise EditError(f"no block with id {edit.block_id}")
        pos = min(max(edit.index, 0), len(block.children))
        block.children.insert(pos, edit.subtree.clone())
    ast.assign_ids(patched)
    return patched


def splice_method(program: AstNode, method_id: int, replacement: AstNode) -> str:
    clone = program.clone()
    for i, child in enumerate(clone.children):
        if child.id == method_id:
            clone.children[i] = replacement
            return unparse(clone)
    raise EditError(f"no method with id {method_id}")


def _known_placeholders(method: AstNode, reverse: dict[str, str]) -> bool:
    for node in method.walk():
        if node.kind == ast.PARAM:
            name = ast.param_name_type(node)[0]
        elif node.kind in (ast.VAR_DECL, ast.ASSIGN, ast.VAR):
            name = node.label
        else:
            continue
        if is_placeholder(name) and name not in reverse:
            return False
    return True


def names_resolve(method: AstNode, callables: set[str]) -> bool:
    """Definition-before-use check plus callee existence, in source order."""
    declared = {ast.param_name_type(p)[0] for p in ast.method_params(method)}

    def expr_ok(node: AstNode) -> bool:
        for n in node.walk():
            if n.kind == ast.VAR and n.label not in declared:
                return False
            if n.kind == ast.CALL and n.label not in callables:
                return False
        return True

    def stmt_ok(stmt: AstNode) -> bool:
        if stmt.kind == ast.VAR_DECL:
            if not expr_ok(stmt.children[0]):
                return False
            declared.add(stmt.label)
            return True
        if stmt.kind == ast.ASSIGN:
            return stmt.label in declared and expr_ok(stmt.children[0])
        if stmt.kind in (ast.RETURN, ast.EXPR_STMT):
            return all(expr_ok(c) for c in stmt.children)
        if stmt.kind == ast.IF:
            if not expr_ok(stmt.children[0]):
                return False
            return all(block_ok(arm) for arm in stmt.children[1:])
        if stmt.kind == ast.WHILE:
            return expr_ok(stmt.children[0]) and block_ok(stmt.children[1])
        return False

    def block_ok(block: AstNode) -> bool:
        return all(stmt_ok(s) for s in block.statements())

    return block_ok(ast.method_body(method))


@dataclass
class FilteredCandidate:
    source: str
    program: AstNode
    score_sum: float
    prior_rank: int
    similarity: float


def _token_texts(source: str) -> list[str]:
    return [t.text for t in tokenize(source) if t.kind != "EOF"]


def postprocess(patches: Sequence[CandidatePatch], renamed_method: AstNode,
                reverse: dict[str, str], program: AstNode, method_id: int,
                original_source: str) -> list[FilteredCandidate]:
    """Filter chain + re-rank.  Returns candidates ready for validation."""
    callables = {m.label.split(":", 1)[0] for m in ast.methods(program)}
    callables.update(BUILTINS)
    base_tokens = _token_texts(original_source)
    method_label = next(c.label for c in program.children if c.id == method_id)
    seen: dict[str, FilteredCandidate] = {}
    for patch in patches:
        try:
            patched = apply_edits(renamed_method, patch.edits)
        except EditError:
            continue
        if not _known_placeholders(patched, reverse):
            continue
        restored = restore(patched, reverse)
        try:
            source = splice_method(program, method_id, restored)
            reparsed = parse(source)
        except Exception:
            continue
        if source == original_source:
            continue  # no-op cannot repair anything
        new_method = next(m for m in ast.methods(reparsed)
                          if m.label == method_label)
        if not names_resolve(new_method, callables):
            continue
        ratio = difflib.SequenceMatcher(None, base_tokens,
                                        _token_texts(source)).ratio()
        cand = FilteredCandidate(source=source, program=reparsed,
                                 score_sum=patch.score_sum,
                                 prior_rank=patch.rank, similarity=ratio)
        kept = seen.get(source)
        if kept is None or cand.score_sum > kept.score_sum:
            seen[source] = cand
    ranked = sorted(seen.values(),
                    key=lambda c: (-c.score_sum, -c.similarity, c.prior_rank))
    return ranked


@dataclass
class ValidationOutcome:
    tried: int
    plausible_rank: Optional[int]       # 1-based rank in the validated order
    plausible_source: Optional[str]
    correct: Optional[bool]
    elapsed_ms: int


def _passes_all(program: AstNode, tests: Sequence[TestCase]) -> bool:
    for test in tests:
        if not execute(program, test, instrument=False).passed:
            return False
    return True


def validate_candidates(candidates: Sequence[FilteredCandidate],
                        tests: Sequence[TestCase],
                        budget_s: float = 60.0,
                        expected_source: Optional[str] = None
                        ) -> ValidationOutcome:
    start = time.monotonic()
    deadline = start + budget_s
    tried = 0
    canonical = None
    if expected_source is not None:
        canonical = unparse(parse(expected_source))
    for i, cand in enumerate(candidates):
        if time.monotonic() > deadline:
            break
        tried += 1
        if _passes_all(cand.program, tests):
            correct = None
            if canonical is not None:
                correct = unparse(cand.program) == canonical
            return ValidationOutcome(tried=tried, plausible_rank=i + 1,
                                     plausible_source=cand.source,
                                     correct=correct,
                                     elapsed_ms=int((time.monotonic() - start) * 1000))
    return ValidationOutcome(tried=tried, plausible_rank=None,
                             plausible_source=None, correct=None,
                             elapsed_ms=int((time.monotonic() - start) * 1000))
