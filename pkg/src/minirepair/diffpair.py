"""AST differencing, fixed/buggy subtree pairing, and bug-type classification.

The matcher is a simplified two-phase differ: greedy top-down matching of
isomorphic subtrees by structural hash, then a bottom-up pass mapping
same-kind containers whose descendants already agree (dice >= 0.5), with an
in-order recovery alignment of leftover same-kind children under mapped
parents.  Mappings are pruned to be hierarchy- and order-consistent, which is
what makes the insert/delete/relabel edit script replayable without moves.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .lang import ast, render_stmt
from .lang.ast import AstNode, structural_key

_PHASE1_MIN_SIZE = 2
_DICE_THRESHOLD = 0.5


@dataclass
class Diff:
    buggy: AstNode
    fixed: AstNode
    b2f: dict[int, int]
    f2b: dict[int, int]
    b_nodes: dict[int, AstNode] = field(default_factory=dict)
    f_nodes: dict[int, AstNode] = field(default_factory=dict)
    b_parents: dict[int, AstNode] = field(default_factory=dict)
    f_parents: dict[int, AstNode] = field(default_factory=dict)

    def __post_init__(self):
        if not self.b_nodes:
            self.b_nodes = ast.index_nodes(self.buggy)
            self.f_nodes = ast.index_nodes(self.fixed)
            self.b_parents = ast.parent_map(self.buggy)
            self.f_parents = ast.parent_map(self.fixed)


INSERT = "insert"
DELETE = "delete"
UPDATE = "update"


@dataclass(frozen=True)
class FixingChange:
    op: str          # insert | delete | update
    kind: str        # AST node kind
    label: str       # node label, or the rendered statement for statements

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.op, self.kind, self.label)


class BugType(enum.IntEnum):
    TYPE1 = 1
    TYPE2 = 2
    TYPE3 = 3
    TYPE4 = 4
    TYPE5 = 5


# ---------------------------------------------------------------------------
# matching

def _lcs_pairs(a: Sequence, b: Sequence, equal) -> list[tuple[int, int]]:
    """Index pairs of a longest common subsequence under `equal`."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if equal(a[i], b[j]):
                table[i][j] = 1 + table[i + 1][j + 1]
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if equal(a[i], b[j]) and table[i][j] == 1 + table[i + 1][j + 1]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def _descendant_ids(node: AstNode) -> set[int]:
    out = set()
    for n in node.walk():
        if n.id != node.id:
            out.add(n.id)
    return out


class _Matcher:
    def __init__(self, buggy: AstNode, fixed: AstNode):
        self.buggy = buggy
        self.fixed = fixed
        self.b2f: dict[int, int] = {}
        self.f2b: dict[int, int] = {}
        self.b_parents = ast.parent_map(buggy)
        self.f_parents = ast.parent_map(fixed)
        self.b_keys = {n.id: structural_key(n) for n in buggy.walk()}
        self.f_keys = {n.id: structural_key(n) for n in fixed.walk()}
        self.f_nodes = ast.index_nodes(fixed)
        self.b_nodes = ast.index_nodes(buggy)

    def map_pair(self, b: AstNode, f: AstNode) -> None:
        self.b2f[b.id] = f.id
        self.f2b[f.id] = b.id

    def unmap(self, b_id: int) -> None:
        f_id = self.b2f.pop(b_id)
        self.f2b.pop(f_id)

    def run(self) -> None:
        self.map_pair(self.buggy, self.fixed)  # roots always correspond
        self._top_down()
        self._bottom_up()
        self._recover()
        self._prune()

    def _top_down(self) -> None:
        candidates: dict[tuple, list[AstNode]] = {}
        for node in self.fixed.walk():
            candidates.setdefault(self.f_keys[node.id], []).append(node)
        for b in self.buggy.walk():
            if b.id in self.b2f or b.size() < _PHASE1_MIN_SIZE:
                continue
            options = [f for f in candidates.get(self.b_keys[b.id], [])
                       if self._subtree_unmapped(f)]
            if not options:
                continue
            chosen = self._prefer_same_parent(b, options)
            for bn, fn in zip(b.walk(), chosen.walk()):
                if bn.id not in self.b2f and fn.id not in self.f2b:
                    self.map_pair(bn, fn)

    def _subtree_unmapped(self, f: AstNode) -> bool:
        return all(n.id not in self.f2b for n in f.walk())

    def _prefer_same_parent(self, b: AstNode, options: list[AstNode]) -> AstNode:
        bp = self.b_parents.get(b.id)
        if bp is not None:
            bp_key = (bp.kind, bp.label)
            for f in options:
                fp = self.f_parents.get(f.id)
                if fp is not None and (fp.kind, fp.label) == bp_key:
                    return f
        return options[0]

    def _bottom_up(self) -> None:
        b_desc_cache: dict[int, set[int]] = {}
        post: list[AstNode] = []

        def visit(node: AstNode) -> None:
            for c in node.children:
                visit(c)
            post.append(node)

        visit(self.buggy)
        for b in post:
            if b.id in self.b2f or not b.children:
                continue
            desc_b = b_desc_cache.setdefault(b.id, _descendant_ids(b))
            mapped_images = {self.b2f[d] for d in desc_b if d in self.b2f}
            if not mapped_images:
                continue
            best: tuple[float, int, AstNode] | None = None
            for f in self.fixed.walk():
                if f.id in self.f2b or f.kind != b.kind or not f.children:
                    continue
                desc_f = _descendant_ids(f)
                common = len(mapped_images & desc_f)
                if common == 0:
                    continue
                dice = 2.0 * common / (len(desc_b) + len(desc_f))
                if dice >= _DICE_THRESHOLD and (best is None or dice > best[0]):
                    best = (dice, f.id, f)
            if best is not None:
                self.map_pair(b, best[2])

    def _recover(self) -> None:
        """Aligns leftover same-kind children of mapped pairs, recursively."""
        work = [(b_id, f_id) for b_id, f_id in self.b2f.items()]
        for b_id, f_id in work:
            self._align_children(self.b_nodes[b_id], self.f_nodes[f_id])

    def _align_children(self, b: AstNode, f: AstNode) -> None:
        free_b = [c for c in b.children if c.id not in self.b2f]
        free_f = [c for c in f.children if c.id not in self.f2b]
        for i, j in _lcs_pairs(free_b, free_f, lambda x, y: x.kind == y.kind):
            self.map_pair(free_b[i], free_f[j])
            self._align_children(free_b[i], free_f[j])

    def _prune(self) -> None:
        while True:
            changed = False
            # hierarchy: a pair survives only when the parents correspond
            for b in list(self.buggy.walk()):
                if b.id not in self.b2f or b.id == self.buggy.id:
                    continue
                bp = self.b_parents[b.id]
                fp = self.f_parents.get(self.b2f[b.id])
                if bp.id not in self.b2f or fp is None or self.b2f[bp.id] != fp.id:
                    self.unmap(b.id)
                    changed = True
            # sibling order: keep a longest increasing run of image positions
            for b in self.buggy.walk():
                if b.id not in self.b2f:
                    continue
                f = self.f_nodes[self.b2f[b.id]]
                pos_f = {c.id: k for k, c in enumerate(f.children)}
                mapped = [(k, pos_f[self.b2f[c.id]]) for k, c in enumerate(b.children)
                          if c.id in self.b2f and self.b2f[c.id] in pos_f]
                keep = self._lis(mapped)
                for k, c in enumerate(b.children):
                    if c.id in self.b2f and self.b2f[c.id] in pos_f and (k, pos_f[self.b2f[c.id]]) not in keep:
                        self.unmap(c.id)
                        changed = True
            if not changed:
                return

    @staticmethod
    def _lis(pairs: list[tuple[int, int]]) -> set[tuple[int, int]]:
        """Longest strictly-increasing subsequence in the second component."""
        if not pairs:
            return set()
        best_len = [1] * len(pairs)
        back: list[int | None] = [None] * len(pairs)
        for i in range(len(pairs)):
            for j in range(i):
                if pairs[j][1] < pairs[i][1] and best_len[j] + 1 > best_len[i]:
                    best_len[i] = best_len[j] + 1
                    back[i] = j
        end = max(range(len(pairs)), key=lambda i: best_len[i])
        keep = set()
        cur: int | None = end
        while cur is not None:
            keep.add(pairs[cur])
            cur = back[cur]
        return keep


def diff(buggy: AstNode, fixed: AstNode) -> Diff:
    matcher = _Matcher(buggy, fixed)
    matcher.run()
    return Diff(buggy=buggy, fixed=fixed, b2f=dict(matcher.b2f), f2b=dict(matcher.f2b))


# ---------------------------------------------------------------------------
# change summaries

def _display_label(node: AstNode) -> str:
    if node.kind in ast.STMT_KINDS:
        try:
            return render_stmt(node)
        except Exception:
            return node.label
    return node.label


def _subtree_changed(d: Diff, b_stmt: AstNode) -> bool:
    f_id = d.b2f.get(b_stmt.id)
    if f_id is None:
        return True
    return structural_key(b_stmt) != structural_key(d.f_nodes[f_id])


def changes(d: Diff) -> list[FixingChange]:
    out: list[FixingChange] = []
    for f in d.fixed.walk():
        if f.id not in d.f2b:
            out.append(FixingChange(INSERT, f.kind, _display_label(f)))
    for b in d.buggy.walk():
        if b.id not in d.b2f:
            out.append(FixingChange(DELETE, b.kind, _display_label(b)))
    for stmt in d.buggy.statements():
        if stmt.id in d.b2f and _subtree_changed(d, stmt):
            out.append(FixingChange(UPDATE, stmt.kind, _display_label(stmt)))
    return out


# ---------------------------------------------------------------------------
# edit script replay (soundness check for the matcher)

def replay(d: Diff) -> AstNode:
    """Applies the derived insert/delete/relabel script to a copy of the buggy
    tree and returns the result; equality with the fixed tree is the caller's
    soundness assertion."""
    relabels: list[tuple[int, str]] = []
    for b_id, f_id in d.b2f.items():
        b, f = d.b_nodes[b_id], d.f_nodes[f_id]
        if b.label != f.label:
            relabels.append((b_id, f.label))
    deletes = [b.id for b in d.buggy.walk()
               if b.id not in d.b2f
               and d.b_parents[b.id].id in d.b2f]
    inserts: list[tuple[int, int, AstNode]] = []
    for f in d.fixed.walk():
        if f.id not in d.f2b:
            continue
        b_id = d.f2b[f.id]
        position = 0
        for fc in f.children:
            if fc.id in d.f2b:
                position += 1
                continue
            inserts.append((b_id, position, fc))
            position += 1

    result = d.buggy.clone()
    nodes = ast.index_nodes(result)
    parents = ast.parent_map(result)
    for b_id, label in relabels:
        nodes[b_id].label = label
    for b_id in deletes:
        parent = parents[b_id]
        parent.children = [c for c in parent.children if c.id != b_id]
    next_id = max(nodes) + 1
    for parent_id, position, f_subtree in sorted(inserts, key=lambda t: (t[0], t[1])):
        copy = f_subtree.clone()
        next_id = ast.assign_ids(copy, next_id)
        parent = nodes[parent_id]
        parent.children.insert(min(position, len(parent.children)), copy)
    return result


# ---------------------------------------------------------------------------
# subtree pairing (rules 1-4)

@dataclass
class SubtreePair:
    """One buggy-statement-to-fixed-statement correspondence.

    buggy is None for pure insertions (EMPTY on the buggy side); fixed is None
    for deletions.  Anchors give the enclosing block and child index on each
    side so context builders can place placeholders.
    """
    buggy: Optional[AstNode]
    fixed: Optional[AstNode]
    buggy_parent_id: Optional[int] = None
    buggy_index: Optional[int] = None
    fixed_parent_id: Optional[int] = None
    fixed_index: Optional[int] = None

    @property
    def is_deletion(self) -> bool:
        return self.fixed is None

    @property
    def is_insertion(self) -> bool:
        return self.buggy is None


def _nearest_stmt_ancestor(node_id: int, parents: dict[int, AstNode]) -> Optional[AstNode]:
    cur = parents.get(node_id)
    while cur is not None:
        if cur.kind in ast.STMT_KINDS:
            return cur
        cur = parents.get(cur.id)
    return None


def _anchor(node: AstNode, parents: dict[int, AstNode]) -> tuple[Optional[int], Optional[int]]:
    parent = parents.get(node.id)
    if parent is None:
        return None, None
    for idx, child in enumerate(parent.children):
        if child.id == node.id:
            return parent.id, idx
    return parent.id, None


def pair_subtrees(d: Diff) -> list[SubtreePair]:
    """Rules: buggy S-subtrees are the updated or deleted statements, nested
    ones collapsed to the outermost; deletions pair with EMPTY; updates pair
    with the mapped fixed statement; inserted statements inside an existing
    pair ride along with it, while top-level inserted statements pair with
    EMPTY on the buggy side."""
    buggy_set: list[AstNode] = []
    for stmt in d.buggy.statements():
        if stmt.id not in d.b2f or _subtree_changed(d, stmt):
            buggy_set.append(stmt)
    chosen_ids = {s.id for s in buggy_set}
    outermost: list[AstNode] = []
    for stmt in buggy_set:
        anc = _nearest_stmt_ancestor(stmt.id, d.b_parents)
        nested = False
        while anc is not None:
            if anc.id in chosen_ids:
                nested = True
                break
            anc = _nearest_stmt_ancestor(anc.id, d.b_parents)
        if not nested:
            outermost.append(stmt)

    pairs: list[SubtreePair] = []
    for stmt in outermost:
        b_parent, b_idx = _anchor(stmt, d.b_parents)
        if stmt.id not in d.b2f:
            pairs.append(SubtreePair(buggy=stmt, fixed=None,
                                     buggy_parent_id=b_parent, buggy_index=b_idx))
            continue
        fixed = d.f_nodes[d.b2f[stmt.id]]
        f_parent, f_idx = _anchor(fixed, d.f_parents)
        pairs.append(SubtreePair(buggy=stmt, fixed=fixed,
                                 buggy_parent_id=b_parent, buggy_index=b_idx,
                                 fixed_parent_id=f_parent, fixed_index=f_idx))

    # rule 4: top-level inserted statements
    covered_fixed: set[int] = set()
    for pair in pairs:
        if pair.fixed is not None:
            covered_fixed.update(n.id for n in pair.fixed.walk())
    for stmt in d.fixed.statements():
        if stmt.id in d.f2b or stmt.id in covered_fixed:
            continue
        anc = _nearest_stmt_ancestor(stmt.id, d.f_parents)
        if anc is not None:
            continue  # nested insertion: carried by the ancestor's pair
        f_parent, f_idx = _anchor(stmt, d.f_parents)
        b_parent = b_idx = None
        parent_block = d.f_parents.get(stmt.id)
        if parent_block is not None and parent_block.id in d.f2b:
            b_parent = d.f2b[parent_block.id]
            block = d.b_nodes[b_parent]
            position = 0
            for sibling in parent_block.children:
                if sibling.id == stmt.id:
                    break
                if sibling.id in d.f2b:
                    image = d.f2b[sibling.id]
                    for k, c in enumerate(block.children):
                        if c.id == image:
                            position = k + 1
            b_idx = position
        pairs.append(SubtreePair(buggy=None, fixed=stmt,
                                 buggy_parent_id=b_parent, buggy_index=b_idx,
                                 fixed_parent_id=f_parent, fixed_index=f_idx))
    return pairs


# ---------------------------------------------------------------------------
# hunks of directly-changed statements and bug types

def _direct_changed_statements(d: Diff) -> list[AstNode]:
    atoms: list[int] = []
    for b in d.buggy.walk():
        if b.id not in d.b2f:
            atoms.append(b.id)
        elif d.f_nodes[d.b2f[b.id]].label != b.label:
            atoms.append(b.id)
    hit: set[int] = set()
    for node_id in atoms:
        node = d.b_nodes[node_id]
        stmt = node if node.kind in ast.STMT_KINDS else _nearest_stmt_ancestor(node_id, d.b_parents)
        if stmt is not None:
            hit.add(stmt.id)
    ordered = [s for s in d.buggy.statements() if s.id in hit]
    ordered.sort(key=lambda s: (s.span[0], s.span[1]))
    return ordered


def changed_statement_hunks(d: Diff) -> list[list[AstNode]]:
    """Directly-changed buggy statements grouped into source-order hunks.

    Two changed statements of one method share a hunk when no other statement
    starts between them in the source; that matches diff-style minus-line
    adjacency even across block boundaries."""
    changed = _direct_changed_statements(d)
    by_method: dict[int, list[AstNode]] = {}
    method_of: dict[int, int] = {}
    for m in ast.methods(d.buggy):
        for s in m.statements():
            method_of[s.id] = m.id
    for stmt in changed:
        by_method.setdefault(method_of.get(stmt.id, -1), []).append(stmt)

    hunks: list[list[AstNode]] = []
    for m in ast.methods(d.buggy):
        stmts = by_method.get(m.id)
        if not stmts:
            continue
        all_starts = sorted((s.span[0], s.span[1], s.id) for s in m.statements())
        current = [stmts[0]]
        for prev, nxt in zip(stmts, stmts[1:]):
            lo = (prev.span[0], prev.span[1])
            hi = (nxt.span[0], nxt.span[1])
            between = [sid for line, col, sid in all_starts
                       if lo < (line, col) < hi and sid not in (prev.id, nxt.id)
                       and sid not in {s.id for s in changed}]
            if between:
                hunks.append(current)
                current = [nxt]
            else:
                current.append(nxt)
        hunks.append(current)
    return hunks


def classify_bug_type(stmt_counts: Sequence[int]) -> BugType:
    """Definition: one hunk with one statement is Type 1; one hunk with more
    is Type 2; several hunks of one statement each is Type 3; several hunks
    all multi-statement is Type 4; several hunks mixed is Type 5."""
    counts = [int(c) for c in stmt_counts]
    if not counts or any(c < 1 for c in counts):
        raise ValueError("hunk sizes must be positive")
    if len(counts) == 1:
        return BugType.TYPE1 if counts[0] == 1 else BugType.TYPE2
    if all(c == 1 for c in counts):
        return BugType.TYPE3
    if all(c > 1 for c in counts):
        return BugType.TYPE4
    return BugType.TYPE5


def bug_type_of_diff(d: Diff) -> tuple[list[list[AstNode]], BugType]:
    hunks = changed_statement_hunks(d)
    return hunks, classify_bug_type([len(h) for h in hunks])
