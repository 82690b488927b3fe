"""Mining: turns a seeded corpus into training artifacts.

Per bug, the before/after programs are diffed; the changed methods are
alpha-renamed consistently (after reuses the before name assignments) and the
derived artifacts are written:

  pairs.jsonl       {bugId, buggySubtree, fixedSubtree, methodBefore, methodAfter}
  hunksets.json     per bug, source-order hunks of changed statements as token lists
  classifier.jsonl  per block, statement token sequences with buggy/clean labels
  sentences.txt     embedding sentences, one per line, space-joined tokens
"""

from __future__ import annotations

import json
from pathlib import Path

from ..diffpair import changed_statement_hunks, diff, pair_subtrees
from ..embed import alpha_rename, embedding_sentences, forward_mapping, source_tokens
from ..lang import ast, parse
from .store import LoadedBug, load_corpus


def _node_or_none(nodes: dict, node) -> dict | None:
    if node is None:
        return None
    return nodes[node.id].to_dict()


def mine_bug(bug: LoadedBug) -> dict:
    before = parse(bug.before_src)
    after = parse(bug.after_src)
    d = diff(before, after)
    pairs = pair_subtrees(d)
    hunks = changed_statement_hunks(d)

    renamed: dict[int, tuple] = {}

    def renamed_pair(m_b_id: int):
        if m_b_id not in renamed:
            m_b = d.b_nodes[m_b_id]
            m_f = d.f_nodes[d.b2f[m_b_id]]
            rb, rev_b = alpha_rename(m_b)
            ra, _ = alpha_rename(m_f, seed_names=forward_mapping(rev_b))
            renamed[m_b_id] = (rb, ast.index_nodes(rb), ra, ast.index_nodes(ra))
        return renamed[m_b_id]

    def method_of_pair(pair):
        if pair.buggy is not None:
            m = ast.enclosing_method(before, pair.buggy.id)
        else:
            m = ast.enclosing_method(before, pair.buggy_parent_id)
        return m

    rows = []
    for pair in pairs:
        method_b = method_of_pair(pair)
        if method_b is None or method_b.id not in d.b2f:
            continue
        rb, rb_nodes, ra, ra_nodes = renamed_pair(method_b.id)
        rows.append({
            "bugId": bug.bug_id,
            "buggySubtree": _node_or_none(rb_nodes, pair.buggy),
            "fixedSubtree": _node_or_none(ra_nodes, pair.fixed),
            "methodBefore": rb.to_dict(),
            "methodAfter": ra.to_dict(),
        })

    hunk_rows = []
    changed_ids = set()
    for hunk in hunks:
        token_lists = []
        for stmt in hunk:
            changed_ids.add(stmt.id)
            method_b = ast.enclosing_method(before, stmt.id)
            if method_b is None or method_b.id not in d.b2f:
                token_lists.append(source_tokens(stmt))
                continue
            _, rb_nodes, _, _ = renamed_pair(method_b.id)
            token_lists.append(source_tokens(rb_nodes[stmt.id]))
        hunk_rows.append(token_lists)

    classifier_rows = []
    sentences: list[list[str]] = []
    for method_b_id in {m.id for m in ast.methods(before)
                        if any(s.id in changed_ids for s in m.statements())}:
        rb, rb_nodes, ra, _ = renamed_pair(method_b_id)
        sentences.extend(embedding_sentences(rb))
        sentences.extend(embedding_sentences(ra))
        for block in (n for n in rb.walk() if n.kind == ast.BLOCK):
            stmts = block.children
            if not stmts:
                continue
            classifier_rows.append({
                "bugId": bug.bug_id,
                "sequence": [source_tokens(s) for s in stmts],
                "labels": [1 if s.id in changed_ids else 0 for s in stmts],
            })

    return {"pairs": rows,
            "hunkset": {"bugId": bug.bug_id, "hunks": hunk_rows},
            "classifier": classifier_rows,
            "sentences": sentences}


def mine_corpus(corpus_root: Path, out_dir: Path) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bugs = load_corpus(corpus_root)
    all_pairs, all_hunksets, all_classifier, all_sentences = [], [], [], []
    for bug in bugs:
        mined = mine_bug(bug)
        all_pairs.extend(mined["pairs"])
        all_hunksets.append(mined["hunkset"])
        all_classifier.extend(mined["classifier"])
        all_sentences.extend(mined["sentences"])
    with open(out_dir / "pairs.jsonl", "w") as fh:
        for row in all_pairs:
            fh.write(json.dumps(row) + "\n")
    with open(out_dir / "hunksets.json", "w") as fh:
        json.dump(all_hunksets, fh, indent=1)
        fh.write("\n")
    with open(out_dir / "classifier.jsonl", "w") as fh:
        for row in all_classifier:
            fh.write(json.dumps(row) + "\n")
    with open(out_dir / "sentences.txt", "w") as fh:
        for sent in all_sentences:
            fh.write(" ".join(sent) + "\n")
    return {"bugs": len(bugs), "pairs": len(all_pairs),
            "hunksets": len(all_hunksets), "classifierRows": len(all_classifier),
            "sentences": len(all_sentences)}
