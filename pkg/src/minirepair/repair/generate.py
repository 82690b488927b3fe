"""Beam-search candidate generation.

Each repair target contributes a greedily decoded skeleton whose per-node
vectors are un-weighted with the predicted output context and matched against
admissible tokens by cosine similarity; a global beam over all (subtree, node)
positions composes the per-node top-k choices, ranked by the similarity sum.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..embed import EmbeddingTable, encoder_input
from ..embed.tokens import LABELED_KINDS
from ..lang import ast
from ..lang.ast import AstNode
from .context import ContextTree
from .models import DecodedNode, RepairModels, empty_node
from .weighting import unweight

BEAM_WIDTH = 100
TOP_TOKENS = 5

_OPERATORS = ["+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"]
_UNARY = ["!", "-"]
_BOOLS = ["true", "false"]
_PLACEHOLDER = re.compile(r"VAR_\d+$")


def token_pools(table: EmbeddingTable, callables: Sequence[str]) -> dict[str, list[str]]:
    """Admissible label tokens per node kind, limited to embedded tokens."""
    tokens = set(table.tokens)
    idents = sorted(t for t in tokens if _PLACEHOLDER.match(t))
    calls = sorted(t for t in callables if t in tokens)
    ints = sorted((t for t in tokens if t.isdigit()), key=lambda t: (len(t), t))
    strs = sorted(t for t in tokens if t.startswith('"'))
    return {
        ast.BIN_OP: [t for t in _OPERATORS if t in tokens],
        ast.UNARY_OP: [t for t in _UNARY if t in tokens],
        ast.BOOL_LIT: [t for t in _BOOLS if t in tokens],
        ast.INT_LIT: ints,
        ast.VAR: idents,
        ast.VAR_DECL: idents,
        ast.ASSIGN: idents,
        ast.CALL: calls,
        ast.STR_LIT: strs,
    }


def _virtual_vec(table: EmbeddingTable, kind: str, token: str) -> np.ndarray:
    return encoder_input(AstNode(0, kind, token, [], (0, 0, 0, 0)), table)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    return float(a @ b) / (na * nb + 1e-12)


def token_candidates(table: EmbeddingTable, kind: str, vec: np.ndarray,
                     pools: dict[str, list[str]], k: int = TOP_TOKENS
                     ) -> list[tuple[str, float]]:
    """Cosine ranking of pool tokens against an un-weighted node vector."""
    pool = pools.get(kind, [])
    if not pool:
        return [("", 0.0)]
    scored = [(tok, _cosine(vec, _virtual_vec(table, kind, tok))) for tok in pool]
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return scored[:k]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def _token_options(node: DecodedNode, copy_label: Optional[str],
                   pools: dict[str, list[str]], tok_index: dict[str, int],
                   k: int) -> list[tuple[str, float]]:
    """Pool tokens ranked by the decoder's token head; the aligned buggy
    token is always kept as a candidate so clean statements can reconstruct."""
    pool = pools.get(node.kind, [])
    if not pool or node.tok_logits is None:
        return [("", 0.0)]
    idx = [tok_index[t] for t in pool]
    logp = _log_softmax(node.tok_logits[idx])
    scored = sorted(zip(pool, logp.tolist()), key=lambda ts: (-ts[1], ts[0]))
    top = scored[:k]
    if copy_label is not None and copy_label in tok_index and copy_label in pool:
        if all(tok != copy_label for tok, _ in top):
            copy_score = float(logp[pool.index(copy_label)])
            top = top[:k - 1] + [(copy_label, copy_score)]
    return top


def _aligned_labels(skeleton: DecodedNode, buggy: AstNode) -> dict[int, str]:
    """Positional label alignment when the decoded shape matches the buggy
    subtree exactly; keys are preorder positions of labeled nodes."""
    dec_nodes = list(skeleton.walk())
    bug_nodes = list(buggy.walk())
    if [n.kind for n in dec_nodes] != [n.kind for n in bug_nodes]:
        return {}
    return {i: b.label for i, (d, b) in enumerate(zip(dec_nodes, bug_nodes))
            if d.kind in LABELED_KINDS}


@dataclass
class TargetPlan:
    """One repair position: the (renamed) buggy statement and its context."""
    stmt_id: Optional[int]            # id within the renamed method; None = insertion
    buggy: AstNode                    # statement subtree, or an Empty node
    context: ContextTree
    block_id: Optional[int] = None    # insertion anchor
    index: Optional[int] = None


@dataclass
class Edit:
    stmt_id: Optional[int]
    subtree: Optional[AstNode]        # None deletes the statement
    block_id: Optional[int] = None
    index: Optional[int] = None


@dataclass
class CandidatePatch:
    edits: list[Edit]
    score_sum: float
    tokens: list[str] = field(default_factory=list)
    rank: int = 0


def _materialize(decoded: DecodedNode, choices: list[str]) -> AstNode:
    it = iter(choices)

    def build(node: DecodedNode) -> AstNode:
        label = next(it) if node.kind in LABELED_KINDS else ""
        return AstNode(0, node.kind, label, [build(c) for c in node.children],
                       (0, 0, 0, 0))

    return build(decoded)


def decode_statement(models: RepairModels, plan: TargetPlan
                     ) -> tuple[Optional[DecodedNode], np.ndarray]:
    """Greedy skeleton for one target plus the predicted output-context vector."""
    v_in = models.summarizer.summarize(plan.buggy)
    v_prime = models.ctl_forward.apply(plan.context, v_in)
    skeleton = models.ttl.decode(plan.buggy, v_prime,
                                 root_kinds={plan.buggy.kind})
    return skeleton, v_prime


def greedy_fix(models: RepairModels, plan: TargetPlan,
               callables: Sequence[str] = ()) -> Optional[AstNode]:
    """Top-1 materialized fix for a single target; None for deletions and
    undecodable skeletons.  Used to refresh contexts between targets."""
    pools = token_pools(models.table, callables)
    skeleton, v_prime = decode_statement(models, plan)
    if skeleton is None or skeleton.kind == "Empty":
        return None
    aligned = _aligned_labels(skeleton, plan.buggy)
    choices = []
    for pos, node in enumerate(skeleton.walk()):
        node.vec = unweight(node.vec, v_prime, models.ttl.weight_mode)
        if node.kind in LABELED_KINDS:
            choices.append(_token_options(node, aligned.get(pos), pools,
                                          models.ttl.tok_index, 1)[0][0])
    return _materialize(skeleton, choices)


def generate_candidates(models: RepairModels, targets: Sequence[TargetPlan],
                        callables: Sequence[str] = (),
                        beam_width: int = BEAM_WIDTH,
                        top_tokens: int = TOP_TOKENS) -> list[CandidatePatch]:
    pools = token_pools(models.table, callables)
    decoded: list[tuple[TargetPlan, Optional[DecodedNode]]] = []
    positions: list[list[tuple[str, float]]] = []
    position_meta: list[int] = []   # which decoded target each position belongs to

    for t_idx, plan in enumerate(targets):
        skeleton, v_prime = decode_statement(models, plan)
        decoded.append((plan, skeleton))
        if skeleton is None:
            continue
        aligned = _aligned_labels(skeleton, plan.buggy)
        for pos, node in enumerate(skeleton.walk()):
            node.vec = unweight(node.vec, v_prime, models.ttl.weight_mode)
            if node.kind in LABELED_KINDS:
                positions.append(_token_options(node, aligned.get(pos), pools,
                                                models.ttl.tok_index, top_tokens))
                position_meta.append(t_idx)

    beam: list[tuple[float, list[str]]] = [(0.0, [])]
    for options in positions:
        grown = [(score + sim, chosen + [tok])
                 for score, chosen in beam
                 for tok, sim in options]
        grown.sort(key=lambda sc: (-sc[0], sc[1]))
        beam = grown[:beam_width]

    patches: list[CandidatePatch] = []
    for rank, (score, chosen) in enumerate(beam):
        cursor = 0
        edits: list[Edit] = []
        ok = True
        for t_idx, (plan, skeleton) in enumerate(decoded):
            n_here = sum(1 for p, m in zip(positions, position_meta) if m == t_idx)
            slice_ = chosen[cursor:cursor + n_here]
            cursor += n_here
            if skeleton is None:
                continue  # undecodable target: leave the statement untouched
            if skeleton.kind == "Empty":
                if plan.stmt_id is None:
                    ok = False  # inserting nothing is not an edit
                    break
                edits.append(Edit(plan.stmt_id, None))
                continue
            subtree = _materialize(skeleton, slice_)
            edits.append(Edit(plan.stmt_id, subtree,
                              block_id=plan.block_id, index=plan.index))
        if not ok or not edits:
            continue
        patches.append(CandidatePatch(edits=edits, score_sum=score,
                                      tokens=chosen, rank=rank))
    return patches
