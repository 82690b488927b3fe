"""Suspicious-statement hunks, the fixing-together pair scorer, and grouping.

A hunk is a maximal run of consecutive sibling statements (same block, adjacent
child positions) drawn from the suspicious set.  Hunks that tend to be fixed
together are grouped by thresholding a learned pair score and taking connected
components; groups are ranked by their most suspicious statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .embed import EmbeddingTable, source_tokens
from .lang import ast
from .lang.ast import AstNode
from .nn import (Adam, Tensor, bce, concat, matmul, parameter, sigmoid,
                 tanh, zeros)
from .nn.checkpoint import load_checkpoint, save_checkpoint

GROUP_THRESHOLD = 0.5


@dataclass
class Hunk:
    statements: list[AstNode]   # consecutive siblings, source order
    block_id: int
    method_id: int

    @property
    def stmt_ids(self) -> list[int]:
        return [s.id for s in self.statements]

    def suspiciousness(self, score_of: Callable[[int], float]) -> float:
        return max(score_of(s.id) for s in self.statements)


@dataclass
class HunkGroup:
    hunks: list[Hunk]
    suspiciousness: float

    @property
    def stmt_ids(self) -> list[int]:
        out = []
        for h in self.hunks:
            out.extend(h.stmt_ids)
        return out


def form_hunks(program: AstNode, suspicious_ids: set[int]) -> list[Hunk]:
    methods = {}
    for m in ast.methods(program):
        for n in m.walk():
            methods[n.id] = m.id
    hunks: list[Hunk] = []
    for node in program.walk():
        if node.kind != ast.BLOCK:
            continue
        run: list[AstNode] = []
        for child in node.children:
            if child.id in suspicious_ids:
                run.append(child)
            elif run:
                hunks.append(Hunk(run, node.id, methods[node.id]))
                run = []
        if run:
            hunks.append(Hunk(run, node.id, methods[node.id]))
    hunks.sort(key=lambda h: h.statements[0].id)
    return hunks


class PairScorer:
    """Scores how likely two statements are part of one fix.

    Twin mean-pooled embedding encoders feed a single tanh hidden layer and a
    sigmoid output; inference averages both argument orders so the score is
    symmetric."""

    def __init__(self, table: EmbeddingTable, hidden: int = 32, seed: int = 23):
        self.table = table
        self.hidden = hidden
        rng = np.random.default_rng(seed)
        d = table.dims
        self.params = {
            "pair.W1": parameter((2 * d, hidden), rng),
            "pair.b1": Tensor(np.zeros((1, hidden), dtype=np.float32), requires_grad=True),
            "pair.W2": parameter((hidden, 1), rng),
            "pair.b2": Tensor(np.zeros((1, 1), dtype=np.float32), requires_grad=True),
        }

    def _pool(self, tokens: Sequence[str]) -> Tensor:
        return Tensor(self.table.mean_pool(tokens)[None, :], requires_grad=False)

    def forward(self, tokens_a: Sequence[str], tokens_b: Sequence[str]) -> Tensor:
        x = concat([self._pool(tokens_a), self._pool(tokens_b)], axis=1)
        h = tanh(matmul(x, self.params["pair.W1"]) + self.params["pair.b1"])
        return sigmoid(matmul(h, self.params["pair.W2"]) + self.params["pair.b2"])

    def score(self, tokens_a: Sequence[str], tokens_b: Sequence[str]) -> float:
        ab = float(self.forward(tokens_a, tokens_b).data[0, 0])
        ba = float(self.forward(tokens_b, tokens_a).data[0, 0])
        return 0.5 * (ab + ba)

    def save(self, stem) -> None:
        save_checkpoint(stem, self.params, {"hidden": self.hidden, "dims": self.table.dims})

    @classmethod
    def load(cls, stem, table: EmbeddingTable) -> "PairScorer":
        params, hyper = load_checkpoint(stem)
        scorer = cls(table, hidden=int(hyper["hidden"]))
        for name, tensor in params.items():
            scorer.params[name].data[...] = tensor.data
        return scorer


def train_pair_scorer(scorer: PairScorer,
                      examples: Sequence[tuple[Sequence[str], Sequence[str], int]],
                      epochs: int = 150, lr: float = 1e-2, seed: int = 0) -> list[float]:
    """Full-batch BCE training; examples are (tokens_a, tokens_b, label)."""
    if not examples:
        return []
    d = scorer.table.dims
    xs = np.zeros((len(examples), 2 * d), dtype=np.float32)
    ys = np.zeros((len(examples), 1), dtype=np.float32)
    for i, (ta, tb, label) in enumerate(examples):
        xs[i, :d] = scorer.table.mean_pool(ta)
        xs[i, d:] = scorer.table.mean_pool(tb)
        ys[i, 0] = float(label)
    x = Tensor(xs, requires_grad=False)
    y = Tensor(ys, requires_grad=False)
    opt = Adam(scorer.params, lr=lr)
    losses = []
    for _ in range(epochs):
        opt.zero_grad()
        h = tanh(matmul(x, scorer.params["pair.W1"]) + scorer.params["pair.b1"])
        pred = sigmoid(matmul(h, scorer.params["pair.W2"]) + scorer.params["pair.b2"])
        loss = bce(pred, y)
        loss.backward()
        opt.step()
        losses.append(float(loss.data))
    return losses


def hunk_pair_score(scorer: PairScorer, a: Hunk, b: Hunk,
                    focus: Optional[Callable[[Hunk], list[AstNode]]] = None
                    ) -> float:
    """Mean of the symmetric scores over all cross statement pairs.

    `focus` restricts each hunk to the statements worth comparing; the scorer
    was trained on changed statements only, so scoring every clean statement
    of a wide hunk dilutes the mean."""
    sel_a = (focus(a) if focus else None) or a.statements
    sel_b = (focus(b) if focus else None) or b.statements
    total = 0.0
    count = 0
    for sa in sel_a:
        for sb in sel_b:
            total += scorer.score(source_tokens(sa), source_tokens(sb))
            count += 1
    return total / count


def group_hunks(hunks: Sequence[Hunk],
                score_of: Callable[[int], float],
                scorer: Optional[PairScorer] = None,
                threshold: float = GROUP_THRESHOLD,
                focus: Optional[Callable[[Hunk], list[AstNode]]] = None
                ) -> list[HunkGroup]:
    """Connected components over hunk pairs whose score clears the threshold.

    Without a scorer each hunk forms its own group (the detection-off
    ablation).  Groups are ordered by best statement suspiciousness, ties by
    smallest statement id."""
    n = len(hunks)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if scorer is not None:
        for i in range(n):
            for j in range(i + 1, n):
                if hunk_pair_score(scorer, hunks[i], hunks[j], focus) >= threshold:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[rj] = ri
    buckets: dict[int, list[Hunk]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(hunks[i])
    groups = []
    for members in buckets.values():
        members.sort(key=lambda h: h.statements[0].id)
        susp = max(h.suspiciousness(score_of) for h in members)
        groups.append(HunkGroup(members, susp))
    groups.sort(key=lambda g: (-g.suspiciousness, min(g.stmt_ids)))
    return groups
