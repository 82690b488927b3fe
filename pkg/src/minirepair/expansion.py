"""Expanding a seed statement into a multi-statement repair hunk.

A sliding sibling window (N statements each side, clipped at the block edges)
is walked outward from the seed; a neighbor joins the hunk when a recurrent
buggy-statement classifier flags it or when it has a direct data dependency on
the seed, and the walk stops per direction at the first excluded neighbor, so
the result is always a contiguous run containing the seed.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .embed import EmbeddingTable, source_tokens
from .lang import ast
from .lang.ast import AstNode
from .nn import Adam, GruCell, Tensor, bce, concat, matmul, scale, sigmoid, stack_rows
from .nn.checkpoint import load_checkpoint, save_checkpoint

WINDOW = 5


class BuggyStatementClassifier:
    """Bidirectional GRU over a statement sequence emitting per-step buggy
    probabilities.

    The forward pass consumes each statement's mean-pooled token embedding
    joined with the previous step's output, so earlier decisions carry
    forward; the backward pass reads the plain embeddings right to left.
    Both directions matter: a wrong-variable statement looks anomalous in
    itself, but the statement it should have referenced only becomes
    suspicious once nothing downstream uses its definition.  A probability
    of at least 0.5 means buggy; with all-zero parameters every statement
    scores exactly 0.5 and counts buggy.
    """

    def __init__(self, table: EmbeddingTable, hidden: int = 32, seed: int = 31):
        self.table = table
        self.hidden = hidden
        rng = np.random.default_rng(seed)
        self.cell = GruCell(table.dims + 1, hidden, rng, prefix="blc.gru")
        self.back = GruCell(table.dims, hidden, rng, prefix="blc.rgru")
        self.params = dict(self.cell.params)
        self.params.update(self.back.params)
        self.params["blc.Wo"] = Tensor(np.zeros((hidden, 1), dtype=np.float32), requires_grad=True)
        self.params["blc.Wr"] = Tensor(np.zeros((hidden, 1), dtype=np.float32), requires_grad=True)
        self.params["blc.bo"] = Tensor(np.zeros((1, 1), dtype=np.float32), requires_grad=True)

    def _inputs(self, token_seqs: Sequence[Sequence[str]]) -> list[np.ndarray]:
        return [self.table.mean_pool(toks) for toks in token_seqs]

    def forward(self, token_seqs: Sequence[Sequence[str]]) -> list[Tensor]:
        pooled = self._inputs(token_seqs)
        hb = self.back.initial_state()
        backward: list[Tensor] = []
        for vec in reversed(pooled):
            hb = self.back.step(Tensor(vec[None, :], requires_grad=False), hb)
            backward.append(hb)
        backward.reverse()
        h = self.cell.initial_state()
        prev = Tensor(np.zeros((1, 1), dtype=np.float32), requires_grad=False)
        outputs: list[Tensor] = []
        for vec, hb in zip(pooled, backward):
            x = concat([Tensor(vec[None, :], requires_grad=False), prev], axis=1)
            h = self.cell.step(x, h)
            out = sigmoid(matmul(h, self.params["blc.Wo"])
                          + matmul(hb, self.params["blc.Wr"])
                          + self.params["blc.bo"])
            outputs.append(out)
            prev = out
        return outputs

    def probabilities(self, statements: Sequence[AstNode]) -> list[float]:
        outs = self.forward([source_tokens(s) for s in statements])
        return [float(o.data[0, 0]) for o in outs]

    def flags(self, statements: Sequence[AstNode]) -> list[bool]:
        return [p >= 0.5 for p in self.probabilities(statements)]

    def save(self, stem) -> None:
        save_checkpoint(stem, self.params, {"hidden": self.hidden, "dims": self.table.dims})

    @classmethod
    def load(cls, stem, table: EmbeddingTable) -> "BuggyStatementClassifier":
        params, hyper = load_checkpoint(stem)
        model = cls(table, hidden=int(hyper["hidden"]))
        for name, tensor in params.items():
            model.params[name].data[...] = tensor.data
        return model


def train_classifier(model: BuggyStatementClassifier,
                     sequences: Sequence[tuple[Sequence[Sequence[str]], Sequence[int]]],
                     epochs: int = 90, lr: float = 1e-2, seed: int = 0,
                     pos_weight: float = 3.0) -> list[float]:
    """Per-sequence BCE over all steps; sequences are (token lists, 0/1 labels).

    Buggy statements are a small minority of each sequence, so their rows get
    an extra weighted BCE term; otherwise the optimum drifts toward scoring
    everything clean.
    """
    rng = np.random.default_rng(seed)
    opt = Adam(model.params, lr=lr)
    losses = []
    data = [(seqs, labels) for seqs, labels in sequences if seqs]
    for _ in range(epochs):
        order = rng.permutation(len(data))
        total = 0.0
        for idx in order:
            seqs, labels = data[idx]
            opt.zero_grad()
            outs = model.forward(seqs)
            pred = stack_rows(outs)
            target = Tensor(np.asarray(labels, dtype=np.float32)[:, None], requires_grad=False)
            loss = bce(pred, target)
            pos = [o for o, y in zip(outs, labels) if y]
            if pos:
                ones = Tensor(np.ones((len(pos), 1), dtype=np.float32), requires_grad=False)
                loss = loss + scale(bce(stack_rows(pos), ones), pos_weight)
            loss.backward()
            opt.step()
            total += float(loss.data)
        losses.append(total / max(len(data), 1))
    return losses


def expand(seed: AstNode,
           method: AstNode,
           buggy_flag: Callable[[AstNode], bool],
           dependent: Callable[[AstNode, AstNode], bool],
           window: int = WINDOW) -> list[AstNode]:
    """Contiguous sibling run around the seed, at most `window` each side.

    A compound statement (if/while) is a single candidate.  Walking outward,
    a sibling is kept when buggy_flag(sibling) or dependent(sibling, seed);
    the first rejected sibling ends that direction.
    """
    parents = ast.parent_map(method)
    block = parents.get(seed.id)
    if block is None or block.kind != ast.BLOCK:
        return [seed]
    siblings = block.children
    pos = next(i for i, s in enumerate(siblings) if s.id == seed.id)
    lo = hi = pos
    for k in range(1, window + 1):
        idx = pos - k
        if idx < 0:
            break
        cand = siblings[idx]
        if buggy_flag(cand) or dependent(cand, seed):
            lo = idx
        else:
            break
    for k in range(1, window + 1):
        idx = pos + k
        if idx >= len(siblings):
            break
        cand = siblings[idx]
        if buggy_flag(cand) or dependent(cand, seed):
            hi = idx
        else:
            break
    return siblings[lo:hi + 1]


def expand_with_models(seed: AstNode,
                       method: AstNode,
                       classifier: Optional[BuggyStatementClassifier],
                       dependent: Callable[[AstNode, AstNode], bool],
                       window: int = WINDOW) -> list[AstNode]:
    """expand() with classifier flags precomputed over the seed's block."""
    parents = ast.parent_map(method)
    block = parents.get(seed.id)
    if block is None or block.kind != ast.BLOCK:
        return [seed]
    if classifier is None:
        flags = {}
    else:
        flags = dict(zip((s.id for s in block.children),
                         classifier.flags(block.children)))
    return expand(seed, method, lambda s: flags.get(s.id, False), dependent, window)
