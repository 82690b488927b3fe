"""Subtree summarization: a whole subtree squeezed into one d-vector.

The default summarizer is a Child-Sum Tree-LSTM encoder pass whose root
hidden state is the summary.  Its weights are drawn once from a seeded
generator and then frozen; the prediction models are trained against these
fixed summaries, and checkpoints make them reproducible across processes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol

import numpy as np

from ..lang.ast import AstNode
from ..nn import ChildSumTreeLstmCell, Tensor, load_checkpoint, save_checkpoint, tree_lstm_encode
from .glove import EmbeddingTable
from .tokens import kind_token, node_token


def encoder_input(node: AstNode, table: EmbeddingTable) -> np.ndarray:
    """Node input vector: mean of the kind stand-in and node token embeddings."""
    kt = kind_token(node)
    nt = node_token(node)
    if kt == nt:
        return table.lookup(nt).astype(np.float32)
    return ((table.lookup(kt) + table.lookup(nt)) * 0.5).astype(np.float32)


class TreeSummarizer(Protocol):
    def summarize(self, root: AstNode,
                  overrides: dict[int, np.ndarray] | None = None) -> np.ndarray:
        """Deterministic d-vector for a subtree; overrides replace the input
        vectors of specific node ids (summarized placeholders)."""
        ...


class TreeLstmSummarizer:
    def __init__(self, table: EmbeddingTable, seed: int = 17):
        self.table = table
        dims = table.dims
        rng = np.random.default_rng(seed)
        self.cell = ChildSumTreeLstmCell(dims, dims, rng, prefix="summarizer")
        for p in self.cell.params.values():
            p.requires_grad = False
        self.seed = seed

    @property
    def dims(self) -> int:
        return self.table.dims

    def node_inputs(self, root: AstNode,
                    overrides: dict[int, np.ndarray] | None = None) -> dict[int, Tensor]:
        inputs: dict[int, Tensor] = {}
        for node in root.walk():
            if overrides and node.id in overrides:
                vec = np.asarray(overrides[node.id], dtype=np.float32)
            else:
                vec = encoder_input(node, self.table)
            inputs[node.id] = Tensor(vec.reshape(1, -1))
        return inputs

    def summarize(self, root: AstNode,
                  overrides: dict[int, np.ndarray] | None = None) -> np.ndarray:
        states = tree_lstm_encode(root, self.node_inputs(root, overrides), self.cell)
        return states[root.id][0].data.reshape(-1).astype(np.float32)

    def save(self, stem: Path) -> None:
        save_checkpoint(stem, self.cell.params,
                        {"kind": "summarizer", "dims": self.dims, "seed": self.seed})

    def load_params(self, stem: Path) -> None:
        params, _ = load_checkpoint(stem)
        for name, tensor in params.items():
            self.cell.params[name].data = tensor.data.astype(np.float32)
