"""GloVe-style token embeddings trained with AdaGrad.

Objective: sum over nonzero co-occurrence cells of
    f(X_ij) * (w_i . wt_j + b_i + bt_j - ln X_ij)^2
with f(x) = min(1, (x / x_max) ** alpha).  Counting is symmetric within the
window with the standard 1/distance increments; the served vector of a token
is w + wt.  The reserved <UNK> row is the mean of all trained vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

UNK = "<UNK>"


@dataclass
class EmbeddingTable:
    tokens: list[str]
    matrix: np.ndarray  # (vocab, dims) float32

    def __post_init__(self):
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    @property
    def dims(self) -> int:
        return int(self.matrix.shape[1])

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def lookup(self, token: str) -> np.ndarray:
        idx = self.index.get(token)
        if idx is None:
            idx = self.index[UNK]
        return self.matrix[idx]

    def mean_pool(self, tokens: list[str]) -> np.ndarray:
        if not tokens:
            return self.matrix[self.index[UNK]].copy()
        rows = [self.lookup(t) for t in tokens]
        return np.mean(rows, axis=0)

    def save(self, path: Path) -> None:
        lines = [f"{self.dims} {len(self.tokens)}"]
        for tok, row in zip(self.tokens, self.matrix):
            lines.append(tok + " " + " ".join(f"{v:.6f}" for v in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @staticmethod
    def load(path: Path) -> "EmbeddingTable":
        text = Path(path).read_text(encoding="utf-8").strip().split("\n")
        dims, vocab = (int(x) for x in text[0].split())
        if len(text) - 1 != vocab:
            raise ValueError(f"{path}: header says {vocab} tokens, file has {len(text) - 1}")
        tokens, rows = [], []
        for line in text[1:]:
            parts = line.rstrip().split(" ")
            if len(parts) != dims + 1:
                raise ValueError(f"{path}: bad row width for token {parts[0]!r}")
            tokens.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
        return EmbeddingTable(tokens, np.asarray(rows, dtype=np.float32))


def weighting(x: float, x_max: float, alpha: float) -> float:
    """f(0) = 0; saturates at 1 once x reaches x_max."""
    if x <= 0.0:
        return 0.0
    return min(1.0, (x / x_max) ** alpha)


def cooccurrence(sentences: list[list[str]], window: int = 8) -> tuple[list[str], dict[tuple[int, int], float]]:
    vocab: dict[str, int] = {}
    for sentence in sentences:
        for tok in sentence:
            if tok not in vocab:
                vocab[tok] = len(vocab)
    counts: dict[tuple[int, int], float] = {}
    for sentence in sentences:
        ids = [vocab[t] for t in sentence]
        for i, center in enumerate(ids):
            for offset in range(1, window + 1):
                j = i + offset
                if j >= len(ids):
                    break
                other = ids[j]
                increment = 1.0 / offset
                counts[(center, other)] = counts.get((center, other), 0.0) + increment
                counts[(other, center)] = counts.get((other, center), 0.0) + increment
    return list(vocab), counts


def train_glove(sentences: list[list[str]], dims: int = 64, window: int = 8,
                epochs: int = 30, x_max: float = 100.0, alpha: float = 0.75,
                lr: float = 0.05, seed: int = 0) -> EmbeddingTable:
    tokens, counts = cooccurrence(sentences, window)
    rng = np.random.default_rng(seed)
    v = len(tokens)
    w = rng.uniform(-0.5, 0.5, size=(v, dims)) / dims
    wt = rng.uniform(-0.5, 0.5, size=(v, dims)) / dims
    b = np.zeros(v)
    bt = np.zeros(v)
    gw = np.ones_like(w)
    gwt = np.ones_like(wt)
    gb = np.ones_like(b)
    gbt = np.ones_like(bt)

    cells = sorted(counts.items())
    pair_idx = np.array([key for key, _ in cells], dtype=np.int64)
    xs = np.array([val for _, val in cells])
    fs = np.minimum(1.0, (xs / x_max) ** alpha)
    logs = np.log(xs)

    order = np.arange(len(cells))
    for _ in range(epochs):
        rng.shuffle(order)
        for k in order:
            i, j = pair_idx[k]
            diff = w[i] @ wt[j] + b[i] + bt[j] - logs[k]
            coeff = fs[k] * diff
            grad_wi = coeff * wt[j]
            grad_wtj = coeff * w[i]
            w[i] -= lr * grad_wi / np.sqrt(gw[i])
            wt[j] -= lr * grad_wtj / np.sqrt(gwt[j])
            b[i] -= lr * coeff / np.sqrt(gb[i])
            bt[j] -= lr * coeff / np.sqrt(gbt[j])
            gw[i] += grad_wi ** 2
            gwt[j] += grad_wtj ** 2
            gb[i] += coeff ** 2
            gbt[j] += coeff ** 2

    vectors = (w + wt).astype(np.float32)
    table_tokens = [UNK] + tokens
    unk_row = vectors.mean(axis=0, keepdims=True).astype(np.float32)
    matrix = np.concatenate([unk_row, vectors], axis=0)
    return EmbeddingTable(table_tokens, matrix)
