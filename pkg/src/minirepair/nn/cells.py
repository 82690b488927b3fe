"""Recurrent cells: GRU, Child-Sum Tree-LSTM, and dot-product attention.

Gate matrices are stored fused (one matmul per input) and sliced per gate.
All activations are (1, h) rows; encoder state matrices are (n, h).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..lang.ast import AstNode
from . import tensor as T
from .tensor import Tensor


class GruCell:
    """h' = (1-z) * h + z * tanh(W_h x + U_h (r*h) + b_h) with fused z/r gates."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator,
                 prefix: str = "gru", dtype=np.float32):
        self.in_dim = in_dim
        self.hidden = hidden
        self.prefix = prefix
        self.params = {
            f"{prefix}.W_zr": T.parameter((in_dim, 2 * hidden), rng, dtype=dtype),
            f"{prefix}.U_zr": T.parameter((hidden, 2 * hidden), rng, dtype=dtype),
            f"{prefix}.b_zr": T.zeros((1, 2 * hidden), dtype=dtype),
            f"{prefix}.W_h": T.parameter((in_dim, hidden), rng, dtype=dtype),
            f"{prefix}.U_h": T.parameter((hidden, hidden), rng, dtype=dtype),
            f"{prefix}.b_h": T.zeros((1, hidden), dtype=dtype),
        }
        for p in self.params.values():
            p.requires_grad = True

    def _p(self, name: str) -> Tensor:
        return self.params[f"{self.prefix}.{name}"]

    def step(self, x: Tensor, h: Tensor) -> Tensor:
        hidden = self.hidden
        zr = T.sigmoid(T.add(T.add(T.matmul(x, self._p("W_zr")),
                                   T.matmul(h, self._p("U_zr"))),
                             self._p("b_zr")))
        z = T.slice_cols(zr, 0, hidden)
        r = T.slice_cols(zr, hidden, 2 * hidden)
        candidate = T.tanh(T.add(T.add(T.matmul(x, self._p("W_h")),
                                       T.matmul(T.mul(r, h), self._p("U_h"))),
                                 self._p("b_h")))
        keep = T.mul(T.scale(z, -1.0), h)          # -z*h
        return T.add(T.add(h, keep), T.mul(z, candidate))  # h - z*h + z*cand

    def initial_state(self, dtype=np.float32) -> Tensor:
        return T.zeros((1, self.hidden), dtype=dtype)


class ChildSumTreeLstmCell:
    """Tai-style child-sum recurrence.

    i = sig(W_i x + U_i hsum + b_i)
    f_k = sig(W_f x + U_f h_k + b_f)        one forget gate per child
    o = sig(W_o x + U_o hsum + b_o)
    u = tanh(W_u x + U_u hsum + b_u)
    c = i*u + sum_k f_k*c_k ;  h = o * tanh(c)
    Leaves use hsum = 0 and c = i*u.
    """

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator,
                 prefix: str = "tlstm", dtype=np.float32):
        self.in_dim = in_dim
        self.hidden = hidden
        self.prefix = prefix
        self.params = {
            f"{prefix}.W": T.parameter((in_dim, 4 * hidden), rng, dtype=dtype),
            f"{prefix}.b": T.zeros((1, 4 * hidden), dtype=dtype),
            f"{prefix}.U_iou": T.parameter((hidden, 3 * hidden), rng, dtype=dtype),
            f"{prefix}.U_f": T.parameter((hidden, hidden), rng, dtype=dtype),
        }
        for p in self.params.values():
            p.requires_grad = True

    def _p(self, name: str) -> Tensor:
        return self.params[f"{self.prefix}.{name}"]

    def step(self, x: Tensor, child_states: Sequence[tuple[Tensor, Tensor]]) -> tuple[Tensor, Tensor]:
        h = self.hidden
        dtype = x.data.dtype
        base = T.add(T.matmul(x, self._p("W")), self._p("b"))
        x_i = T.slice_cols(base, 0, h)
        x_f = T.slice_cols(base, h, 2 * h)
        x_o = T.slice_cols(base, 2 * h, 3 * h)
        x_u = T.slice_cols(base, 3 * h, 4 * h)
        if child_states:
            hsum = T.sum_children([hk for hk, _ in child_states])
        else:
            hsum = T.zeros((1, h), dtype=dtype)
        from_h = T.matmul(hsum, self._p("U_iou"))
        i_gate = T.sigmoid(T.add(x_i, T.slice_cols(from_h, 0, h)))
        o_gate = T.sigmoid(T.add(x_o, T.slice_cols(from_h, h, 2 * h)))
        u_val = T.tanh(T.add(x_u, T.slice_cols(from_h, 2 * h, 3 * h)))
        c = T.mul(i_gate, u_val)
        for hk, ck in child_states:
            f_k = T.sigmoid(T.add(x_f, T.matmul(hk, self._p("U_f"))))
            c = T.add(c, T.mul(f_k, ck))
        h_out = T.mul(o_gate, T.tanh(c))
        return h_out, c


def tree_lstm_encode(root: AstNode, inputs: dict[int, Tensor],
                     cell: ChildSumTreeLstmCell) -> dict[int, tuple[Tensor, Tensor]]:
    """Bottom-up encoding; returns (h, c) per node id.

    inputs maps every node id in the subtree to its (1, in_dim) vector.
    """
    states: dict[int, tuple[Tensor, Tensor]] = {}
    stack: list[tuple[AstNode, bool]] = [(root, False)]
    while stack:
        node, ready = stack.pop()
        if not ready:
            stack.append((node, True))
            for child in node.children:
                stack.append((child, False))
            continue
        children = [states[c.id] for c in node.children]
        states[node.id] = cell.step(inputs[node.id], children)
    return states


def attention(query: Tensor, states: Tensor, enabled: bool = True) -> tuple[Tensor, Tensor]:
    """Global dot-product alignment.

    Returns (context (1, h), weights (1, n)); weights sum to one.  With the
    layer switched off the context is the plain mean of the encoder states.
    """
    n = states.shape[0]
    if not enabled:
        uniform = Tensor(np.full((1, n), 1.0 / n, dtype=states.data.dtype))
        context = T.scale(_col_sum(states), 1.0 / n)
        return context, uniform
    scores = T.matmul(query, T.transpose(states))
    weights = T.softmax(scores)
    context = T.matmul(weights, states)
    return context, weights


def _col_sum(states: Tensor) -> Tensor:
    ones = Tensor(np.ones((1, states.shape[0]), dtype=states.data.dtype))
    return T.matmul(ones, states)


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    return T.concat(list(rows), axis=0)
