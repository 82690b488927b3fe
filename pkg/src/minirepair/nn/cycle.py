"""Cycle-training objective for the paired tree translators.

Two maps are trained at once: a forward map M from domain A to domain B and an
independently parameterized backward map N from B to A.  The cycle loss is

    L_cyc(M, N) = E_a |N(M(a)) - a|_1 + E_b |M(N(b)) - b|_1

and the full objective is L_run(M) + L_run(N) + alpha * L_cyc, where each
running loss is a least-squares adversarial term against a small discriminator
plus an L2 term (weight 1.0) between prediction and paired target.  Setting
adversarial=False drops the discriminator term, leaving pure L2 regression.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import tensor as T
from .tensor import Tensor

BatchMap = Callable[[Tensor], Tensor]


class Discriminator:
    """One hidden layer, sigmoid output per row."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator,
                 prefix: str = "disc", dtype=np.float32):
        self.prefix = prefix
        self.params = {
            f"{prefix}.W1": T.parameter((in_dim, hidden), rng, dtype=dtype),
            f"{prefix}.b1": T.zeros((1, hidden), dtype=dtype),
            f"{prefix}.W2": T.parameter((hidden, 1), rng, dtype=dtype),
            f"{prefix}.b2": T.zeros((1, 1), dtype=dtype),
        }
        for p in self.params.values():
            p.requires_grad = True

    def score(self, x: Tensor) -> Tensor:
        hidden = T.tanh(T.add(T.matmul(x, self.params[f"{self.prefix}.W1"]),
                              self.params[f"{self.prefix}.b1"]))
        return T.sigmoid(T.add(T.matmul(hidden, self.params[f"{self.prefix}.W2"]),
                               self.params[f"{self.prefix}.b2"]))


def _l1_mean(a: Tensor, b: Tensor) -> Tensor:
    """Mean over batch rows of the per-row L1 norm."""
    rows = a.shape[0] if a.data.ndim >= 1 and a.shape else 1
    return T.scale(T.sum_all(T.abs_t(T.sub(a, b))), 1.0 / max(rows, 1))


def _lsgan_real_target(scored: Tensor) -> Tensor:
    ones = Tensor(np.ones(scored.shape, dtype=scored.data.dtype))
    return T.mse(scored, ones)


def _lsgan_fake_target(scored: Tensor) -> Tensor:
    zeros = Tensor(np.zeros(scored.shape, dtype=scored.data.dtype))
    return T.mse(scored, zeros)


def run_loss(pred: Tensor, target: Tensor, disc: Discriminator | None,
             adversarial: bool = True) -> Tensor:
    """L_run for one direction given the already-computed predictions."""
    l2 = T.mse(pred, target)
    if not adversarial or disc is None:
        return l2
    gan = _lsgan_real_target(disc.score(pred))
    return T.add(gan, l2)


@dataclass
class CycleLosses:
    run_m: Tensor
    run_n: Tensor
    cyc: Tensor
    total: Tensor


def cycle_losses(batch_a: Tensor, batch_b: Tensor, forward: BatchMap,
                 backward: BatchMap, disc_a: Discriminator | None,
                 disc_b: Discriminator | None, alpha: float = 10.0,
                 adversarial: bool = True) -> CycleLosses:
    """Computes every term of the objective on paired batches (rows align).

    forward maps A-rows to B-rows, backward the reverse.  With identity maps
    the cycle term is exactly zero; with alpha = 0 the total is exactly
    run_m + run_n.
    """
    pred_b = forward(batch_a)
    pred_a = backward(batch_b)
    run_m = run_loss(pred_b, batch_b, disc_b, adversarial)
    run_n = run_loss(pred_a, batch_a, disc_a, adversarial)
    cyc = T.add(_l1_mean(backward(pred_b), batch_a),
                _l1_mean(forward(pred_a), batch_b))
    base = T.add(run_m, run_n)
    if alpha == 0.0:
        total = base
    else:
        total = T.add(base, T.scale(cyc, alpha))
    return CycleLosses(run_m=run_m, run_n=run_n, cyc=cyc, total=total)


def discriminator_losses(real_a: Tensor, real_b: Tensor, fake_a: Tensor,
                         fake_b: Tensor, disc_a: Discriminator,
                         disc_b: Discriminator) -> Tensor:
    """LSGAN discriminator objective; fakes are detached by the caller."""
    loss_a = T.add(_lsgan_real_target(disc_a.score(real_a)),
                   _lsgan_fake_target(disc_a.score(fake_a)))
    loss_b = T.add(_lsgan_real_target(disc_b.score(real_b)),
                   _lsgan_fake_target(disc_b.score(fake_b)))
    return T.add(loss_a, loss_b)
