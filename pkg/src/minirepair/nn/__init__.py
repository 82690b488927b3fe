"""Differentiable tensor kernel, recurrent cells and cycle-training losses."""

from . import tensor
from .tensor import (ShapeMismatch, Tensor, abs_t, add, bce, concat, finite,
                     log_t, matmul, mean_all, mse, mul, parameter, scale,
                     sigmoid, slice_cols, softmax, sub, sum_all, sum_children,
                     tanh, transpose, zeros)
from .cells import (ChildSumTreeLstmCell, GruCell, attention, stack_rows,
                    tree_lstm_encode)
from .cycle import (CycleLosses, Discriminator, cycle_losses,
                    discriminator_losses, run_loss)
from .optim import Adam
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "tensor", "ShapeMismatch", "Tensor", "abs_t", "add", "bce", "concat",
    "finite", "log_t", "matmul", "mean_all", "mse", "mul", "parameter", "scale",
    "sigmoid", "slice_cols", "softmax", "sub", "sum_all", "sum_children",
    "tanh", "transpose", "zeros", "ChildSumTreeLstmCell", "GruCell",
    "attention", "stack_rows", "tree_lstm_encode", "CycleLosses",
    "Discriminator", "cycle_losses", "discriminator_losses", "run_loss",
    "Adam", "CheckpointError", "load_checkpoint", "save_checkpoint",
]
