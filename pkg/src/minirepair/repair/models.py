"""Two-layer tree transformation models.

ContextTransformer maps the vector summarizing a subtree, in the context of
its method skeleton, to the vector summarizing its replacement; forward and
backward instances are trained jointly with an L1 cycle penalty and optional
least-squares adversaries.  TreeTransformer is the inner encoder-decoder: it
encodes the context-weighted buggy subtree with a Child-Sum Tree-LSTM and
decodes the weighted fixed subtree as a preorder symbol sequence plus a
regressed vector per node, with dot-product attention over encoder states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..diffpair import diff, pair_subtrees
from ..embed import EmbeddingTable, encoder_input
from ..embed.summarize import TreeLstmSummarizer
from ..embed.tokens import EMPTY, LABELED_KINDS
from ..lang import ast
from ..lang.ast import AstNode
from ..nn import (Adam, ChildSumTreeLstmCell, Discriminator, GruCell, Tensor,
                  attention, concat, cycle_losses, discriminator_losses,
                  log_t, matmul, mse, mul, scale, sigmoid, softmax,
                  stack_rows, sum_children, sum_all, tanh, tree_lstm_encode)
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from .context import ContextTree, Replacement, build_fixing_context
from .weighting import weight

BOS = "<BOS>"
END = "<END>"

# decoder symbol vocabulary: specials, node kinds, and the deletion marker;
# the order is fixed because checkpoints index head columns by it
SYMBOLS: list[str] = [
    BOS, END,
    ast.PROGRAM, ast.METHOD, ast.PARAM, ast.BLOCK, ast.VAR_DECL, ast.ASSIGN,
    ast.IF, ast.WHILE, ast.RETURN, ast.EXPR_STMT, ast.CALL, ast.BIN_OP,
    ast.UNARY_OP, ast.VAR, ast.INT_LIT, ast.BOOL_LIT, ast.STR_LIT,
    EMPTY,
]
SYM_INDEX = {s: i for i, s in enumerate(SYMBOLS)}

# min/max child counts used to keep decoded skeletons arity-valid
ARITY: dict[str, tuple[int, Optional[int]]] = {
    ast.PROGRAM: (1, None), ast.METHOD: (1, None), ast.PARAM: (0, 0),
    ast.BLOCK: (0, None), ast.VAR_DECL: (1, 1), ast.ASSIGN: (1, 1),
    ast.IF: (2, 3), ast.WHILE: (2, 2), ast.RETURN: (0, 1),
    ast.EXPR_STMT: (1, 1), ast.CALL: (0, None), ast.BIN_OP: (2, 2),
    ast.UNARY_OP: (1, 1), ast.VAR: (0, 0), ast.INT_LIT: (0, 0),
    ast.BOOL_LIT: (0, 0), ast.STR_LIT: (0, 0), EMPTY: (0, 0),
}
ROOT_SYMBOLS = set(ast.STMT_KINDS) | {EMPTY}

EXPR_KINDS = frozenset({ast.BIN_OP, ast.UNARY_OP, ast.CALL, ast.VAR,
                        ast.INT_LIT, ast.BOOL_LIT, ast.STR_LIT})


def child_kinds(parent: str, index: int) -> frozenset:
    """Kinds the grammar permits at child position `index` of `parent`."""
    if parent in (ast.VAR_DECL, ast.ASSIGN, ast.RETURN, ast.EXPR_STMT,
                  ast.BIN_OP, ast.UNARY_OP, ast.CALL):
        return EXPR_KINDS
    if parent in (ast.IF, ast.WHILE):
        return EXPR_KINDS if index == 0 else frozenset({ast.BLOCK})
    if parent == ast.BLOCK:
        return ast.STMT_KINDS
    return frozenset()


def empty_node() -> AstNode:
    return AstNode(0, EMPTY, "", [], (0, 0, 0, 0))


def symbol_steps(subtree: AstNode, table: EmbeddingTable,
                 weight_vec: np.ndarray, mode: str
                 ) -> list[tuple[int, Optional[np.ndarray], Optional[AstNode]]]:
    """Preorder open/close steps; open steps carry the weighted node vector
    and the node itself (close steps carry neither)."""
    steps: list[tuple[int, Optional[np.ndarray], Optional[AstNode]]] = []

    def visit(node: AstNode) -> None:
        steps.append((SYM_INDEX[node.kind],
                      weight(encoder_input(node, table), weight_vec, mode),
                      node))
        for c in node.children:
            visit(c)
        steps.append((SYM_INDEX[END], None, None))

    visit(subtree)
    return steps


class ContextTransformer:
    def __init__(self, table: EmbeddingTable, hidden: int = 48, seed: int = 5,
                 prefix: str = "ctl", attention_enabled: bool = True):
        self.table = table
        self.hidden = hidden
        self.prefix = prefix
        self.attention_enabled = attention_enabled
        rng = np.random.default_rng(seed)
        self.cell = ChildSumTreeLstmCell(table.dims, hidden, rng, prefix=f"{prefix}.enc")
        self.params = dict(self.cell.params)
        self.params[f"{prefix}.Wout"] = Tensor(
            rng.uniform(-0.15, 0.15, size=(2 * hidden, table.dims)).astype(np.float32),
            requires_grad=True)
        self.params[f"{prefix}.bout"] = Tensor(
            np.zeros((1, table.dims), dtype=np.float32), requires_grad=True)

    def forward_t(self, context: ContextTree, v_summary: Tensor) -> Tensor:
        inputs: dict[int, Tensor] = {}
        for node in context.tree.walk():
            if node.id == context.summary_id:
                inputs[node.id] = v_summary
            else:
                inputs[node.id] = Tensor(encoder_input(node, self.table)[None, :],
                                         requires_grad=False)
        states = tree_lstm_encode(context.tree, inputs, self.cell)
        query = states[context.summary_id][0]
        all_h = stack_rows([states[n.id][0] for n in context.tree.walk()])
        ctx, _ = attention(query, all_h, enabled=self.attention_enabled)
        combined = concat([query, ctx], axis=1)
        return matmul(combined, self.params[f"{self.prefix}.Wout"]) + self.params[f"{self.prefix}.bout"]

    def apply(self, context: ContextTree, v_summary: np.ndarray) -> np.ndarray:
        out = self.forward_t(context, Tensor(np.asarray(v_summary, dtype=np.float32)[None, :],
                                             requires_grad=False))
        return out.data[0].astype(np.float32)

    def save(self, stem) -> None:
        save_checkpoint(stem, self.params,
                        {"hidden": self.hidden, "dims": self.table.dims,
                         "prefix": self.prefix,
                         "attention": int(self.attention_enabled)})

    @classmethod
    def load(cls, stem, table: EmbeddingTable) -> "ContextTransformer":
        params, hyper = load_checkpoint(stem)
        model = cls(table, hidden=int(hyper["hidden"]), prefix=hyper["prefix"],
                    attention_enabled=bool(hyper.get("attention", 1)))
        for name, tensor in params.items():
            model.params[name].data[...] = tensor.data
        return model


class TreeTransformer:
    def __init__(self, table: EmbeddingTable, hidden: int = 48, sym_dim: int = 16,
                 seed: int = 7, attention_enabled: bool = True,
                 weight_mode: str = "hadamard"):
        self.table = table
        self.hidden = hidden
        self.sym_dim = sym_dim
        self.attention_enabled = attention_enabled
        self.weight_mode = weight_mode
        rng = np.random.default_rng(seed)
        d = table.dims
        n_sym = len(SYMBOLS)
        self.enc = ChildSumTreeLstmCell(d, hidden, rng, prefix="ttl.enc")
        self.dec = GruCell(sym_dim + hidden, hidden, rng, prefix="ttl.dec")
        self.params = dict(self.enc.params)
        self.params.update(self.dec.params)
        self.params["ttl.Wemb"] = Tensor(
            rng.uniform(-0.25, 0.25, size=(n_sym, sym_dim)).astype(np.float32),
            requires_grad=True)
        self.params["ttl.Wsym"] = Tensor(
            rng.uniform(-0.15, 0.15, size=(hidden, n_sym)).astype(np.float32),
            requires_grad=True)
        self.params["ttl.bsym"] = Tensor(np.zeros((1, n_sym), dtype=np.float32),
                                         requires_grad=True)
        self.params["ttl.Wvec"] = Tensor(
            rng.uniform(-0.15, 0.15, size=(hidden, d)).astype(np.float32),
            requires_grad=True)
        self.params["ttl.bvec"] = Tensor(np.zeros((1, d), dtype=np.float32),
                                         requires_grad=True)
        # direct token head over the embedding vocabulary; the vector head
        # alone is too noisy to pin down identifiers reliably
        self.vocab = list(table.tokens)
        self.tok_index = {t: i for i, t in enumerate(self.vocab)}
        # the token head reads the decoder state and a freshly aligned
        # attention context; without the latter the head cannot copy input
        # tokens and falls back to corpus-typical statements
        self.params["ttl.Wtok"] = Tensor(
            rng.uniform(-0.15, 0.15, size=(2 * hidden, len(self.vocab))).astype(np.float32),
            requires_grad=True)
        self.params["ttl.btok"] = Tensor(np.zeros((1, len(self.vocab)), dtype=np.float32),
                                         requires_grad=True)

    def encode(self, subtree: AstNode, weight_vec: np.ndarray) -> tuple[Tensor, Tensor]:
        inputs = {}
        for node in subtree.walk():
            vec = weight(encoder_input(node, self.table), weight_vec, self.weight_mode)
            inputs[node.id] = Tensor(vec.astype(np.float32)[None, :], requires_grad=False)
        states = tree_lstm_encode(subtree, inputs, self.enc)
        all_h = stack_rows([states[n.id][0] for n in subtree.walk()])
        return all_h, states[subtree.id][0]

    def _embed_symbol(self, idx: int) -> Tensor:
        onehot = np.zeros((1, len(SYMBOLS)), dtype=np.float32)
        onehot[0, idx] = 1.0
        return matmul(Tensor(onehot, requires_grad=False), self.params["ttl.Wemb"])

    def _step(self, prev_idx: int, h: Tensor, enc_h: Tensor
              ) -> tuple[Tensor, Tensor, Tensor, Tensor]:
        ctx, _ = attention(h, enc_h, enabled=self.attention_enabled)
        x = concat([self._embed_symbol(prev_idx), ctx], axis=1)
        h2 = self.dec.step(x, h)
        logits = matmul(h2, self.params["ttl.Wsym"]) + self.params["ttl.bsym"]
        vec = matmul(h2, self.params["ttl.Wvec"]) + self.params["ttl.bvec"]
        ctx2, _ = attention(h2, enc_h, enabled=self.attention_enabled)
        tok = (matmul(concat([h2, ctx2], axis=1), self.params["ttl.Wtok"])
               + self.params["ttl.btok"])
        return h2, logits, vec, tok

    def _ce(self, logits: Tensor, index: int, width: int) -> Tensor:
        onehot = np.zeros((1, width), dtype=np.float32)
        onehot[0, index] = 1.0
        return scale(sum_all(mul(log_t(softmax(logits)),
                                 Tensor(onehot, requires_grad=False))), -1.0)

    def loss(self, buggy: AstNode, fixed: AstNode, v_guide: np.ndarray) -> Tensor:
        # v_guide weights both the encoder inputs and the vector-regression
        # targets; it is the context transformer's output at repair time, so
        # training feeds the transformer's own prediction where available
        enc_h, h = self.encode(buggy, v_guide)
        steps = symbol_steps(fixed, self.table, v_guide, self.weight_mode)
        prev = SYM_INDEX[BOS]
        pieces: list[Tensor] = []
        for sym_idx, vec_target, node in steps:
            h, logits, vec, tok = self._step(prev, h, enc_h)
            pieces.append(self._ce(logits, sym_idx, len(SYMBOLS)))
            if vec_target is not None:
                target = Tensor(vec_target.astype(np.float32)[None, :], requires_grad=False)
                pieces.append(mse(vec, target))
            if node is not None and node.kind in LABELED_KINDS:
                tok_idx = self.tok_index.get(node.label)
                if tok_idx is not None:
                    pieces.append(self._ce(tok, tok_idx, len(self.vocab)))
            prev = sym_idx
        return sum_children(pieces)

    def _allowed(self, stack: list[tuple[str, int]], started: bool) -> list[int]:
        if not started:
            return [SYM_INDEX[s] for s in SYMBOLS if s in ROOT_SYMBOLS]
        if not stack:
            return []
        kind, children = stack[-1]
        lo, hi = ARITY.get(kind, (0, None))
        out = []
        if children >= lo:
            out.append(SYM_INDEX[END])
        if hi is None or children < hi:
            kinds = child_kinds(kind, children)
            out.extend(SYM_INDEX[s] for s in SYMBOLS if s in kinds)
        return out

    def decode(self, buggy: AstNode, v_in: np.ndarray,
               max_steps: int = 90,
               root_kinds: Optional[set] = None) -> Optional["DecodedNode"]:
        """root_kinds restricts the first symbol; a replacement keeps its
        statement kind, so callers pass the buggy root there."""
        enc_h, h = self.encode(buggy, v_in)
        prev = SYM_INDEX[BOS]
        stack: list[tuple[str, int]] = []
        node_stack: list[DecodedNode] = []
        root: Optional[DecodedNode] = None
        started = False
        for _ in range(max_steps):
            h, logits, vec, tok = self._step(prev, h, enc_h)
            allowed = self._allowed([(k, c) for k, c in stack], started)
            if not started and root_kinds is not None:
                narrowed = [i for i in allowed if SYMBOLS[i] in root_kinds]
                allowed = narrowed or allowed
            if not allowed:
                break
            row = logits.data[0]
            choice = max(allowed, key=lambda i: row[i])
            sym = SYMBOLS[choice]
            prev = choice
            if sym == END:
                done = node_stack.pop()
                stack.pop()
                if not node_stack:
                    return root
                continue
            node = DecodedNode(kind=sym, vec=vec.data[0].astype(np.float32),
                               children=[],
                               tok_logits=tok.data[0].astype(np.float32))
            if node_stack:
                node_stack[-1].children.append(node)
                stack[-1] = (stack[-1][0], stack[-1][1] + 1)
            else:
                root = node
            node_stack.append(node)
            stack.append((sym, 0))
            started = True
        return None  # ran out of steps before the root closed

    def save(self, stem) -> None:
        save_checkpoint(stem, self.params,
                        {"hidden": self.hidden, "dims": self.table.dims,
                         "symDim": self.sym_dim,
                         "attention": int(self.attention_enabled),
                         "weightMode": self.weight_mode})

    @classmethod
    def load(cls, stem, table: EmbeddingTable) -> "TreeTransformer":
        params, hyper = load_checkpoint(stem)
        model = cls(table, hidden=int(hyper["hidden"]), sym_dim=int(hyper["symDim"]),
                    attention_enabled=bool(hyper.get("attention", 1)),
                    weight_mode=hyper.get("weightMode", "hadamard"))
        for name, tensor in params.items():
            model.params[name].data[...] = tensor.data
        return model


@dataclass
class DecodedNode:
    kind: str
    vec: np.ndarray
    children: list["DecodedNode"]
    tok_logits: Optional[np.ndarray] = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class CtlSample:
    context: ContextTree
    v_in: np.ndarray
    v_out: np.ndarray


@dataclass
class TtlSample:
    buggy: AstNode
    fixed: AstNode
    v_in: np.ndarray
    v_out: np.ndarray
    # context-transformer prediction for this sample, filled in once the
    # transformer is trained; the tree decoder trains against it so that it
    # sees the same noise at repair time
    v_pred: Optional[np.ndarray] = None


def _identity_neighbours(method: AstNode, changed_ids: set[int],
                         cap: int) -> list[AstNode]:
    # unchanged statements adjacent to a change: the repair stage feeds these
    # through the models too (hunk expansion), so they must reconstruct
    out: dict[int, AstNode] = {}
    for block in method.walk():
        if block.kind != ast.BLOCK:
            continue
        stmts = block.statements()
        for i, stmt in enumerate(stmts):
            if stmt.id not in changed_ids:
                continue
            for j in (i - 1, i + 1):
                if 0 <= j < len(stmts) and stmts[j].id not in changed_ids:
                    out[stmts[j].id] = stmts[j]
    return [out[k] for k in sorted(out)][:cap]


def build_training_samples(bugs: Sequence[tuple[AstNode, AstNode]],
                           table: EmbeddingTable,
                           summarizer: TreeLstmSummarizer,
                           identity_per_bug: int = 2
                           ) -> tuple[list[CtlSample], list[TtlSample]]:
    ctl_samples: list[CtlSample] = []
    ttl_samples: list[TtlSample] = []
    for method_before, method_after in bugs:
        d = diff(method_before, method_after)
        pairs = pair_subtrees(d)
        for i, pair in enumerate(pairs):
            others = []
            for j, other in enumerate(pairs):
                if j == i:
                    continue
                if other.buggy is not None:
                    others.append(Replacement(other.buggy.id, other.fixed))
                elif other.buggy_parent_id is not None:
                    others.append(Replacement(None, other.fixed,
                                              block_id=other.buggy_parent_id,
                                              index=other.buggy_index))
            try:
                if pair.buggy is not None:
                    context = build_fixing_context(method_before, pair.buggy.id, others)
                elif pair.buggy_parent_id is not None:
                    context = build_fixing_context(
                        method_before, None, others,
                        insert_at=(pair.buggy_parent_id, pair.buggy_index or 0))
                else:
                    continue
            except ValueError:
                continue
            buggy = pair.buggy if pair.buggy is not None else empty_node()
            fixed = pair.fixed if pair.fixed is not None else empty_node()
            v_in = summarizer.summarize(buggy)
            v_out = summarizer.summarize(fixed)
            ctl_samples.append(CtlSample(context, v_in, v_out))
            ttl_samples.append(TtlSample(buggy, fixed, v_in, v_out))
        changed = {p.buggy.id for p in pairs if p.buggy is not None}
        for stmt in _identity_neighbours(method_before, changed, identity_per_bug):
            try:
                context = build_fixing_context(method_before, stmt.id, [])
            except ValueError:
                continue
            v = summarizer.summarize(stmt)
            ctl_samples.append(CtlSample(context, v, v))
            ttl_samples.append(TtlSample(stmt, stmt, v, v))
    return ctl_samples, ttl_samples


@dataclass
class RepairModels:
    table: EmbeddingTable
    summarizer: TreeLstmSummarizer
    ctl_forward: ContextTransformer
    ctl_backward: ContextTransformer
    ttl: TreeTransformer


def train_repair_models(bugs: Sequence[tuple[AstNode, AstNode]],
                        table: EmbeddingTable,
                        summarizer: TreeLstmSummarizer,
                        hidden: int = 48,
                        epochs: int = 8,
                        lr: float = 5e-3,
                        alpha: float = 10.0,
                        adversarial: bool = True,
                        attention_enabled: bool = True,
                        weight_mode: str = "hadamard",
                        identity_per_bug: int = 2,
                        ttl_epochs: Optional[int] = None,
                        seed: int = 0,
                        progress=None) -> RepairModels:
    rng = np.random.default_rng(seed)
    ctl_f = ContextTransformer(table, hidden, seed=seed + 1, prefix="ctlf",
                               attention_enabled=attention_enabled)
    ctl_b = ContextTransformer(table, hidden, seed=seed + 2, prefix="ctlb",
                               attention_enabled=attention_enabled)
    ttl = TreeTransformer(table, hidden, seed=seed + 3,
                          attention_enabled=attention_enabled,
                          weight_mode=weight_mode)
    ctl_samples, ttl_samples = build_training_samples(
        bugs, table, summarizer, identity_per_bug=identity_per_bug)
    if not ctl_samples:
        return RepairModels(table, summarizer, ctl_f, ctl_b, ttl)

    gen_params = dict(ctl_f.params)
    gen_params.update(ctl_b.params)
    opt_gen = Adam(gen_params, lr=lr)
    disc_a = disc_b = None
    opt_disc = None
    if adversarial:
        disc_a = Discriminator(table.dims, hidden // 2, rng, prefix="disc.a")
        disc_b = Discriminator(table.dims, hidden // 2, rng, prefix="disc.b")
        disc_params = dict(disc_a.params)
        disc_params.update(disc_b.params)
        opt_disc = Adam(disc_params, lr=lr)

    for epoch in range(epochs):
        order = rng.permutation(len(ctl_samples))
        total = 0.0
        for idx in order:
            sample = ctl_samples[idx]
            a = Tensor(sample.v_in[None, :].astype(np.float32), requires_grad=False)
            b = Tensor(sample.v_out[None, :].astype(np.float32), requires_grad=False)
            fwd = lambda t: ctl_f.forward_t(sample.context, t)
            bwd = lambda t: ctl_b.forward_t(sample.context, t)
            opt_gen.zero_grad()
            losses = cycle_losses(a, b, fwd, bwd, disc_a, disc_b,
                                  alpha=alpha, adversarial=adversarial)
            losses.total.backward()
            opt_gen.step()
            total += float(losses.total.data)
            if adversarial:
                opt_disc.zero_grad()
                fake_b = fwd(a).detach()
                fake_a = bwd(b).detach()
                d_loss = discriminator_losses(a, b, fake_a, fake_b, disc_a, disc_b)
                d_loss.backward()
                opt_disc.step()
        if progress:
            progress(f"ctl epoch {epoch + 1}/{epochs} loss {total / len(ctl_samples):.4f}")

    # the decoder must cope with the transformer's actual outputs, not the
    # clean summaries it was supervised on
    for cs, ts in zip(ctl_samples, ttl_samples):
        ts.v_pred = ctl_f.apply(cs.context, cs.v_in)

    n_ttl = ttl_epochs if ttl_epochs else epochs
    opt_ttl = Adam(ttl.params, lr=lr)
    for epoch in range(n_ttl):
        order = rng.permutation(len(ttl_samples))
        total = 0.0
        for idx in order:
            sample = ttl_samples[idx]
            guide = sample.v_pred if sample.v_pred is not None else sample.v_out
            opt_ttl.zero_grad()
            loss = ttl.loss(sample.buggy, sample.fixed, guide)
            loss.backward()
            opt_ttl.step()
            total += float(loss.data)
        if progress:
            progress(f"ttl epoch {epoch + 1}/{n_ttl} loss {total / len(ttl_samples):.4f}")
    return RepairModels(table, summarizer, ctl_f, ctl_b, ttl)
