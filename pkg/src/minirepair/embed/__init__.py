"""Token embeddings, alpha renaming and subtree summarization."""

from .glove import UNK, EmbeddingTable, cooccurrence, train_glove, weighting
from .rename import alpha_rename, forward_mapping, is_placeholder, restore
from .summarize import TreeLstmSummarizer, TreeSummarizer, encoder_input
from .tokens import (EMPTY, KIND_TOKENS, LABELED_KINDS, SUMMARY,
                     embedding_sentences, kind_token, node_token, node_tokens,
                     source_tokens)

__all__ = [
    "UNK", "EmbeddingTable", "cooccurrence", "train_glove", "weighting",
    "alpha_rename", "forward_mapping", "is_placeholder", "restore",
    "TreeLstmSummarizer", "TreeSummarizer", "encoder_input", "EMPTY",
    "KIND_TOKENS", "LABELED_KINDS", "SUMMARY", "embedding_sentences",
    "kind_token", "node_token", "node_tokens", "source_tokens",
]
