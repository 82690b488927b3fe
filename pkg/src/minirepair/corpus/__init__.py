"""Corpus generation, bug seeding, storage, and mining."""

from .progen import manifold_source, random_program
from .mutate import (SiteMutation, apply_sites, mutate_statement,
                     random_tree_mutation)
from .seed import BugRecord, seed_bug, build_corpus
from .store import CorpusError, LoadedBug, load_bug, load_corpus, save_bug
from .mine import mine_corpus

__all__ = [
    "manifold_source", "random_program",
    "SiteMutation", "apply_sites", "mutate_statement", "random_tree_mutation",
    "BugRecord", "seed_bug", "build_corpus",
    "CorpusError", "LoadedBug", "load_bug", "load_corpus", "save_bug",
    "mine_corpus",
]
