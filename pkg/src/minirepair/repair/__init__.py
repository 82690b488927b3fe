"""Context-aware tree transformation: context building, weighting, models,
and candidate generation."""

from .weighting import cross3_unweight, cross3_weight, hadamard_unweight, hadamard_weight, unweight, weight
from .context import ContextTree, build_fixing_context
from .models import ContextTransformer, TreeTransformer, RepairModels, train_repair_models
from .generate import (CandidatePatch, TargetPlan, decode_statement,
                       generate_candidates, greedy_fix, token_pools)
from .postprocess import (FilteredCandidate, ValidationOutcome, apply_edits,
                          postprocess, validate_candidates)

__all__ = [
    "cross3_unweight", "cross3_weight", "hadamard_unweight", "hadamard_weight",
    "unweight", "weight",
    "ContextTree", "build_fixing_context",
    "ContextTransformer", "TreeTransformer", "RepairModels", "train_repair_models",
    "CandidatePatch", "TargetPlan", "decode_statement", "generate_candidates",
    "greedy_fix", "token_pools",
    "FilteredCandidate", "ValidationOutcome", "apply_edits", "postprocess",
    "validate_candidates",
]
