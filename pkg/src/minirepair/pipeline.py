"""End-to-end pipeline: train on a seeded corpus, then localize, group,
expand, repair and validate individual bugs.

The repair stage works entirely in alpha-renamed space (the scorer, the
classifier and the tree models were trained on renamed tokens); candidate
postprocessing restores original names before validation.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .config import DEFAULTS
from .corpus.mine import mine_bug
from .corpus.store import LoadedBug
from .dataflow import make_node_dependency
from .embed import EmbeddingTable, alpha_rename, forward_mapping, train_glove
from .embed.summarize import TreeLstmSummarizer
from .expansion import BuggyStatementClassifier, expand_with_models, train_classifier
from .hunkdetect import Hunk, PairScorer, form_hunks, group_hunks, train_pair_scorer
from .lang import ast, parse, unparse
from .lang.interp import TestCase
from .lang.testing import CoverageMatrix, run_tests
from .repair.context import Replacement, build_fixing_context
from .repair.generate import TargetPlan, generate_candidates, greedy_fix
from .repair.models import (ContextTransformer, RepairModels, TreeTransformer,
                            train_repair_models)
from .repair.postprocess import ValidationOutcome, postprocess, validate_candidates
from .sbfl import NoFailingTests, SuspiciousnessReport, ochiai, select_suspicious


@dataclass
class TrainedModels:
    table: EmbeddingTable
    summarizer: TreeLstmSummarizer
    scorer: Optional[PairScorer]
    classifier: Optional[BuggyStatementClassifier]
    repair: RepairModels

    def save(self, out_dir: Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.table.save(out_dir / "embeddings.txt")
        self.summarizer.save(out_dir / "summarizer")
        if self.scorer is not None:
            self.scorer.save(out_dir / "scorer")
        if self.classifier is not None:
            self.classifier.save(out_dir / "classifier")
        self.repair.ctl_forward.save(out_dir / "ctlf")
        self.repair.ctl_backward.save(out_dir / "ctlb")
        self.repair.ttl.save(out_dir / "ttl")

    @classmethod
    def load(cls, models_dir: Path) -> "TrainedModels":
        models_dir = Path(models_dir)
        table = EmbeddingTable.load(models_dir / "embeddings.txt")
        summarizer = TreeLstmSummarizer(table)
        summarizer.load_params(models_dir / "summarizer")
        scorer = classifier = None
        if (models_dir / "scorer.json").exists():
            scorer = PairScorer.load(models_dir / "scorer", table)
        if (models_dir / "classifier.json").exists():
            classifier = BuggyStatementClassifier.load(models_dir / "classifier", table)
        ctl_f = ContextTransformer.load(models_dir / "ctlf", table)
        ctl_b = ContextTransformer.load(models_dir / "ctlb", table)
        ttl = TreeTransformer.load(models_dir / "ttl", table)
        repair = RepairModels(table, summarizer, ctl_f, ctl_b, ttl)
        return cls(table, summarizer, scorer, classifier, repair)


def scorer_examples(statement_sets: Sequence[list[list[str]]],
                    rng: random.Random) -> list[tuple[list[str], list[str], float]]:
    """Positive pairs: changed statements of one bug.  Negatives: cross-bug
    pairs, matched in count."""
    examples: list[tuple[list[str], list[str], float]] = []
    for stmts in statement_sets:
        for i in range(len(stmts)):
            for j in range(i + 1, len(stmts)):
                examples.append((stmts[i], stmts[j], 1.0))
    n_pos = len(examples)
    populated = [s for s in statement_sets if s]
    for _ in range(n_pos):
        a, b = rng.sample(range(len(populated)), 2) if len(populated) > 1 else (0, 0)
        examples.append((rng.choice(populated[a]), rng.choice(populated[b]), 0.0))
    rng.shuffle(examples)
    return examples


def renamed_method_pairs(bugs: Sequence[LoadedBug]) -> list[tuple[ast.AstNode, ast.AstNode]]:
    """Changed (before, after) method pairs in consistent alpha-renamed space."""
    out = []
    for bug in bugs:
        before = parse(bug.before_src)
        after = parse(bug.after_src)
        for mb, ma in zip(ast.methods(before), ast.methods(after)):
            if ast.structurally_equal(mb, ma):
                continue
            rb, rev = alpha_rename(mb)
            ra, _ = alpha_rename(ma, seed_names=forward_mapping(rev))
            out.append((rb, ra))
    return out


def train_models(bugs: Sequence[LoadedBug], config: dict | None = None,
                 progress: Optional[Callable[[str], None]] = None) -> TrainedModels:
    cfg = dict(DEFAULTS)
    cfg.update(config or {})
    say = progress or (lambda msg: None)
    rng = random.Random(cfg["seed"])

    mined = [mine_bug(bug) for bug in bugs]
    sentences = [s for m in mined for s in m["sentences"]]
    say(f"mined {len(bugs)} bugs, {len(sentences)} sentences")
    table = train_glove(sentences, dims=cfg["dims"], window=cfg["glove_window"],
                        epochs=cfg["glove_epochs"], seed=cfg["seed"])
    say(f"embeddings: {len(table.tokens)} tokens x {table.dims}")
    summarizer = TreeLstmSummarizer(table)

    statement_sets = [[toks for hunk in m["hunkset"]["hunks"] for toks in hunk]
                      for m in mined]
    scorer = PairScorer(table, hidden=cfg["scorer_hidden"])
    losses = train_pair_scorer(scorer, scorer_examples(statement_sets, rng),
                               epochs=cfg["scorer_epochs"])
    say(f"pair scorer loss {losses[0]:.4f} -> {losses[-1]:.4f}")

    classifier = BuggyStatementClassifier(table, hidden=cfg["classifier_hidden"])
    rows = [(r["sequence"], r["labels"]) for m in mined for r in m["classifier"]]
    losses = train_classifier(classifier, rows, epochs=cfg["classifier_epochs"],
                              seed=cfg["seed"])
    say(f"classifier loss {losses[0]:.4f} -> {losses[-1]:.4f}")

    method_pairs = renamed_method_pairs(bugs)
    say(f"repair training: {len(method_pairs)} changed method pairs")
    repair = train_repair_models(method_pairs, table, summarizer,
                                 hidden=cfg["hidden"], epochs=cfg["epochs"],
                                 lr=cfg["lr"], alpha=cfg["alpha"],
                                 adversarial=cfg["adversarial"],
                                 attention_enabled=cfg["attention"],
                                 weight_mode=cfg["weight_mode"],
                                 identity_per_bug=cfg["identity_per_bug"],
                                 ttl_epochs=cfg["ttl_epochs"],
                                 seed=cfg["seed"], progress=progress)
    return TrainedModels(table, summarizer, scorer, classifier, repair)


@dataclass
class FixOutcome:
    bug_id: str
    tried: int
    plausible_rank: Optional[int]
    plausible_source: Optional[str]
    correct: Optional[bool]
    wall_clock_ms: int
    n_groups: int = 0
    n_candidates: int = 0
    detail: str = ""


def localize(program: ast.AstNode, tests: Sequence[TestCase],
             threshold: float = 0.0, cap: int = 50
             ) -> tuple[SuspiciousnessReport, list[int]]:
    coverage, _ = run_tests(program, list(tests))
    report = ochiai(coverage)
    return report, select_suspicious(report, threshold=threshold, cap=cap)


def _rename_program(program: ast.AstNode) -> tuple[ast.AstNode, dict[int, dict[str, str]]]:
    """Whole-program clone with every method alpha-renamed in place; node ids
    are preserved, so coverage and hunk ids remain valid."""
    clone = program.clone()
    reverses: dict[int, dict[str, str]] = {}
    for i, child in enumerate(clone.children):
        if child.kind != ast.METHOD:
            continue
        renamed, reverse = alpha_rename(child)
        clone.children[i] = renamed
        reverses[child.id] = reverse
    return clone, reverses


def _block_prob_cache(renamed_index: dict[int, ast.AstNode],
                      classifier: Optional[BuggyStatementClassifier]
                      ) -> Callable[[int], dict[int, float]]:
    """Per-block classifier probabilities keyed by statement id, memoized.

    The classifier reads whole block sequences, so probabilities are computed
    once per block and shared by grouping and seed ranking."""
    cache: dict[int, dict[int, float]] = {}

    def probs_of(block_id: int) -> dict[int, float]:
        got = cache.get(block_id)
        if got is None:
            if classifier is None:
                got = {}
            else:
                stmts = renamed_index[block_id].children
                got = dict(zip((s.id for s in stmts),
                               classifier.probabilities(stmts)))
            cache[block_id] = got
        return got

    return probs_of


def fix_bug(bug: LoadedBug, models: TrainedModels, config: dict | None = None,
            detection: bool = True, expansion: bool = True) -> FixOutcome:
    cfg = dict(DEFAULTS)
    cfg.update(config or {})
    start = time.monotonic()

    def done(outcome: ValidationOutcome | None, n_groups: int, n_cands: int,
             detail: str = "") -> FixOutcome:
        ms = int((time.monotonic() - start) * 1000)
        if outcome is None:
            return FixOutcome(bug.bug_id, 0, None, None, None, ms,
                              n_groups, n_cands, detail)
        return FixOutcome(bug.bug_id, outcome.tried, outcome.plausible_rank,
                          outcome.plausible_source, outcome.correct, ms,
                          n_groups, n_cands, detail)

    program = parse(bug.before_src)
    tests = list(bug.tests)
    try:
        report, suspicious = localize(program, tests,
                                      threshold=cfg["threshold"], cap=cfg["cap"])
    except NoFailingTests:
        return done(None, 0, 0, "all tests pass already")
    if not suspicious:
        return done(None, 0, 0, "no suspicious statements")

    renamed_program, reverses = _rename_program(program)
    renamed_index = ast.index_nodes(renamed_program)
    hunks = form_hunks(renamed_program, set(suspicious))
    if not hunks:
        return done(None, 0, 0, "no hunks")
    block_probs = _block_prob_cache(renamed_index, models.classifier)

    def focus(hunk: Hunk) -> list[ast.AstNode]:
        # pair scoring compares likely-buggy statements only; wide suspicious
        # hunks are mostly clean and would wash out the mean otherwise
        probs = block_probs(hunk.block_id)
        flagged = [s for s in hunk.statements if probs.get(s.id, 0.0) >= 0.5]
        return flagged or [max(hunk.statements,
                               key=lambda s: probs.get(s.id, 0.0))]

    groups = group_hunks(hunks, report.score_of,
                         scorer=models.scorer if detection else None,
                         threshold=cfg["group_threshold"],
                         focus=focus if models.classifier is not None else None)

    callables = [ast.method_name(m) for m in ast.methods(program)]
    deadline = start + cfg["budget_s"]
    total_candidates = 0
    tried_total = 0
    for group in groups:
        if time.monotonic() > deadline:
            break
        # restrict each candidate space to the dominant method of the group
        method_ids = {}
        for h in group.hunks:
            method_ids.setdefault(h.method_id, []).append(h)
        best_method = max(method_ids,
                          key=lambda mid: max(h.suspiciousness(report.score_of)
                                              for h in method_ids[mid]))
        hunks_here = sorted(method_ids[best_method],
                            key=lambda h: (-h.suspiciousness(report.score_of),
                                           h.statements[0].id))
        rmethod = next(m for m in ast.methods(renamed_program)
                       if m.id == best_method)
        reverse = reverses[best_method]
        dependent = make_node_dependency(rmethod)

        def ranked_seeds(hunk: Hunk) -> list[ast.AstNode]:
            probs = block_probs(hunk.block_id)
            return sorted(hunk.statements,
                          key=lambda s: (-probs.get(s.id, 0.0),
                                         -report.score_of(s.id), s.id))

        # an attempt fixes (seed rank, span) for every hunk of the group: span 1
        # targets the seed alone, span 2 adds the best window companion, span 0
        # takes the whole window.  Wrong windows yield candidates that all fail
        # validation (partial repairs never pass), so failures walk the schedule
        # until something validates or the budget runs out.  Narrow spans come
        # first: candidate quality degrades quickly with target count.
        seed_lists = [ranked_seeds(h) for h in hunks_here]
        attempts = max(int(cfg["seed_attempts"]), 1)
        schedule: list[tuple[int, int]] = []
        for rank in range(attempts):
            schedule.append((rank, 1))
            if expansion:
                schedule.append((rank, 2))
        if expansion:
            schedule.append((0, 0))
        tried_sets: set[frozenset[int]] = set()
        for rank, span in schedule:
            if time.monotonic() > deadline:
                break
            targets: list[ast.AstNode] = []
            seen_ids: set[int] = set()
            for hunk, seeds in zip(hunks_here, seed_lists):
                probs = block_probs(hunk.block_id)
                seed = seeds[min(rank, len(seeds) - 1)]
                if expansion:
                    window = expand_with_models(seed, rmethod, models.classifier,
                                                dependent, window=cfg["window"])
                else:
                    window = [seed]
                if span == 1:
                    chosen = [seed]
                elif span == 2:
                    others = sorted((s for s in window if s.id != seed.id),
                                    key=lambda s: (-probs.get(s.id, 0.0),
                                                   -report.score_of(s.id), s.id))
                    chosen = [seed] + others[:1]
                else:
                    chosen = window
                for stmt in chosen:
                    if stmt.id not in seen_ids:
                        seen_ids.add(stmt.id)
                        targets.append(stmt)
            targets.sort(key=lambda s: s.id)
            key = frozenset(seen_ids)
            if key in tried_sets:
                continue
            tried_sets.add(key)

            # refinement sweep: contexts see earlier targets at their current fix
            plans: list[TargetPlan] = []
            replacements: list[Replacement] = []
            for stmt in targets:
                context = build_fixing_context(rmethod, stmt.id, list(replacements))
                plan = TargetPlan(stmt_id=stmt.id, buggy=stmt, context=context)
                plans.append(plan)
                top1 = greedy_fix(models.repair, plan, callables)
                if top1 is not None:
                    replacements.append(Replacement(stmt.id, top1))
            patches = generate_candidates(models.repair, plans, callables,
                                          beam_width=cfg["beam_width"],
                                          top_tokens=cfg["top_tokens"])
            candidates = postprocess(patches, rmethod, reverse, program,
                                     best_method, unparse(program))
            total_candidates += len(candidates)
            remaining = max(deadline - time.monotonic(), 0.0)
            outcome = validate_candidates(candidates, tests, budget_s=remaining,
                                          expected_source=bug.after_src)
            tried_total += outcome.tried
            if outcome.plausible_rank is not None:
                merged = ValidationOutcome(tried_total, outcome.plausible_rank,
                                           outcome.plausible_source,
                                           outcome.correct, outcome.elapsed_ms)
                return done(merged, len(groups), total_candidates)
    return done(ValidationOutcome(tried_total, None, None, None, 0),
                len(groups), total_candidates, "no plausible candidate")


def evaluate(bugs: Sequence[LoadedBug], models: TrainedModels,
             config: dict | None = None, detection: bool = True,
             expansion: bool = True,
             progress: Optional[Callable[[str], None]] = None) -> list[FixOutcome]:
    outcomes = []
    for bug in bugs:
        outcome = fix_bug(bug, models, config, detection=detection,
                          expansion=expansion)
        outcomes.append(outcome)
        if progress:
            state = (f"rank {outcome.plausible_rank}"
                     if outcome.plausible_rank is not None else "no fix")
            progress(f"{bug.bug_id}: {state} ({outcome.wall_clock_ms} ms)")
    return outcomes
