"""Bug seeding: picks mutation sites per target bug type and validates the
seeded bug end to end (fixed passes, buggy fails, every partial restoration
still fails, and the differ agrees on the bug type)."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ..diffpair import bug_type_of_diff, diff
from ..lang import ast, parse, unparse
from ..lang.ast import AstNode
from ..lang.interp import TestCase, execute
from ..lang.testing import run_tests
from .mutate import SiteMutation, apply_sites, mutate_statement
from .progen import MAIN_NAMES, manifold_source, manifold_tests

MAX_ATTEMPTS = 80


@dataclass
class BugRecord:
    bug_type: int
    hunk_counts: list[int]
    before_src: str
    after_src: str
    tests: list[TestCase]
    info: dict = field(default_factory=dict)
    bug_id: str = ""


@dataclass
class _Roles:
    chain: list[AstNode]
    if_stmt: AstNode
    then_arm: AstNode
    else_arm: AstNode
    return_stmt: AstNode


def _roles(program: AstNode) -> _Roles:
    main = ast.methods(program)[-1]
    body = ast.method_body(main)
    chain = [s for s in body.children if s.kind == ast.VAR_DECL and s.label != "i"]
    if_stmt = next(s for s in body.children if s.kind == ast.IF)
    then_arm = if_stmt.children[1].children[0]
    else_arm = if_stmt.children[2].children[0]
    return_stmt = next(s for s in body.children if s.kind == ast.RETURN)
    return _Roles(chain, if_stmt, then_arm, else_arm, return_stmt)


def _visible_vars(program: AstNode, stmt: AstNode) -> list[str]:
    main = ast.methods(program)[-1]
    names = [ast.param_name_type(p)[0] for p in ast.method_params(main)]
    for s in main.statements():
        if (s.span[0], s.span[1]) >= (stmt.span[0], stmt.span[1]):
            break
        if s.kind == ast.VAR_DECL:
            names.append(s.label)
    return names


def _plan_sites(rng: random.Random, roles: _Roles, bug_type: int) -> list[AstNode]:
    chain = roles.chain
    k = len(chain)
    if bug_type == 1:
        pool = chain + [roles.if_stmt, roles.then_arm, roles.else_arm, roles.return_stmt]
        return [rng.choice(pool)]
    if bug_type == 2:
        if rng.random() < 0.5:
            i = rng.randrange(k - 1)
            return [chain[i], chain[i + 1]]
        return [roles.if_stmt, roles.then_arm]
    if bug_type == 3:
        picks = [
            lambda: [chain[0], chain[2]] if k >= 3 else None,
            lambda: [rng.choice(chain), roles.then_arm],
            lambda: [rng.choice(chain), roles.else_arm],
            lambda: [rng.choice(chain[:-1]), roles.return_stmt],
        ]
        plan = rng.choice(picks)()
        return plan if plan else [chain[0], roles.then_arm]
    if bug_type == 4:
        i = rng.randrange(k - 1)
        return [chain[i], chain[i + 1], roles.then_arm, roles.else_arm]
    if bug_type == 5:
        if rng.random() < 0.5:
            return [rng.choice(chain), roles.then_arm, roles.else_arm]
        i = rng.randrange(k - 1)
        return [chain[i], chain[i + 1], rng.choice([roles.then_arm, roles.else_arm])]
    raise ValueError(f"unknown bug type {bug_type}")


def _expected_tests(program: AstNode, entry: str, rng: random.Random) -> list[TestCase]:
    tests = []
    for idx, (a, b) in enumerate(manifold_tests(rng)):
        probe = TestCase(name=f"t{idx}", entry=entry, args=[a, b], expect=None)
        result = execute(program, probe)
        if not result.passed or result.value is None:
            return []
        tests.append(TestCase(name=f"t{idx}", entry=entry, args=[a, b],
                              expect=result.value))
    return tests


def _fails_some(source: str, tests: list[TestCase]) -> bool:
    program = parse(source)
    _, results = run_tests(program, tests)
    return any(not r.passed for r in results.values())


def seed_bug(rng: random.Random, bug_type: int,
             used_keys: set | None = None) -> BugRecord:
    for _ in range(MAX_ATTEMPTS):
        k = rng.choice([3, 4, 5])
        name = rng.choice(MAIN_NAMES)
        after_src = unparse(parse(manifold_source(k, name)))
        program = parse(after_src)
        tests = _expected_tests(program, name, rng)
        if not tests:
            continue
        roles = _roles(program)
        stmts = _plan_sites(rng, roles, bug_type)
        sites: list[SiteMutation] = []
        ok = True
        for stmt in stmts:
            site = mutate_statement(stmt, rng, _visible_vars(program, stmt))
            if site is None:
                ok = False
                break
            sites.append(site)
        if not ok:
            continue
        before_src = apply_sites(program, sites)
        if used_keys is not None and (before_src, after_src) in used_keys:
            continue
        try:
            before_prog = parse(before_src)
        except Exception:
            continue
        d = diff(before_prog, program)
        hunks, seen_type = bug_type_of_diff(d)
        if int(seen_type) != bug_type:
            continue
        # every nonempty subset of applied mutations must break some test
        necessary = True
        for r in range(1, len(sites) + 1):
            for subset in itertools.combinations(sites, r):
                if not _fails_some(apply_sites(program, list(subset)), tests):
                    necessary = False
                    break
            if not necessary:
                break
        if not necessary:
            continue
        if used_keys is not None:
            used_keys.add((before_src, after_src))
        return BugRecord(bug_type=bug_type,
                         hunk_counts=[len(h) for h in hunks],
                         before_src=before_src, after_src=after_src,
                         tests=tests,
                         info={"k": k, "entry": name,
                               "ops": [s.op_name for s in sites]})
    raise RuntimeError(f"could not seed a type-{bug_type} bug")


def build_corpus(type_counts: dict[int, int], rng: random.Random,
                 used_keys: set | None = None) -> list[BugRecord]:
    if used_keys is None:
        used_keys = set()
    queue: list[int] = []
    for btype, count in sorted(type_counts.items()):
        queue.extend([btype] * count)
    rng.shuffle(queue)
    return [seed_bug(rng, btype, used_keys) for btype in queue]
