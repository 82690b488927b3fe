"""Spectrum-based fault localization with the Ochiai coefficient."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .lang.testing import CoverageMatrix


class NoFailingTests(Exception):
    """Localization is undefined when every test passes."""


@dataclass(frozen=True)
class ScoredStatement:
    stmt_id: int
    score: float


@dataclass
class SuspiciousnessReport:
    """Statements ordered by score descending, ties by ascending statement id."""
    entries: list[ScoredStatement]

    def score_of(self, stmt_id: int) -> float:
        for entry in self.entries:
            if entry.stmt_id == stmt_id:
                return entry.score
        return 0.0

    def to_json(self) -> str:
        return json.dumps(
            [{"stmtId": e.stmt_id, "score": e.score} for e in self.entries],
            indent=2)

    def save(self, path: Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @staticmethod
    def load(path: Path) -> "SuspiciousnessReport":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return SuspiciousnessReport(
            [ScoredStatement(int(d["stmtId"]), float(d["score"])) for d in data])


def ochiai(coverage: CoverageMatrix) -> SuspiciousnessReport:
    """score(s) = e_f(s) / sqrt(F * (e_f(s) + e_p(s))); 0 when the denominator is 0.

    Every statement executed by at least one test appears in the report, so the
    ones touched by failing tests are always present.
    """
    failing = [t for t, ok in coverage.passed.items() if not ok]
    if not failing:
        raise NoFailingTests("all tests pass; nothing to localize")
    total_failing = len(failing)

    ef: dict[int, int] = {}
    ep: dict[int, int] = {}
    for test, stmts in coverage.executed.items():
        bucket = ef if not coverage.passed[test] else ep
        for sid in stmts:
            bucket[sid] = bucket.get(sid, 0) + 1

    entries = []
    for sid in coverage.all_statements():
        e_f = ef.get(sid, 0)
        e_p = ep.get(sid, 0)
        denom = math.sqrt(total_failing * (e_f + e_p))
        score = e_f / denom if denom > 0 else 0.0
        entries.append(ScoredStatement(sid, score))
    entries.sort(key=lambda e: (-e.score, e.stmt_id))
    return SuspiciousnessReport(entries)


def select_suspicious(report: SuspiciousnessReport, threshold: float = 0.0,
                      cap: int = 50) -> list[int]:
    """Statement ids feeding hunk formation: score strictly above threshold,
    truncated to the top `cap` entries in report order."""
    picked = [e.stmt_id for e in report.entries if e.score > threshold]
    return picked[:cap]
