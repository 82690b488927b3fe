"""Test execution harness and the per-test coverage matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .ast import AstNode
from .interp import DEFAULT_MAX_STEPS, RunResult, TestCase, execute


@dataclass
class CoverageMatrix:
    """Per-test executed statement sets and pass/fail flags, insertion ordered."""
    executed: dict[str, frozenset[int]] = field(default_factory=dict)
    passed: dict[str, bool] = field(default_factory=dict)

    def add(self, name: str, executed: frozenset[int], passed: bool) -> None:
        self.executed[name] = executed
        self.passed[name] = passed

    @property
    def test_names(self) -> list[str]:
        return list(self.executed)

    def failing(self) -> list[str]:
        return [t for t, ok in self.passed.items() if not ok]

    def all_statements(self) -> set[int]:
        out: set[int] = set()
        for stmts in self.executed.values():
            out |= stmts
        return out


def run_tests(program: AstNode, tests: list[TestCase], instrument: bool = True,
              max_steps: int = DEFAULT_MAX_STEPS) -> tuple[CoverageMatrix, dict[str, RunResult]]:
    matrix = CoverageMatrix()
    results: dict[str, RunResult] = {}
    for test in tests:
        result = execute(program, test, instrument=instrument, max_steps=max_steps)
        matrix.add(test.name, result.executed, result.passed)
        results[test.name] = result
    return matrix, results


def all_tests_pass(program: AstNode, tests: list[TestCase],
                   max_steps: int = DEFAULT_MAX_STEPS) -> bool:
    for test in tests:
        if not execute(program, test, instrument=False, max_steps=max_steps).passed:
            return False
    return True


class TestFormatError(ValueError):
    """Malformed .test.json content."""


def load_test_file(path: Path) -> TestCase:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise TestFormatError(f"{path}: invalid JSON ({err})") from err
    if not isinstance(data, dict) or "name" not in data or "entry" not in data:
        raise TestFormatError(f"{path}: test files need name and entry fields")
    args = data.get("args", [])
    if not isinstance(args, list):
        raise TestFormatError(f"{path}: args must be a list")
    for value in args + [data.get("expect")]:
        if value is not None and not isinstance(value, (bool, int, str)):
            raise TestFormatError(f"{path}: literals must be int, bool or str")
    return TestCase.from_dict(data)


def load_tests(tests_dir: Path) -> list[TestCase]:
    """Loads <dir>/*.test.json sorted by file name."""
    tests = []
    for path in sorted(Path(tests_dir).glob("*.test.json")):
        tests.append(load_test_file(path))
    return tests


def save_test(tests_dir: Path, test: TestCase) -> Path:
    path = Path(tests_dir) / f"{test.name}.test.json"
    path.write_text(json.dumps(test.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path
