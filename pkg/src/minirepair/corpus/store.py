"""Corpus directory layout: corpus/<bugId>/{before,after,tests,meta}."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..lang.interp import TestCase
from ..lang.testing import TestFormatError, load_tests, save_test
from .seed import BugRecord


class CorpusError(Exception):
    pass


@dataclass
class LoadedBug:
    bug_id: str
    before_src: str
    after_src: str
    tests: list[TestCase]
    meta: dict

    @property
    def bug_type(self) -> int:
        return int(self.meta["type"])


def save_bug(root: Path, record: BugRecord, bug_id: str) -> Path:
    bug_dir = Path(root) / bug_id
    (bug_dir / "before").mkdir(parents=True, exist_ok=True)
    (bug_dir / "after").mkdir(parents=True, exist_ok=True)
    (bug_dir / "tests").mkdir(parents=True, exist_ok=True)
    (bug_dir / "before" / "main.mini").write_text(record.before_src + "\n")
    (bug_dir / "after" / "main.mini").write_text(record.after_src + "\n")
    for test in record.tests:
        save_test(bug_dir / "tests", test)
    meta = {"bugId": bug_id, "type": record.bug_type,
            "hunkStmtCounts": record.hunk_counts, **record.info}
    (bug_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return bug_dir


def save_corpus(root: Path, records: list[BugRecord], prefix: str = "b") -> list[str]:
    ids = []
    for idx, record in enumerate(records):
        bug_id = f"{prefix}{idx:04d}"
        record.bug_id = bug_id
        save_bug(root, record, bug_id)
        ids.append(bug_id)
    return ids


def load_bug(bug_dir: Path) -> LoadedBug:
    bug_dir = Path(bug_dir)
    try:
        before = (bug_dir / "before" / "main.mini").read_text()
        after = (bug_dir / "after" / "main.mini").read_text()
        meta = json.loads((bug_dir / "meta.json").read_text())
        tests = load_tests(bug_dir / "tests")
    except FileNotFoundError as exc:
        raise CorpusError(f"incomplete bug directory {bug_dir}: {exc}") from exc
    except (json.JSONDecodeError, TestFormatError) as exc:
        raise CorpusError(f"malformed bug data in {bug_dir}: {exc}") from exc
    if not tests:
        raise CorpusError(f"no tests in {bug_dir}")
    return LoadedBug(bug_id=meta.get("bugId", bug_dir.name),
                     before_src=before, after_src=after, tests=tests, meta=meta)


def load_corpus(root: Path) -> list[LoadedBug]:
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root {root} is not a directory")
    bugs = []
    for entry in sorted(root.iterdir()):
        if entry.is_dir():
            bugs.append(load_bug(entry))
    if not bugs:
        raise CorpusError(f"corpus root {root} has no bug directories")
    return bugs
