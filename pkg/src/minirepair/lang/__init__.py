"""Mini-language front end: lexer, parser, unparser, interpreter, coverage."""

from . import ast
from .ast import AstNode, STMT_KINDS, assign_ids, structurally_equal, structural_key
from .lexer import ParseError, tokenize
from .parser import parse
from .unparser import UnparseError, render_expr, render_stmt, unparse
from .interp import (INT_MAX, INT_MIN, MiniRuntimeError, RunResult, TestCase,
                     execute)
from .testing import (CoverageMatrix, TestFormatError, all_tests_pass,
                      load_test_file, load_tests, run_tests, save_test)

__all__ = [
    "ast", "AstNode", "STMT_KINDS", "assign_ids", "structurally_equal",
    "structural_key", "ParseError", "tokenize", "parse", "UnparseError",
    "render_expr", "render_stmt", "unparse", "INT_MAX", "INT_MIN",
    "MiniRuntimeError", "RunResult", "TestCase", "execute", "CoverageMatrix",
    "TestFormatError", "all_tests_pass", "load_test_file", "load_tests",
    "run_tests", "save_test",
]
