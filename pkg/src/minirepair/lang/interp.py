"""Tree-walking interpreter with statement-level coverage instrumentation.

Semantics kept deliberately small and deterministic:
  * ints are 64-bit signed; overflow is a runtime error, not a wrap;
  * division and modulo truncate toward zero, dividing by zero is an error;
  * `let` introduces a method-scoped name once (redeclaration is an error),
    plain assignment requires the name to exist;
  * conditions must be booleans, operand type mismatches are errors.

Runtime errors and assertion failures mark the test failed; they never abort
the harness.  Coverage is the set of statement node ids whose evaluation began.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from . import ast
from .ast import AstNode

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

DEFAULT_MAX_STEPS = 200_000

BUILTINS = ("print", "assert", "assertEq")


class MiniRuntimeError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class _AssertionFailure(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value: Any):
        self.value = value


@dataclass
class TestCase:
    """One behavioral test: call `entry` with literal args and check the result.

    expect is the required return value; None means only "no assertion failure
    and no runtime error" is required.
    """
    name: str
    entry: str
    args: list = field(default_factory=list)
    expect: Any = None

    def to_dict(self) -> dict:
        return {"name": self.name, "entry": self.entry,
                "args": list(self.args), "expect": self.expect}

    @staticmethod
    def from_dict(data: dict) -> "TestCase":
        return TestCase(name=data["name"], entry=data["entry"],
                        args=list(data.get("args", [])),
                        expect=data.get("expect"))


@dataclass
class RunResult:
    passed: bool
    executed: frozenset[int]
    output: list[str]
    error: Optional[str] = None
    value: Any = None


def _type_name(value: Any) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, str):
        return "str"
    return type(value).__name__


def _check_int_range(value: int) -> int:
    if value < INT_MIN or value > INT_MAX:
        raise MiniRuntimeError("overflow", "integer overflow")
    return value


class _Interp:
    def __init__(self, program: AstNode, instrument: bool, max_steps: int):
        self.methods = {ast.method_name(m): m for m in ast.methods(program)}
        self.instrument = instrument
        self.max_steps = max_steps
        self.steps = 0
        self.executed: set[int] = set()
        self.output: list[str] = []

    def call(self, name: str, args: list) -> Any:
        method = self.methods.get(name)
        if method is None:
            raise MiniRuntimeError("undefined-method", f"no method named {name!r}")
        params = ast.method_params(method)
        if len(params) != len(args):
            raise MiniRuntimeError(
                "arity", f"{name} expects {len(params)} args, got {len(args)}")
        env: dict[str, Any] = {}
        for param, value in zip(params, args):
            pname, ptype = ast.param_name_type(param)
            if _type_name(value) != ptype:
                raise MiniRuntimeError(
                    "type", f"argument {pname} of {name} must be {ptype}")
            env[pname] = value
        try:
            self.exec_block(ast.method_body(method), env)
        except _ReturnSignal as ret:
            _, _, rtype = method.label.partition(":")
            if rtype and ret.value is not None and _type_name(ret.value) != rtype:
                raise MiniRuntimeError(
                    "type", f"{name} must return {rtype}") from None
            return ret.value
        return None

    def exec_block(self, block: AstNode, env: dict[str, Any]) -> None:
        for stmt in block.children:
            self.exec_stmt(stmt, env)

    def exec_stmt(self, stmt: AstNode, env: dict[str, Any]) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise MiniRuntimeError("steps", "step budget exceeded")
        if self.instrument:
            self.executed.add(stmt.id)
        kind = stmt.kind
        if kind == ast.VAR_DECL:
            if stmt.label in env:
                raise MiniRuntimeError("redecl", f"{stmt.label} already declared")
            env[stmt.label] = self.eval(stmt.children[0], env)
            return
        if kind == ast.ASSIGN:
            if stmt.label not in env:
                raise MiniRuntimeError("undef-var", f"{stmt.label} not declared")
            env[stmt.label] = self.eval(stmt.children[0], env)
            return
        if kind == ast.IF:
            cond = self.eval(stmt.children[0], env)
            if not isinstance(cond, bool):
                raise MiniRuntimeError("type", "if condition must be bool")
            if cond:
                self.exec_block(stmt.children[1], env)
            elif len(stmt.children) == 3:
                self.exec_block(stmt.children[2], env)
            return
        if kind == ast.WHILE:
            while True:
                cond = self.eval(stmt.children[0], env)
                if not isinstance(cond, bool):
                    raise MiniRuntimeError("type", "while condition must be bool")
                if not cond:
                    return
                self.exec_block(stmt.children[1], env)
                self.steps += 1
                if self.steps > self.max_steps:
                    raise MiniRuntimeError("steps", "step budget exceeded")
        if kind == ast.RETURN:
            value = self.eval(stmt.children[0], env) if stmt.children else None
            raise _ReturnSignal(value)
        if kind == ast.EXPR_STMT:
            self.eval(stmt.children[0], env)
            return
        raise MiniRuntimeError("bad-node", f"cannot execute {kind}")

    def eval(self, node: AstNode, env: dict[str, Any]) -> Any:
        kind = node.kind
        if kind == ast.INT_LIT:
            return _check_int_range(int(node.label))
        if kind == ast.BOOL_LIT:
            return node.label == "true"
        if kind == ast.STR_LIT:
            return node.label
        if kind == ast.VAR:
            if node.label not in env:
                raise MiniRuntimeError("undef-var", f"{node.label} not defined")
            return env[node.label]
        if kind == ast.UNARY_OP:
            value = self.eval(node.children[0], env)
            if node.label == "-":
                if isinstance(value, bool) or not isinstance(value, int):
                    raise MiniRuntimeError("type", "unary - needs int")
                return _check_int_range(-value)
            if node.label == "!":
                if not isinstance(value, bool):
                    raise MiniRuntimeError("type", "! needs bool")
                return not value
            raise MiniRuntimeError("bad-op", f"unknown operator {node.label!r}")
        if kind == ast.BIN_OP:
            return self.eval_binop(node, env)
        if kind == ast.CALL:
            return self.eval_call(node, env)
        raise MiniRuntimeError("bad-node", f"cannot evaluate {kind}")

    def eval_binop(self, node: AstNode, env: dict[str, Any]) -> Any:
        op = node.label
        if op in ("&&", "||"):
            left = self.eval(node.children[0], env)
            if not isinstance(left, bool):
                raise MiniRuntimeError("type", f"{op} needs bool operands")
            if op == "&&" and not left:
                return False
            if op == "||" and left:
                return True
            right = self.eval(node.children[1], env)
            if not isinstance(right, bool):
                raise MiniRuntimeError("type", f"{op} needs bool operands")
            return right
        left = self.eval(node.children[0], env)
        right = self.eval(node.children[1], env)
        if op in ("==", "!="):
            if _type_name(left) != _type_name(right):
                raise MiniRuntimeError("type", f"{op} needs matching types")
            return (left == right) if op == "==" else (left != right)
        if op == "+" and isinstance(left, str) and isinstance(right, str):
            return left + right
        int_ok = (isinstance(left, int) and not isinstance(left, bool)
                  and isinstance(right, int) and not isinstance(right, bool))
        if not int_ok:
            raise MiniRuntimeError("type", f"{op} needs int operands")
        if op == "+":
            return _check_int_range(left + right)
        if op == "-":
            return _check_int_range(left - right)
        if op == "*":
            return _check_int_range(left * right)
        if op in ("/", "%"):
            if right == 0:
                raise MiniRuntimeError("div-zero", "division by zero")
            quotient = abs(left) // abs(right)
            if (left < 0) != (right < 0):
                quotient = -quotient
            if op == "/":
                return _check_int_range(quotient)
            return _check_int_range(left - quotient * right)
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        raise MiniRuntimeError("bad-op", f"unknown operator {op!r}")

    def eval_call(self, node: AstNode, env: dict[str, Any]) -> Any:
        name = node.label
        args = [self.eval(a, env) for a in node.children]
        if name == "print":
            if len(args) != 1:
                raise MiniRuntimeError("arity", "print takes one argument")
            value = args[0]
            if isinstance(value, bool):
                self.output.append("true" if value else "false")
            else:
                self.output.append(str(value))
            return None
        if name == "assert":
            if len(args) != 1 or not isinstance(args[0], bool):
                raise MiniRuntimeError("type", "assert takes one bool")
            if not args[0]:
                raise _AssertionFailure()
            return None
        if name == "assertEq":
            if len(args) != 2:
                raise MiniRuntimeError("arity", "assertEq takes two arguments")
            if _type_name(args[0]) != _type_name(args[1]) or args[0] != args[1]:
                raise _AssertionFailure()
            return None
        return self.call(name, args)


def execute(program: AstNode, test: TestCase, instrument: bool = True,
            max_steps: int = DEFAULT_MAX_STEPS) -> RunResult:
    """Runs one test; never raises for in-language failures."""
    interp = _Interp(program, instrument, max_steps)
    try:
        value = interp.call(test.entry, list(test.args))
    except _AssertionFailure:
        return RunResult(False, frozenset(interp.executed), interp.output,
                         error="assertion failure")
    except MiniRuntimeError as err:
        return RunResult(False, frozenset(interp.executed), interp.output,
                         error=f"runtime error: {err}")
    if test.expect is not None:
        same = _type_name(value) == _type_name(test.expect) and value == test.expect
        if not same:
            return RunResult(False, frozenset(interp.executed), interp.output,
                             error=f"expected {test.expect!r}, got {value!r}",
                             value=value)
    return RunResult(True, frozenset(interp.executed), interp.output, value=value)
