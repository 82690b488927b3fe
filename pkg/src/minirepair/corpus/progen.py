"""Program generators.

manifold_source builds training/benchmark programs in a rigid house style:
every construct is a deterministic function of the chain length, so a mutation
always lands off-style and the one on-style completion is recoverable from
context.  random_program is a free-form generator for parser and differ
stress tests; it only promises syntactic validity.
"""

from __future__ import annotations

import random

CHAIN_VARS = ["c", "d", "e", "f", "g"]
OP_PALETTE = ["+", "*", "-"]
MAIN_NAMES = ["calc", "blend", "shift", "merge", "tally"]
HELPERS = """func twice(x: int): int {
  return x + x;
}

func bump(x: int): int {
  return x + 1;
}"""


def chain_op(i: int) -> str:
    return OP_PALETTE[i % 3]


def chain_operand(i: int) -> str:
    return "a" if i % 2 == 0 else "b"


def manifold_source(k: int, name: str) -> str:
    """House-style main method over helpers twice/bump.

    Chain of k lets with position-determined ops and operands, the last let
    wrapped in twice() when k >= 4, a fixed-shape branch, a counting loop when
    k is odd, and a final return.
    """
    if not 3 <= k <= 5:
        raise ValueError("chain length must be 3..5")
    lines = [f"func {name}(a: int, b: int): int {{"]
    for i in range(k):
        var = CHAIN_VARS[i]
        if i == 0:
            rhs = f"a {chain_op(0)} b"
        elif i == k - 1 and k >= 4:
            rhs = f"twice({CHAIN_VARS[i - 1]})"
        else:
            rhs = f"{CHAIN_VARS[i - 1]} {chain_op(i)} {chain_operand(i)}"
        lines.append(f"  let {var} = {rhs};")
    last = CHAIN_VARS[k - 1]
    lines.append("  if (a > b) {")
    lines.append(f"    {last} = {last} + a;")
    lines.append("  } else {")
    lines.append(f"    {last} = {last} - b;")
    lines.append("  }")
    if k % 2 == 1:
        lines.append("  let i = 0;")
        lines.append("  while (i < b) {")
        lines.append("    i = i + 1;")
        lines.append(f"    {last} = {last} + a;")
        lines.append("  }")
    lines.append(f"  return {last};")
    lines.append("}")
    return HELPERS + "\n\n" + "\n".join(lines)


def manifold_tests(rng: random.Random) -> list[tuple[int, int]]:
    """Argument pairs covering both branch arms (then arm iff a > b)."""
    args = [(rng.randint(4, 7), rng.randint(1, 3)),
            (rng.randint(5, 8), rng.randint(2, 4)),
            (rng.randint(1, 3), rng.randint(4, 7)),
            (rng.randint(0, 2), rng.randint(3, 6))]
    seen = set()
    out = []
    for pair in args:
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    while len(out) < 4:
        pair = (rng.randint(0, 8), rng.randint(1, 7))
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    return out


# ---------------------------------------------------------------------------
# free-form generator for parser / differ stress tests

_BIN_OPS = ["+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"]
_NAMES = ["a", "b", "x", "y", "z"]


def _expr(rng: random.Random, depth: int) -> str:
    if depth <= 0 or rng.random() < 0.35:
        roll = rng.random()
        if roll < 0.4:
            return rng.choice(_NAMES)
        if roll < 0.7:
            return str(rng.randint(0, 99))
        if roll < 0.8:
            return rng.choice(["true", "false"])
        if roll < 0.9:
            return '"' + rng.choice(["s", "t", "a\\nb"]) + '"'
        return f"{rng.choice(['f', 'g', 'twice'])}({_expr(rng, depth - 1)})"
    roll = rng.random()
    if roll < 0.15:
        return f"{rng.choice(['!', '-'])}{_expr(rng, depth - 1)}"
    if roll < 0.3:
        return f"({_expr(rng, depth - 1)})"
    return f"{_expr(rng, depth - 1)} {rng.choice(_BIN_OPS)} {_expr(rng, depth - 1)}"


def _stmt(rng: random.Random, depth: int, indent: str, counter: list[int]) -> list[str]:
    roll = rng.random()
    if roll < 0.3:
        counter[0] += 1
        return [f"{indent}let v{counter[0]} = {_expr(rng, depth)};"]
    if roll < 0.45:
        return [f"{indent}{rng.choice(_NAMES)} = {_expr(rng, depth)};"]
    if roll < 0.6 and depth > 0:
        body = _block(rng, depth - 1, indent + "  ", counter)
        lines = [f"{indent}if ({_expr(rng, depth - 1)}) {{", *body, f"{indent}}}"]
        if rng.random() < 0.5:
            lines[-1] = f"{indent}}} else {{"
            lines.extend(_block(rng, depth - 1, indent + "  ", counter))
            lines.append(f"{indent}}}")
        return lines
    if roll < 0.7 and depth > 0:
        body = _block(rng, depth - 1, indent + "  ", counter)
        return [f"{indent}while ({_expr(rng, depth - 1)}) {{", *body, f"{indent}}}"]
    if roll < 0.85:
        return [f"{indent}return {_expr(rng, depth)};"]
    return [f"{indent}print({_expr(rng, depth)});"]


def _block(rng: random.Random, depth: int, indent: str, counter: list[int]) -> list[str]:
    lines = []
    for _ in range(rng.randint(1, 3)):
        lines.extend(_stmt(rng, depth, indent, counter))
    return lines


def random_program(rng: random.Random, max_depth: int = 2) -> str:
    methods = []
    counter = [0]
    for m in range(rng.randint(1, 2)):
        name = rng.choice(["f", "g", "run", "main"]) + (str(m) if m else "")
        params = ", ".join(f"{p}: {rng.choice(['int', 'bool', 'str'])}"
                           for p in _NAMES[:rng.randint(1, 2)])
        ret = rng.choice(["int", "bool", "str"])
        body = _block(rng, max_depth, "  ", counter)
        methods.append(f"func {name}({params}): {ret} {{\n" + "\n".join(body) + "\n}")
    return "\n\n".join(methods)
