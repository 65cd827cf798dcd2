"""Restricted arithmetic expressions over the variables j and v.

Accepted: numbers, the names ``j``, ``v``, ``pi``, ``e``, the functions
``log``, ``exp``, ``sqrt``, ``abs``, ``min``, ``max``, and the operators
``+ - * / ** %`` with unary signs. Anything else is rejected before evaluation.
"""

from __future__ import annotations

import ast
import math
import operator

import numpy as np


class ExpressionError(ValueError):
    pass


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.Mod: operator.mod,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}


def parse(text: str) -> ast.Expression:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.Load)) or type(node) in _BINOPS or type(node) in _UNARY:
            continue
        if isinstance(node, (ast.BinOp, ast.UnaryOp)):
            op = node.op
            if type(op) not in _BINOPS and type(op) not in _UNARY:
                raise ExpressionError(f"operator {type(op).__name__} not allowed")
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            continue
        if isinstance(node, ast.Name) and (node.id in ("j", "v") or node.id in _CONSTS or node.id in _FUNCS):
            continue
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
            continue
        raise ExpressionError(f"{type(node).__name__} not allowed in {text!r}")
    return tree


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        raise ExpressionError(f"name {node.id!r} used as a value")
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, env))
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](*[_eval(a, env) for a in node.args])
    raise ExpressionError(f"unsupported node {type(node).__name__}")


def evaluate(text: str, j=1, v=1):
    """Evaluate ``text`` with numpy broadcasting over j and v (floats)."""
    tree = parse(text)
    env = {"j": np.asarray(j, dtype=float), "v": np.asarray(v, dtype=float)}
    with np.errstate(all="ignore"):
        try:
            out = _eval(tree, env)
        except (OverflowError, ZeroDivisionError, TypeError) as exc:
            raise ExpressionError(f"cannot evaluate {text!r}: {exc}") from None
    return np.asarray(out, dtype=float)


def sequence(text: str, s: int, nu_max: int = 1) -> np.ndarray:
    """Values for j = 1..s; shape (s,) when nu_max = 1, else (s, nu_max) with v = 1..nu_max."""
    j = np.arange(1, s + 1, dtype=float)
    if nu_max == 1:
        out = np.broadcast_to(evaluate(text, j, 1.0), (s,)).copy()
    else:
        v = np.arange(1, nu_max + 1, dtype=float)
        out = np.broadcast_to(evaluate(text, j[:, None], v[None, :]), (s, nu_max)).copy()
    if not np.all(np.isfinite(out)):
        raise ExpressionError(f"{text!r} is not finite for every j")
    return out


def scalar(text: str) -> float:
    """A constant expression (no j or v), e.g. ``1/log(2)``."""
    if any(isinstance(n, ast.Name) and n.id in ("j", "v") for n in ast.walk(parse(text))):
        raise ExpressionError(f"{text!r} must not depend on j or v")
    out = evaluate(text)
    if out.ndim != 0 or not np.isfinite(out):
        raise ExpressionError(f"{text!r} is not a finite scalar")
    return float(out)
