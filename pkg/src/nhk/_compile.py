"""Per-system compiled evaluators for expression grids.

The jet evaluator in ``expr`` is the reference semantics for grid
entries, but walking ASTs per point is too slow for inner loops
(simulation right-hand sides, large cross-validation sweeps).  Here
each system's grids are compiled once: partial derivatives are taken
symbolically on the AST (to second order), algebraically pruned, and
emitted as plain Python scalar code filling the packed value/gradient/
Hessian arrays directly.

Guarded operations (division, tan/sec poles, sqrt/ln domains, negative
integer powers at zero) keep the exact thresholds of the jet evaluator,
so both routes raise EvalError at the same points.  The test suite pins
compiled grids against jet evaluation on every system it touches.
"""

from __future__ import annotations

import math
import threading
from weakref import WeakKeyDictionary

import numpy as np

from ._linalg import Packed
from .errors import EvalError
from .expr import Binary, Expr, Num, Param, Unary, Var

__all__ = ["get_compiled", "CompiledSystem", "GridEval", "diff_expr"]


# ----------------------------------------------------- symbolic derivative
def _num(v) -> Num:
    return Num(float(v))


_ZERO = _num(0.0)
_ONE = _num(1.0)


def _is_num(e, v=None) -> bool:
    return isinstance(e, Num) and (v is None or e.value == v)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return _num(a.value * b.value)
    return Binary("mul", a, b)


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return _num(a.value + b.value)
    return Binary("add", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if _is_num(a) and _is_num(b):
        return _num(a.value - b.value)
    return Binary("sub", a, b)


def _neg(a):
    if _is_num(a):
        return _num(-a.value)
    if isinstance(a, Unary) and a.fn == "neg":
        return a.child
    return Unary("neg", a)


def _div(a, b):
    if _is_num(a, 0.0):
        return _ZERO
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        return _num(a.value / b.value)
    return Binary("div", a, b)


def _pow(a, k: int):
    if k == 0:
        return _ONE
    if k == 1:
        return a
    if _is_num(a):
        try:
            return _num(a.value ** k)
        except (ArithmeticError, ValueError):
            pass
    return Binary("pow", a, _num(k))


def _call(fn, a):
    if _is_num(a):
        table = {"sin": math.sin, "cos": math.cos, "tan": math.tan,
                 "exp": math.exp}
        if fn in table:
            try:
                return _num(table[fn](a.value))
            except (ArithmeticError, ValueError):
                pass
    return Unary(fn, a)


def diff_expr(e: Expr, var: str) -> Expr:
    """Symbolic partial derivative of a resolved, parameter-folded
    expression with respect to a coordinate, algebraically pruned."""
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, (Var, Param)):
        name = e.name
        return _ONE if (isinstance(e, Var) and name == var) else _ZERO
    if isinstance(e, Unary):
        u, du = e.child, diff_expr(e.child, var)
        if _is_num(du, 0.0):
            return _ZERO
        if e.fn == "neg":
            return _neg(du)
        if e.fn == "sin":
            return _mul(_call("cos", u), du)
        if e.fn == "cos":
            return _neg(_mul(_call("sin", u), du))
        if e.fn == "tan":
            return _mul(_add(_ONE, _pow(_call("tan", u), 2)), du)
        if e.fn == "sec":
            return _mul(_mul(_call("sec", u), _call("tan", u)), du)
        if e.fn == "sqrt":
            return _div(du, _mul(_num(2.0), _call("sqrt", u)))
        if e.fn == "exp":
            return _mul(_call("exp", u), du)
        if e.fn == "ln":
            return _div(du, u)
        raise AssertionError(f"unknown function {e.fn!r}")
    if isinstance(e, Binary):
        l, r = e.left, e.right
        if e.op == "add":
            return _add(diff_expr(l, var), diff_expr(r, var))
        if e.op == "sub":
            return _sub(diff_expr(l, var), diff_expr(r, var))
        if e.op == "mul":
            return _add(_mul(diff_expr(l, var), r), _mul(l, diff_expr(r, var)))
        if e.op == "div":
            dl, dr = diff_expr(l, var), diff_expr(r, var)
            if _is_num(dr, 0.0):
                return _div(dl, r)
            return _div(_sub(_mul(dl, r), _mul(l, dr)), _pow(r, 2))
        if e.op == "pow":
            k = int(e.right.value)
            dl = diff_expr(l, var)
            if _is_num(dl, 0.0):
                return _ZERO
            return _mul(_mul(_num(k), _pow(l, k - 1)), dl)
        raise AssertionError(f"unknown operator {e.op!r}")
    raise AssertionError(f"unexpected node {type(e).__name__}")


# ----------------------------------------------------------------- codegen
def _emit(e: Expr, idx: dict) -> str:
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, (Var, Param)):
        return f"q[{idx[e.name]}]"
    if isinstance(e, Unary):
        u = _emit(e.child, idx)
        if e.fn == "neg":
            return f"(-{u})"
        if e.fn in ("sin", "cos", "exp"):
            return f"{e.fn}({u})"
        return f"_{e.fn}({u})"        # guarded: _tan, _sec, _sqrt, _ln
    if isinstance(e, Binary):
        l = _emit(e.left, idx)
        if e.op == "pow":
            return f"_ipow({l}, {int(e.right.value)})"
        r = _emit(e.right, idx)
        if e.op == "div":
            return f"_div({l}, {r})"
        sym = {"add": "+", "sub": "-", "mul": "*"}[e.op]
        return f"({l} {sym} {r})"
    raise AssertionError(f"unexpected node {type(e).__name__}")


# guarded scalar functions, thresholds identical to the jet evaluator
def _g_div(a, b):
    if abs(b) <= 1e-14:
        raise EvalError("division by (near-)zero")
    return a / b


def _g_tan(x):
    c = math.cos(x)
    if abs(c) <= 1e-12:
        raise EvalError("tan evaluated too close to a pole")
    return math.sin(x) / c


def _g_sec(x):
    c = math.cos(x)
    if abs(c) <= 1e-12:
        raise EvalError("sec evaluated too close to a pole")
    return 1.0 / c


def _g_sqrt(x):
    if x <= 0.0:
        raise EvalError("sqrt requires a positive argument")
    return math.sqrt(x)


def _g_ln(x):
    if x <= 0.0:
        raise EvalError("ln requires a positive argument")
    return math.log(x)


def _g_ipow(x, k):
    if k < 0 and abs(x) <= 1e-14:
        raise EvalError("negative power of (near-)zero")
    return x ** k


_GLOBALS = {
    "sin": math.sin, "cos": math.cos, "exp": math.exp,
    "_tan": _g_tan, "_sec": _g_sec, "_sqrt": _g_sqrt, "_ln": _g_ln,
    "_div": _g_div, "_ipow": _g_ipow,
}


class GridEval:
    """Compiled evaluator of one expression grid to packed jets."""

    def __init__(self, grid, coord_names):
        rows = len(grid)
        cols = len(grid[0]) if rows else 0
        n = len(coord_names)
        idx = {name: i for i, name in enumerate(coord_names)}
        self.n = n
        self.shape = (rows, cols)
        self._val0 = np.zeros((rows, cols))
        self._d10 = np.zeros((n, rows, cols))
        self._d20 = np.zeros((n, n, rows, cols))
        s0, s1, s2 = [], [], []
        for i in range(rows):
            for j in range(cols):
                e = grid[i][j]
                if isinstance(e, Num):
                    self._val0[i, j] = e.value
                    continue
                s0.append(f" val[{i},{j}] = {_emit(e, idx)}")
                firsts = []
                for l in range(n):
                    dl = diff_expr(e, coord_names[l])
                    firsts.append(dl)
                    if _is_num(dl):
                        self._d10[l, i, j] = dl.value
                    else:
                        s1.append(f"  d1[{l},{i},{j}] = {_emit(dl, idx)}")
                for l in range(n):
                    for m in range(l, n):
                        dlm = diff_expr(firsts[l], coord_names[m])
                        if _is_num(dlm):
                            self._d20[l, m, i, j] = dlm.value
                            self._d20[m, l, i, j] = dlm.value
                        elif l == m:
                            s2.append(f"   d2[{l},{l},{i},{j}] = {_emit(dlm, idx)}")
                        else:
                            s2.append(f"   _t = {_emit(dlm, idx)}")
                            s2.append(f"   d2[{l},{m},{i},{j}] = _t")
                            s2.append(f"   d2[{m},{l},{i},{j}] = _t")
        self._const = not (s0 or s1 or s2)
        if self._const:
            self._fill = None
        else:
            src = ["def _fill(q, val, d1, d2, order):"]
            src += s0 or [" pass"]
            src.append(" if order >= 1:")
            src += s1 or ["  pass"]
            src.append("  if order >= 2:")
            src += s2 or ["   pass"]
            ns = dict(_GLOBALS)
            exec(compile("\n".join(src), "<nhk-grid>", "exec"), ns)
            self._fill = ns["_fill"]

    def packed(self, q, order: int) -> Packed:
        val = self._val0.copy()
        d1 = self._d10.copy() if order >= 1 else None
        d2 = self._d20.copy() if order >= 2 else None
        if self._fill is not None:
            self._fill(q, val, d1, d2, order)
        return Packed(val, d1, d2)


class ScalarEval:
    """Compiled evaluator of one scalar expression (value, grad, hess)."""

    def __init__(self, e, coord_names):
        self._grid = GridEval([[e]], coord_names)

    def evaluate(self, q, order: int):
        p = self._grid.packed(q, order)
        value = float(p.val[0, 0])
        grad = p.d1[:, 0, 0].copy() if order >= 1 else None
        hess = p.d2[:, :, 0, 0].copy() if order >= 2 else None
        return value, grad, hess


class CompiledSystem:
    def __init__(self, system):
        names = system.coord_names
        self.metric = GridEval(system._metric_c, names)
        self.eps = GridEval(system._constraints_c, names) \
            if system.k > 0 else None
        self.w = GridEval(system._w_frame_c, names) \
            if system._w_frame_c is not None else None
        self.d = GridEval(system._d_frame_c, names) \
            if system._d_frame_c is not None else None
        self.potential = ScalarEval(system._potential_c, names)


_CACHE: WeakKeyDictionary = WeakKeyDictionary()
_LOCK = threading.Lock()


def get_compiled(system) -> CompiledSystem:
    comp = _CACHE.get(system)
    if comp is None:
        with _LOCK:
            comp = _CACHE.get(system)
            if comp is None:
                comp = CompiledSystem(system)
                _CACHE[system] = comp
    return comp
