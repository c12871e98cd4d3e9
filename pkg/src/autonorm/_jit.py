"""Compile Hamiltonian expressions to numba kernels and integrate their flows.

Each expression becomes straight-line scalar code computing the symplectic
gradient ``(dF/dy1, -dF/dx1, ...)`` in place; the integrators below are
specialised per field by numba.
"""

from __future__ import annotations

import math
import threading

import numba as nb
import numpy as np

from . import expr as E


@nb.njit(cache=True)
def _bump_d(t):
    if abs(t) >= 1.0:
        return 0.0, 0.0
    u = 1.0 - t * t
    b = math.exp(1.0 - 1.0 / u)
    if b == 0.0:
        return 0.0, 0.0
    return b, b * (-2.0 * t) / (u * u)


@nb.njit(cache=True)
def _sig(t):
    if t > 0.0:
        s = math.exp(-1.0 / t)
        if s > 0.0:
            return s, s / (t * t)
    return 0.0, 0.0


@nb.njit(cache=True)
def _step_d(t):
    if t <= 0.0:
        return 0.0, 0.0
    if t >= 1.0:
        return 1.0, 0.0
    p, dp = _sig(t)
    q, dq = _sig(1.0 - t)
    d = p + q
    return p / d, (dp * q + p * dq) / (d * d)


def _codegen(root: E.Node, dim: int) -> str:
    lines: list[str] = []
    memo: dict[E.Node, tuple[str, dict[int, str]]] = {}
    counter = [0]

    def fresh(prefix: str) -> str:
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def emit(node: E.Node) -> tuple[str, dict[int, str]]:
        if node in memo:
            return memo[node]
        if isinstance(node, E.Const):
            res = (repr(node.value), {})
        elif isinstance(node, E.Var):
            v = fresh("v")
            lines.append(f"{v} = z[{node.index}]")
            res = (v, {node.index: "1.0"})
        elif isinstance(node, E.Neg):
            a, da = emit(node.arg)
            v = fresh("v")
            lines.append(f"{v} = -{a}")
            res = (v, {j: _assign(lines, fresh("d"), f"-{d}") for j, d in da.items()})
        elif isinstance(node, E.Pow):
            a, da = emit(node.base)
            k = node.exponent
            v = fresh("v")
            if k == 0:
                lines.append(f"{v} = 1.0")
                res = (v, {})
            else:
                c = fresh("c")
                lines.append(f"{v} = {a} ** {k}")
                lines.append(f"{c} = {k}.0 * {a} ** {k - 1}")
                res = (v, {j: _assign(lines, fresh("d"), f"{c} * {d}") for j, d in da.items()})
        elif isinstance(node, E.Call):
            a, da = emit(node.arg)
            v, c = fresh("v"), fresh("c")
            if node.func == "exp":
                lines.append(f"{v} = math.exp({a})")
                lines.append(f"{c} = {v}")
            else:
                lines.append(f"{v}, {c} = _{node.func}_d({a})")
            res = (v, {j: _assign(lines, fresh("d"), f"{c} * {d}") for j, d in da.items()})
        else:
            a, da = emit(node.left)
            b, db = emit(node.right)
            v = fresh("v")
            ders: dict[int, str] = {}
            keys = sorted(set(da) | set(db))
            if isinstance(node, (E.Add, E.Sub)):
                op = "+" if isinstance(node, E.Add) else "-"
                lines.append(f"{v} = {a} {op} {b}")
                for j in keys:
                    p, q = da.get(j, "0.0"), db.get(j, "0.0")
                    ders[j] = _assign(lines, fresh("d"), f"{p} {op} {q}")
            elif isinstance(node, E.Mul):
                lines.append(f"{v} = {a} * {b}")
                for j in keys:
                    p, q = da.get(j, "0.0"), db.get(j, "0.0")
                    ders[j] = _assign(lines, fresh("d"), f"{p} * {b} + {a} * {q}")
            else:
                lines.append(f"{v} = {a} / {b}")
                for j in keys:
                    p, q = da.get(j, "0.0"), db.get(j, "0.0")
                    ders[j] = _assign(lines, fresh("d"), f"({p} * {b} - {a} * {q}) / ({b} * {b})")
            res = (v, ders)
        memo[node] = res
        return res

    _, grad = emit(root)
    for i in range(dim // 2):
        lines.append(f"out[{2 * i}] = {grad.get(2 * i + 1, '0.0')}")
        lines.append(f"out[{2 * i + 1}] = -({grad.get(2 * i, '0.0')})")
    body = "\n".join("    " + ln for ln in lines)
    return f"def field(z, out):\n{body}\n"


def _assign(lines: list[str], name: str, rhs: str) -> str:
    lines.append(f"{name} = {rhs}")
    return name


_cache: dict[tuple[E.Node, int], object] = {}
_lock = threading.Lock()


def compiled_field(e: E.HamiltonianExpr):
    """Numba kernel ``field(z, out)`` writing the Hamiltonian vector field of ``e``."""
    key = (e.root, e.dim)
    with _lock:
        fn = _cache.get(key)
        if fn is None:
            ns = {"math": math, "_bump_d": _bump_d, "_step_d": _step_d}
            exec(_codegen(e.root, e.dim), ns)
            fn = nb.njit(ns["field"])
            _cache[key] = fn
    return fn


# ---------------------------------------------------------------- integrators


@nb.njit
def _rk4_step(field, y, h, k1, k2, k3, k4, tmp):
    n = y.shape[0]
    field(y, k1)
    for i in range(n):
        tmp[i] = y[i] + 0.5 * h * k1[i]
    field(tmp, k2)
    for i in range(n):
        tmp[i] = y[i] + 0.5 * h * k2[i]
    field(tmp, k3)
    for i in range(n):
        tmp[i] = y[i] + h * k3[i]
    field(tmp, k4)
    for i in range(n):
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@nb.njit
def _midpoint_step(field, y, h, k, knew, tmp):
    n = y.shape[0]
    field(y, k)
    for _ in range(200):
        for i in range(n):
            tmp[i] = y[i] + 0.5 * h * k[i]
        field(tmp, knew)
        diff = 0.0
        scale = 1.0
        for i in range(n):
            diff = max(diff, abs(knew[i] - k[i]))
            scale = max(scale, abs(knew[i]))
            k[i] = knew[i]
        if diff <= 1e-15 * scale:
            break
    for i in range(n):
        y[i] += h * k[i]


@nb.njit
def _flow_batch(field, Z, h, nsteps, last, scheme):
    n = Z.shape[1]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    out = Z.copy()
    for p in range(Z.shape[0]):
        y = out[p]
        for s in range(nsteps):
            hs = h if s < nsteps - 1 else last
            if scheme == 0:
                _rk4_step(field, y, hs, k1, k2, k3, k4, tmp)
            else:
                _midpoint_step(field, y, hs, k1, k2, tmp)
    return out


@nb.njit
def _flow_trace(field, z, h, nsteps, last, scheme):
    n = z.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    rows = np.empty((nsteps + 1, n))
    y = z.copy()
    rows[0] = y
    for s in range(nsteps):
        hs = h if s < nsteps - 1 else last
        if scheme == 0:
            _rk4_step(field, y, hs, k1, k2, k3, k4, tmp)
        else:
            _midpoint_step(field, y, hs, k1, k2, tmp)
        rows[s + 1] = y
    return rows


def flow_points(field, Z: np.ndarray, h: float, nsteps: int, last: float, scheme: int) -> np.ndarray:
    return _flow_batch(field, np.ascontiguousarray(Z, dtype=np.float64), h, nsteps, last, scheme)


def flow_trace(field, z: np.ndarray, h: float, nsteps: int, last: float, scheme: int) -> np.ndarray:
    return _flow_trace(field, np.ascontiguousarray(z, dtype=np.float64), h, nsteps, last, scheme)
