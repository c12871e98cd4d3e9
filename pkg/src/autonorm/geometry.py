"""Hamiltonian vector fields, time-t flows and words of flows on (R^2n, sum dx_i ^ dy_i).

A :class:`DiffeoWord` ``(w1, w2, ..., wk)`` denotes ``w1 o w2 o ... o wk``;
the rightmost letter acts first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _jit
from .expr import Box, HamiltonianExpr

SCHEMES = {"rk4": 0, "midpoint": 1}


class StepOverflow(RuntimeError):
    """Raised when a flow would need more than ``max_steps`` substeps."""


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "rk4"
    step: float = 1e-3
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {sorted(SCHEMES)}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def substeps(self, duration: float) -> tuple[int, float, float]:
        """(count, regular step, final step) covering ``duration`` exactly."""
        if duration == 0.0:
            return 0, 0.0, 0.0
        span = abs(duration)
        count = max(1, math.ceil(span / self.step - 1e-9))
        if count > self.max_steps:
            raise StepOverflow(f"{count} substeps needed, max_steps={self.max_steps}")
        sign = math.copysign(1.0, duration)
        last = span - (count - 1) * self.step
        return count, sign * self.step, sign * last


DEFAULT_CONFIG = IntegratorConfig()


def omega_matrix(n: int) -> np.ndarray:
    """Matrix of the standard form in the (x1, y1, ..., xn, yn) ordering."""
    blk = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n), blk)


def vector_field(F: HamiltonianExpr, z: Sequence[float]) -> np.ndarray:
    """X_F with omega(X_F, .) = dF, i.e. (dF/dy_i, -dF/dx_i) per pair."""
    g = F.grad(z)
    out = np.empty(F.dim)
    out[0::2] = g[1::2]
    out[1::2] = [-v for v in g[0::2]]
    return out


def _flow_array(F: HamiltonianExpr, t: float, Z: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    count, h, last = cfg.substeps(t)
    if count == 0 or Z.shape[0] == 0:
        return Z.copy()
    box = F.support
    out = Z.copy()
    active = _inside(box, Z)
    if active.any():
        kernel = _jit.compiled_field(F)
        out[active] = _jit.flow_points(kernel, Z[active], h, count, last, SCHEMES[cfg.scheme])
    return out


def _inside(box: Box, Z: np.ndarray) -> np.ndarray:
    if box.empty:
        return np.zeros(Z.shape[0], dtype=bool)
    lo = np.array([a for a, _ in box.intervals])
    hi = np.array([b for _, b in box.intervals])
    return np.all((Z >= lo) & (Z <= hi), axis=1)


def flow(F: HamiltonianExpr, t: float, z: Sequence[float], cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Time-``t`` flow of X_F; points outside the support box are returned untouched."""
    Z = np.asarray(z, dtype=float).reshape(1, -1)
    if Z.shape[1] != F.dim:
        raise ValueError(f"point has {Z.shape[1]} coordinates, expected {F.dim}")
    return _flow_array(F, t, Z, cfg)[0]


def flow_many(F: HamiltonianExpr, t: float, Z: np.ndarray, cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    return _flow_array(F, t, np.asarray(Z, dtype=float).reshape(-1, F.dim), cfg)


def flow_substeps(F: HamiltonianExpr, t: float, z: Sequence[float], cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Every accepted substep of the flow: (times, points) with the start included."""
    count, h, last = cfg.substeps(t)
    z = np.asarray(z, dtype=float)
    if count == 0:
        return np.zeros(1), z.reshape(1, -1)
    rows = _jit.flow_trace(_jit.compiled_field(F), z, h, count, last, SCHEMES[cfg.scheme])
    times = np.concatenate([[0.0], np.abs(h) * np.arange(1, count), [abs(t)]])
    return times, rows


# ---------------------------------------------------------------- words


@dataclass(frozen=True)
class Letter:
    """Time-``duration`` flow of an autonomous Hamiltonian; ``tag`` is a label only."""

    hamiltonian: HamiltonianExpr
    duration: float = 1.0
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.hamiltonian.support.bounded:
            raise ValueError(f"letter Hamiltonian {self.hamiltonian} has no certified bounded support")

    def inverse(self) -> Letter:
        return Letter(self.hamiltonian, -self.duration, self.tag)


Guard = Callable[[Letter, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class DiffeoWord:
    letters: tuple[Letter, ...] = ()

    @classmethod
    def of(cls, F: HamiltonianExpr, duration: float = 1.0, tag: str = "") -> DiffeoWord:
        return cls((Letter(F, duration, tag),))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: DiffeoWord) -> DiffeoWord:
        """Composition: ``(u * v)(z) = u(v(z))``."""
        return DiffeoWord(self.letters + other.letters)

    def __pow__(self, k: int) -> DiffeoWord:
        base = self if k >= 0 else invert_word(self)
        return DiffeoWord(base.letters * abs(k))

    def __call__(self, z, cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
        return evaluate_word(self, z, cfg)


def compose(words: Iterable[DiffeoWord]) -> DiffeoWord:
    letters: list[Letter] = []
    for w in words:
        letters.extend(w.letters)
    return DiffeoWord(tuple(letters))


def invert_word(w: DiffeoWord) -> DiffeoWord:
    return DiffeoWord(tuple(letter.inverse() for letter in reversed(w.letters)))


def conjugate_word(w: DiffeoWord, by: DiffeoWord) -> DiffeoWord:
    """``by o w o by^-1``."""
    return by * w * invert_word(by)


def evaluate_many(
    w: DiffeoWord,
    Z: np.ndarray,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    guard: Guard | None = None,
) -> np.ndarray:
    """Apply ``w`` to each row of ``Z``.

    ``guard(letter, before, after)`` is called for every letter with the
    points it was applied to, so callers can monitor where flows are used.
    """
    Z = np.array(Z, dtype=float, ndmin=2)
    for letter in reversed(w.letters):
        new = _flow_array(letter.hamiltonian, letter.duration, Z, cfg)
        if guard is not None:
            guard(letter, Z, new)
        Z = new
    return Z


def evaluate_word(w: DiffeoWord, z: Sequence[float], cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    return evaluate_many(w, np.asarray(z, dtype=float).reshape(1, -1), cfg)[0]


def trace_word(w: DiffeoWord, z: Sequence[float], cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Orbit of ``z`` through every substep of every letter (rightmost first).

    Every letter is integrated here, even away from its support, so the
    output has one row per accepted substep.
    """
    z = np.asarray(z, dtype=float)
    times, rows = [np.zeros(1)], [z.reshape(1, -1)]
    clock = 0.0
    for letter in reversed(w.letters):
        t, pts = flow_substeps(letter.hamiltonian, letter.duration, rows[-1][-1], cfg)
        times.append(clock + t[1:])
        rows.append(pts[1:])
        clock += abs(letter.duration)
    return np.concatenate(times), np.concatenate(rows)


MapLike = DiffeoWord | Callable[[np.ndarray], np.ndarray]


def _apply(w: MapLike, Z: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    if isinstance(w, DiffeoWord):
        return evaluate_many(w, Z, cfg)
    return np.array([w(p) for p in Z], dtype=float)


def jacobian(w: MapLike, z: Sequence[float], eps: float = 1e-5, cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Central finite-difference Jacobian of a word (or any map) at ``z``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    z = np.asarray(z, dtype=float)
    d = z.size
    offsets = np.concatenate([np.eye(d), -np.eye(d)]) * eps
    images = _apply(w, z + offsets, cfg)
    return ((images[:d] - images[d:]) / (2 * eps)).T


def jacobians(w: DiffeoWord, Z: np.ndarray, eps: float = 1e-5, cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Finite-difference Jacobians at every row of ``Z`` in one batched evaluation."""
    Z = np.asarray(Z, dtype=float)
    N, d = Z.shape
    offsets = np.concatenate([np.eye(d), -np.eye(d)]) * eps
    images = evaluate_many(w, (Z[:, None, :] + offsets[None]).reshape(-1, d), cfg).reshape(N, 2 * d, d)
    return np.transpose((images[:, :d] - images[:, d:]) / (2 * eps), (0, 2, 1))


def symplectic_residual(w: MapLike, z: Sequence[float], eps: float = 1e-5, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """max |J^T Omega J - Omega|.  For n = 1 this equals |det J - 1|."""
    J = jacobian(w, z, eps, cfg)
    Om = omega_matrix(J.shape[0] // 2)
    return float(np.max(np.abs(J.T @ Om @ J - Om)))


def pushforward_flow(
    psi: DiffeoWord,
    F: HamiltonianExpr,
    z: Sequence[float],
    t: float = 1.0,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    step: float = 0.005,
    eps: float = 1e-5,
) -> np.ndarray:
    """Integrate the field ``D psi . X_F o psi^-1`` directly with fixed-step RK4.

    Sheared ``psi`` make this field stiff: bump-generated maps need a step
    near 5e-3 for 1e-4 agreement.

    This is the flow of ``F o psi^-1``; comparing it with ``psi o phi_F^t o psi^-1``
    tests the conjugation law without ever writing ``F o psi^-1`` down.
    """
    inv = invert_word(psi)

    def field(p):
        q = evaluate_word(inv, p, cfg)
        return jacobian(psi, q, eps, cfg) @ vector_field(F, q)

    y = np.asarray(z, dtype=float).copy()
    count = max(1, math.ceil(abs(t) / step - 1e-9))
    h = t / count
    for _ in range(count):
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y
