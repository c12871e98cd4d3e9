"""An autonomous Hamiltonian whose time-1 map translates a ball m times past itself.

On the tube ``|y1| <= r, |x_i|, |y_i| <= r (i >= 2)``, long in x1, the
Hamiltonian is exactly ``L * y1`` so its flow is the translation by ``L`` in
x1.  Cutoffs make it compactly supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .expr import Box, HamiltonianExpr, Node, call, x, y
from .geometry import DEFAULT_CONFIG, DiffeoWord, IntegratorConfig, evaluate_many
from .report import VerificationReport


@dataclass(frozen=True)
class DisplacementSpec:
    r: float
    m: int
    n: int = 1
    L: float | None = None  # defaults to 3r
    eps: float = 1.0
    allow_short: bool = False  # permit L <= 2r, for negative controls only

    def __post_init__(self):
        if self.L is None:
            object.__setattr__(self, "L", 3.0 * self.r)
        if not self.r > 0:
            raise ValueError("r must be positive")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not self.L > 2 * self.r and not self.allow_short:
            raise ValueError(f"L={self.L} does not exceed 2r={2 * self.r}: translated balls would overlap")

    @property
    def reach(self) -> float:
        """Half-length in x1 of the tube on which all cutoffs equal 1."""
        return (self.m + 2) * self.L + self.r

    def tube(self) -> Box:
        iv = [(-self.r, self.r)] * (2 * self.n)
        iv[0] = (-self.reach, self.reach)
        return Box(tuple(iv))

    def translated_ball_box(self, k: int) -> Box:
        return Box(((-self.r, self.r),) * (2 * self.n)).shifted(0, k * self.L)


def plateau(v: Node, a: float, b: float, eps: float) -> Node:
    """Smooth cutoff: 1 on [a, b], 0 outside [a - eps, b + eps]."""
    if not a < b:
        raise ValueError("plateau needs a < b")
    if not eps > 0:
        raise ValueError("plateau needs eps > 0")
    return call("step", (v - (a - eps)) / eps) * call("step", ((b + eps) - v) / eps)


def build_profile(spec: DisplacementSpec) -> HamiltonianExpr:
    """H1(y1) = L * y1 * plateau(y1; -r, r, eps): slope exactly L on [-r, r]."""
    y1 = y(1)
    return HamiltonianExpr(spec.L * y1 * plateau(y1, -spec.r, spec.r, spec.eps), spec.n)


def build_displacement_hamiltonian(spec: DisplacementSpec) -> HamiltonianExpr:
    node = build_profile(spec).root * plateau(x(1), -spec.reach, spec.reach, 1.0)
    for i in range(2, spec.n + 1):
        node = node * plateau(x(i), -spec.r, spec.r, 1.0) * plateau(y(i), -spec.r, spec.r, 1.0)
    return HamiltonianExpr(node, spec.n)


def ball_samples(r: float, dim: int, samples: int, seed: int = 0) -> np.ndarray:
    """Poles +-r e_j and the centre first, then seeded points on and inside the sphere."""
    fixed = [np.zeros(dim)]
    for j in range(dim):
        for s in (1.0, -1.0):
            p = np.zeros(dim)
            p[j] = s * r
            fixed.append(p)
    pts = np.array(fixed)
    extra = samples - len(pts)
    if extra <= 0:
        return pts[:samples]
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(extra, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    radii = r * rng.uniform(size=extra) ** (1.0 / dim)
    radii[: extra // 4] = r  # a quarter exactly on the sphere
    return np.vstack([pts, d * radii[:, None]])


def verify_displacement(
    h: DiffeoWord,
    spec: DisplacementSpec,
    samples: int = 200,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    seed: int = 0,
    translation_tol: float = 1e-6,
    separation_tol: float = 1e-3,
) -> VerificationReport:
    """Iterate ``h`` on sample points of B(r) and check the images stay apart.

    Images ``h^k(B)``, ``k = 0..m+1``, are compared pairwise (distinct k only).
    The verdict combines the analytic condition ``L > 2r`` with the sampled
    separation, which should approach ``L - 2r`` since the poles are sampled.
    """
    dim = 2 * spec.n
    Z = ball_samples(spec.r, dim, samples, seed)
    clouds = [Z]
    deviation = 0.0
    for k in range(1, spec.m + 2):
        img = evaluate_many(h, clouds[-1], cfg)
        expected = Z.copy()
        expected[:, 0] += k * spec.L
        deviation = max(deviation, float(np.max(np.abs(img - expected))) / k)
        clouds.append(img)

    min_sep = math.inf
    witnesses = 0
    for i, j in combinations(range(len(clouds)), 2):
        diff = clouds[i][:, None, :] - clouds[j][None, :, :]
        min_sep = min(min_sep, float(np.sqrt((diff**2).sum(axis=2)).min()))
        for a, b in ((i, j), (j, i)):
            centre = np.zeros(dim)
            centre[0] = b * spec.L
            inside = np.linalg.norm(clouds[a] - centre, axis=1) < spec.r - separation_tol
            witnesses += int(inside.sum())

    expected_sep = spec.L - 2 * spec.r
    certified = spec.L > 2 * spec.r
    disjoint = certified and witnesses == 0 and min_sep >= expected_sep - separation_tol
    translation_ok = deviation <= translation_tol
    notes = []
    if not certified:
        notes.append(f"overlap: translation length L={spec.L} does not exceed ball diameter 2r={2 * spec.r}")
    if witnesses:
        notes.append(f"{witnesses} sampled image points fall inside another translated ball")
    return VerificationReport(
        name="displacement",
        passed=disjoint and translation_ok,
        metrics={
            "r": spec.r,
            "L": spec.L,
            "m": spec.m,
            "powers": spec.m + 1,
            "samples": int(Z.shape[0]),
            "max_translation_deviation_per_power": deviation,
            "min_separation": min_sep,
            "expected_separation": expected_sep,
            "certified_disjoint": certified,
            "overlap_witnesses": witnesses,
            "disjoint": disjoint,
        },
        tolerances={"translation": translation_tol, "separation": separation_tol},
        notes=notes,
    )
