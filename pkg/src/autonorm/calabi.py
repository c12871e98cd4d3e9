"""Calabi invariant (plain volume integral of the Hamiltonian) and the zero-Calabi variant."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import Box, HamiltonianExpr, call, x, y
from .factorization import ConstructionError, FactorizationPlan, plan_factorization
from .geometry import DEFAULT_CONFIG, IntegratorConfig, jacobians

_CHUNK = 1 << 18


class NotInCalabiKernel(ConstructionError):
    def __init__(self, total: float):
        super().__init__(f"sum of Calabi invariants is {total:.3e}, not zero: f is not in the kernel")
        self.total = total


@dataclass(frozen=True)
class CalabiValue:
    value: float
    quadrature: float  # grid spacing actually used
    refinement_delta: float  # |value - value at half spacing|

    def to_dict(self) -> dict:
        return {"value": self.value, "spacing": self.quadrature, "refinement_delta": self.refinement_delta}


def midpoint_grid(box: Box, spacing: float) -> tuple[list[np.ndarray], float]:
    """Cell centres per axis and the cell volume for a box of given spacing."""
    axes, vol = [], 1.0
    for a, b in box.intervals:
        cells = max(1, math.ceil((b - a) / spacing - 1e-9))
        w = (b - a) / cells
        axes.append(a + w * (np.arange(cells) + 0.5))
        vol *= w
    return axes, vol


def integrate(fn, box: Box, spacing: float) -> float:
    """Composite midpoint rule of a vectorized ``fn(points) -> values`` over ``box``."""
    if box.empty:
        return 0.0
    if not box.bounded:
        raise ValueError("cannot integrate over an unbounded box")
    axes, vol = midpoint_grid(box, spacing)
    shape = [len(a) for a in axes]
    total = math.fsum(_chunked(fn, axes, shape))
    return total * vol


def _chunked(fn, axes, shape):
    size = int(np.prod(shape))
    for start in range(0, size, _CHUNK):
        idx = np.unravel_index(np.arange(start, min(size, start + _CHUNK)), shape)
        pts = np.stack([ax[i] for ax, i in zip(axes, idx)], axis=1)
        yield float(np.sum(fn(pts)))


def calabi(F: HamiltonianExpr, n: int | None = None, grid_spacing: float | None = None) -> CalabiValue:
    """Integral of F over R^2n by midpoint quadrature on its support box."""
    if n is not None and n != F.n:
        raise ValueError(f"expression lives in dimension 2*{F.n}, not 2*{n}")
    box = F.support_bound()
    if box is None:
        raise ValueError(f"{F} has no certified bounded support")
    if grid_spacing is None:
        grid_spacing = (box.radius() + 1.0) / 128
    coarse = integrate(F.values, box, grid_spacing)
    fine = integrate(F.values, box, grid_spacing / 2)
    return CalabiValue(coarse, grid_spacing, abs(coarse - fine))


def h_conjugate_calabi(
    plan: FactorizationPlan,
    spacing: float,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    eps: float = 1e-6,
) -> dict:
    """Cal(H o g^-1) by the change of variables z = g(w): the integral of H(w) det Dg(w).

    g is the identity outside the translated copies of the factors' support
    hull at labels -m..-1, so only ``H (det Dg - 1)`` over those boxes is
    integrated and added to Cal(H).  Jacobians come from central differences.
    """
    hull = Box.nothing(2 * plan.n)
    for F in plan.factors:
        hull = hull.hull(F.support)

    def defect(W):
        dets = np.linalg.det(jacobians(plan.g, W, eps, cfg))
        return plan.H.values(W) * (dets - 1.0)

    correction = 0.0
    mass = 0.0
    for k in range(-plan.m, 0):
        box = hull.shifted(0, k * plan.spec.L)
        correction += integrate(defect, box, spacing)
        mass += integrate(lambda W: np.abs(plan.H.values(W)), box, spacing)
    return {"correction": correction, "scale": mass, "spacing": spacing}


def calabi_of_plan(
    plan: FactorizationPlan,
    grid_spacing: float | None = None,
    coarse_spacing: float | None = None,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    glue_rtol: float = 1e-6,
    conj_rtol: float = 1e-3,
) -> dict:
    if grid_spacing is None:
        grid_spacing = (plan.spec.r + 1.0) / 128
    if coarse_spacing is None:
        coarse_spacing = plan.spec.r / 8
    inputs = [calabi(F, grid_spacing=grid_spacing) for F in plan.factors]
    total = math.fsum(c.value for c in inputs)
    cal_G = calabi(plan.G, grid_spacing=grid_spacing)
    cal_H = calabi(plan.H, grid_spacing=grid_spacing)
    conj = h_conjugate_calabi(plan, coarse_spacing, cfg)
    cal_A1 = cal_H.value + conj["correction"]
    glue_defect = abs(cal_G.value - total)
    conj_defect = abs(cal_A1 - cal_H.value)
    conj_scale = max(1.0, abs(cal_H.value), conj["scale"])
    return {
        "inputs": [c.to_dict() for c in inputs],
        "sum_inputs": total,
        "G": cal_G.to_dict(),
        "H": cal_H.to_dict(),
        "H_conjugate": {"value": cal_A1, **conj},
        "factors": {"A1": cal_A1, "A2": -cal_H.value, "A3": cal_G.value},
        "glued_defect": glue_defect,
        "glued_ok": glue_defect <= glue_rtol * max(1.0, abs(total)),
        "conjugate_defect": conj_defect,
        "conjugate_ok": conj_defect <= conj_rtol * conj_scale,
        "tolerances": {"glued_rtol": glue_rtol, "conjugate_rtol": conj_rtol},
    }


def compensator(plan: FactorizationPlan) -> HamiltonianExpr:
    """A unit bump in a box beyond the y1-support of H, away from everything else."""
    s = plan.spec
    centre = s.r + s.eps + 2.0
    node = call("bump", x(1)) * call("bump", y(1) - centre)
    for i in range(2, s.n + 1):
        node = node * call("bump", x(i)) * call("bump", y(i))
    return HamiltonianExpr(node, s.n)


def balance_calabi(
    plan: FactorizationPlan,
    grid_spacing: float | None = None,
    kernel_tol: float = 1e-6,
) -> tuple[FactorizationPlan, dict]:
    """Replace H by H - kappa * beta so that Cal(H') = 0; dynamics on the tube are unchanged.

    Refuses when the input factors do not sum to zero Calabi invariant.
    """
    if grid_spacing is None:
        grid_spacing = (plan.spec.r + 1.0) / 128
    total = math.fsum(calabi(F, grid_spacing=grid_spacing).value for F in plan.factors)
    if abs(total) > kernel_tol:
        raise NotInCalabiKernel(total)
    beta = compensator(plan)
    if not beta.support.disjoint(plan.H.support):
        raise ConstructionError("compensating bump meets the support of H")
    cal_H = calabi(plan.H, grid_spacing=grid_spacing).value
    cal_beta = calabi(beta, grid_spacing=grid_spacing).value
    kappa = cal_H / cal_beta
    H2 = HamiltonianExpr(plan.H.root - kappa * beta.root, plan.n)
    balanced = plan_factorization(
        plan.factors,
        L=plan.spec.L,
        eps=plan.spec.eps,
        allow_short=plan.spec.allow_short,
        margin=plan.spec.r - _support_radius(plan),
        H=H2,
    )
    residual = calabi(H2, grid_spacing=grid_spacing).value
    return balanced, {"kappa": kappa, "cal_H": cal_H, "cal_beta": cal_beta, "cal_H_balanced": residual}


def _support_radius(plan: FactorizationPlan) -> float:
    return max(F.support.radius() for F in plan.factors)


__all__ = [
    "CalabiValue",
    "NotInCalabiKernel",
    "balance_calabi",
    "calabi",
    "calabi_of_plan",
    "compensator",
    "h_conjugate_calabi",
    "integrate",
]
