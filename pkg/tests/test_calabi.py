import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from autonorm.calabi import (
    NotInCalabiKernel,
    balance_calabi,
    calabi,
    calabi_of_plan,
    compensator,
    integrate,
)
from autonorm.expr import Box, HamiltonianExpr, call, parse, x, y
from autonorm.factorization import plan_factorization, verify_factorization

BUMP2 = parse("bump(x1)*bump(y1)", 1)


def test_zero_and_odd_integrands():
    assert calabi(parse("0", 1)).value == 0.0
    assert abs(calabi(parse("y1*bump(x1)*bump(y1)", 1)).value) <= 1e-10


def test_unbounded_support_is_rejected():
    with pytest.raises(ValueError):
        calabi(parse("bump(x1)", 1))
    with pytest.raises(ValueError):
        calabi(BUMP2, n=2)


def test_midpoint_rule_on_polynomial_box():
    # exact for affine integrands
    box = Box(((0.0, 2.0), (-1.0, 3.0)))
    assert integrate(lambda Z: 1 + Z[:, 0] + 2 * Z[:, 1], box, 0.3) == pytest.approx(8 + 8 + 16)


def test_refinement_shrinks_by_at_least_eight():
    values = [calabi(BUMP2, grid_spacing=s).value for s in (0.25, 0.125, 0.0625, 0.03125)]
    deltas = [abs(b - a) for a, b in zip(values, values[1:])]
    assert all(d1 / d2 >= 8 for d1, d2 in zip(deltas, deltas[1:]))
    report = calabi(BUMP2)
    assert report.refinement_delta <= 1e-8


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_translation_invariance(dx, dy):
    base = calabi(BUMP2)
    moved = calabi(BUMP2.shifted(0, dx).shifted(1, dy))
    assert abs(moved.value - base.value) <= 2 * (base.refinement_delta + moved.refinement_delta) + 1e-12


def test_additivity_on_disjoint_supports():
    a = parse("bump(x1/0.5)*bump(y1/0.5)", 1)
    b = parse("-0.4*bump((x1-3)/0.5)*bump(y1/0.5)", 1)  # cell edges of both boxes line up with the hull's
    spacing = 1 / 64
    total = calabi(HamiltonianExpr(a.root + b.root, 1), grid_spacing=spacing).value
    assert total == pytest.approx(calabi(a, grid_spacing=spacing).value + calabi(b, grid_spacing=spacing).value, abs=1e-12)


def test_identity_plan_has_vanishing_invariants():
    plan = plan_factorization([parse("0", 1)])
    rep = calabi_of_plan(plan)
    assert rep["sum_inputs"] == 0.0 and rep["G"]["value"] == 0.0
    assert all(abs(v) <= 1e-10 for v in rep["factors"].values())


def test_generic_plan_invariants(generic_plan):
    rep = calabi_of_plan(generic_plan)
    assert rep["glued_ok"], rep["glued_defect"]
    assert rep["conjugate_ok"], rep["conjugate_defect"]
    assert abs(rep["G"]["value"] - rep["sum_inputs"]) <= 1e-6 * max(1.0, abs(rep["sum_inputs"]))
    assert rep["factors"]["A2"] == -rep["H"]["value"]


def test_balancing_refuses_outside_kernel(generic_plan):
    with pytest.raises(NotInCalabiKernel) as info:
        balance_calabi(generic_plan)
    assert info.value.total > 1e-3


def test_compensator_stays_clear_of_the_tube(kernel_plan):
    beta = compensator(kernel_plan)
    assert beta.support.disjoint(kernel_plan.spec.tube())
    assert beta.support.disjoint(kernel_plan.H.support)
    assert calabi(beta).value > 0


def test_balancing_cancels_a_nonzero_displacement_invariant(kernel_plan):
    # H itself integrates to zero by symmetry, so plant a remote bump to give balancing work to do
    s = kernel_plan.spec
    planted = call("bump", x(1)) * call("bump", y(1) + (s.r + s.eps + 2.0))
    H = HamiltonianExpr(kernel_plan.H.root + 0.7 * planted, 1)
    skewed = plan_factorization(kernel_plan.factors, L=s.L, margin=s.r - max(F.support.radius() for F in kernel_plan.factors), H=H)
    balanced, info = balance_calabi(skewed)
    assert info["kappa"] == pytest.approx(0.7, rel=1e-6)
    assert abs(info["cal_H_balanced"]) <= 1e-8
    assert abs(calabi(balanced.H).value) <= 1e-8
    rep = verify_factorization(balanced, samples=40)
    assert rep.passed, rep.line()


def test_kernel_plan_balances_to_trivial_factors(kernel_plan):
    balanced, info = balance_calabi(kernel_plan)
    assert math.isfinite(info["kappa"])
    rep = calabi_of_plan(balanced)
    assert all(abs(v) <= 1e-5 for v in rep["factors"].values())
    assert abs(rep["sum_inputs"]) <= 1e-6
