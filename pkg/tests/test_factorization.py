import numpy as np
import pytest

from autonorm import words as W
from autonorm.displacement import DisplacementSpec
from autonorm.expr import parse
from autonorm.factorization import (
    ConstructionError,
    TubeMonitor,
    abstract,
    glued_hamiltonian,
    plan_factorization,
    sample_points,
    verify_factorization,
)
from autonorm.geometry import DiffeoWord, Letter, evaluate_many, invert_word

F1 = parse("0.3*bump((x1-0.15)/0.6)*bump(y1/0.6)", 1)
F2 = parse("0.25*bump(x1/0.6)*bump((y1-0.15)/0.6)", 1)


def test_glued_single_factor_is_shifted_left():
    s = DisplacementSpec(r=1.0, m=1)
    G = glued_hamiltonian([F1], s)
    z = np.array([0.1 - s.L, 0.2])
    assert G(z) == F1(z + [s.L, 0.0])
    assert np.allclose(G.support.intervals[0], np.array(F1.support.intervals[0]) - s.L)


def test_glued_summands_do_not_interact():
    s = DisplacementSpec(r=1.0, m=2)
    G = glued_hamiltonian([F1, F2], s)
    z = np.array([0.1 - 2 * s.L, -0.1])
    assert G(z) == F1(z + [2 * s.L, 0.0])
    z2 = np.array([0.05 - s.L, 0.1])
    assert G(z2) == F2(z2 + [s.L, 0.0])


def test_glued_overlap_is_rejected():
    s = DisplacementSpec(r=1.0, m=2, L=1.0, allow_short=True)
    with pytest.raises(ConstructionError):
        glued_hamiltonian([F1, F2], s)


@pytest.mark.parametrize(
    "factors",
    [[], [parse("x1*y1", 1)], [F1, parse("bump(x1)*bump(y1)*bump(x2)*bump(y2)", 2)]],
)
def test_plan_rejects_bad_inputs(factors):
    with pytest.raises(ConstructionError):
        plan_factorization(factors)


def test_plan_geometry():
    plan = plan_factorization([F1, F2])
    radius = max(F.support.radius() for F in (F1, F2))
    assert plan.spec.r == pytest.approx(radius + 0.1)
    assert plan.spec.L == pytest.approx(3 * plan.spec.r)
    assert set(plan.three_factors()) == {"A1", "A2", "A3"}
    assert set(plan.hamiltonians()) == {"A1", "A2", "A3"}
    assert plan.spec.tube().intersect(plan.working_box()) == plan.working_box()
    summary = plan.summary()
    assert summary["m"] == 2 and len(summary["support_boxes"]) == 2


def test_single_factor_plan():
    plan = plan_factorization([F1])
    h, a1 = plan.h, plan.a[0]
    assert plan.g.letters == (invert_word(h) * invert_word(a1) * h).letters
    rep = verify_factorization(plan, samples=60, tol=1e-4)
    assert rep.passed, rep.line()


def test_identity_plan():
    plan = plan_factorization([parse("0", 1)])
    rep = verify_factorization(plan, samples=50, tol=1e-5)
    assert rep.passed and rep.metrics["max_error"] <= 1e-5


def test_commuting_disjoint_factors():
    factors = [
        parse("0.4*bump((x1-0.5)/0.3)*bump(y1/0.3)", 1),
        parse("0.4*bump((x1+0.5)/0.3)*bump(y1/0.3)", 1),
        parse("0.4*bump(x1/0.3)*bump((y1-0.5)/0.3)", 1),
    ]
    plan = plan_factorization(factors)
    rep = verify_factorization(plan, samples=60)
    assert rep.passed, rep.line()
    assert W.verify_identity(3)[0]


def test_generic_plan(generic_plan):
    rep = verify_factorization(generic_plan, samples=80)
    m = rep.metrics
    assert rep.passed, rep.line()
    assert m["tube_violations"] == 0 and m["tube_checks"] > 0
    assert m["glued_flow_vs_word_max_error"] <= 1e-4
    assert m["opposite_convention_max_error"] > 1e-2
    assert m["convention"] != "undetermined"


def test_symbolic_coherence(generic_plan):
    b = W.build_b(generic_plan.m)
    assert abstract(generic_plan.product, b) == W.target(generic_plan.m)
    assert abstract(generic_plan.f) == W.target(generic_plan.m)
    assert abstract(generic_plan.g) == W.build_g(generic_plan.m)
    with pytest.raises(ValueError):
        abstract(DiffeoWord.of(F1, 0.5, "a1"))
    with pytest.raises(ValueError):
        abstract(DiffeoWord.of(F1, 1.0, "mystery"))


def test_conjugation_law_for_first_factor():
    plan = plan_factorization([F1])
    rep = verify_factorization(plan, samples=10, deep_samples=2)
    assert rep.metrics["conjugation_law_max_error"] <= 1e-4


def test_first_factor_hamiltonian_is_conjugated_displacement():
    plan = plan_factorization([F1])
    Z = sample_points(plan, 20)
    gz = evaluate_many(plan.g, Z)
    assert np.allclose(plan.a1_hamiltonian(gz), plan.H.values(Z), atol=1e-8)


def test_sample_points_are_deterministic(generic_plan):
    a = sample_points(generic_plan, 200, seed=0)
    assert a.shape == (200, 2)
    assert np.array_equal(a, sample_points(generic_plan, 200, seed=0))
    assert not np.array_equal(a, sample_points(generic_plan, 200, seed=1))
    assert np.all(np.linalg.norm(a[:100], axis=1) <= generic_plan.spec.r + 1e-12)


def test_tube_monitor_flags_outside_points(generic_plan):
    monitor = TubeMonitor(generic_plan.spec.tube())
    letter = Letter(generic_plan.H, 1.0, "h")
    inside = np.zeros((3, 2))
    outside = np.array([[0.0, generic_plan.spec.r + 0.5]])
    monitor(letter, inside, inside)
    assert monitor.violations == 0 and monitor.checked == 6
    monitor(letter, outside, outside)
    assert monitor.violations == 2
