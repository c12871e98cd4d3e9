"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line.  Run under pytest, or
directly with ``python3 tests/test_acceptance.py`` for just the summary.
"""

from __future__ import annotations

import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from autonorm import words as W  # noqa: E402
from autonorm.calabi import balance_calabi, calabi_of_plan  # noqa: E402
from autonorm.cli import ScenarioConfig, build_plan, main  # noqa: E402
from autonorm.displacement import DisplacementSpec, ball_samples, build_displacement_hamiltonian, verify_displacement  # noqa: E402
from autonorm.factorization import glued_hamiltonian, verify_factorization, verify_plan_displacement  # noqa: E402
from autonorm.geometry import DiffeoWord, IntegratorConfig, evaluate_many, flow_many, jacobian  # noqa: E402
from oracles import exhaustive_mismatches, mp_gradient  # noqa: E402

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RK4 = IntegratorConfig(scheme="rk4", step=1e-3)


def _config(name):
    return ScenarioConfig.load(CONFIGS / f"{name}.json")


def _line(number, title, passed, detail):
    return f"[{'PASS' if passed else 'FAIL'}] criterion {number} ({title}): {detail}"


# ---------------------------------------------------------------- criteria


def criterion_1():
    start = time.perf_counter()
    ok = all(W.verify_identity(m)[0] and W.verify_commutator_split(m) for m in range(1, 65))
    elapsed = time.perf_counter() - start
    return ok and elapsed < 1.0, f"identity and split for m=1..64: {ok}, {elapsed:.3f}s (< 1s)"


def _fixture_is_admissible(plan):
    inside = all(F.support.radius() <= 1.0 for F in plan.factors)
    amplitudes = all(np.max(np.abs(F.values(np.random.default_rng(0).uniform(-1, 1, (4000, 2))))) <= 1.0 for F in plan.factors)
    overlapping = all(not a.support.disjoint(b.support) for a, b in combinations(plan.factors, 2))
    return inside and amplitudes and overlapping and plan.m == 3 and plan.n == 1


def criterion_2():
    start = time.perf_counter()
    plan = build_plan(_config("generic_m3"))
    rep = verify_factorization(plan, samples=200, tol=1e-3, cfg=RK4)
    elapsed = time.perf_counter() - start
    err = rep.metrics["max_error"]
    admissible = _fixture_is_admissible(plan)
    ok = admissible and rep.metrics["samples"] == 200 and err <= 1e-3 and elapsed <= 60
    return ok, f"max |f - A1 A2 A3| = {err:.2e} over 200 points (<= 1e-3), {elapsed:.1f}s (<= 60s), fixture admissible: {admissible}"


def criterion_3():
    plan = build_plan(_config("generic_m3"))
    spec = plan.spec
    rep = verify_plan_displacement(plan, samples=200, cfg=RK4)
    Z = ball_samples(spec.r, 2, 200)
    one_step = float(np.max(np.linalg.norm(evaluate_many(plan.h, Z, RK4) - (Z + [spec.L, 0.0]), axis=1)))
    sep = rep.metrics["min_separation"]
    good = rep.passed and spec.L == pytest.approx(3 * spec.r) and spec.m == 3 and rep.metrics["powers"] == 4
    good = good and sep >= spec.r - 1e-3 and one_step <= 1e-6

    short = DisplacementSpec(r=spec.r, m=3, L=spec.r, allow_short=True)
    neg = verify_displacement(DiffeoWord.of(build_displacement_hamiltonian(short)), short, samples=200, cfg=RK4)
    detected = not neg.passed and neg.metrics["overlap_witnesses"] > 0 and any("overlap" in n for n in neg.notes)
    return good and detected, (
        f"L=3r: min separation {sep:.4f} (>= r - 1e-3 = {spec.r - 1e-3:.4f}), |h(z) - z - L e1| = {one_step:.1e} (<= 1e-6); "
        f"L=r: overlap detected ({neg.metrics['overlap_witnesses']} witnesses)"
    )


def criterion_4():
    plan = build_plan(_config("generic_m3"))
    s = plan.spec
    rng = np.random.default_rng(4)
    # points spread over the strip that holds every translated summand
    Z = np.column_stack([rng.uniform(-s.m * s.L - s.r, -s.L + s.r, 50), rng.uniform(-s.r, s.r, 50)])
    word = evaluate_many(plan.b, Z, RK4)
    err = float(np.max(np.linalg.norm(flow_many(plan.G, 1.0, Z, RK4) - word, axis=1)))
    alt = glued_hamiltonian(plan.factors, s, check=False, reverse=True)
    alt_err = float(np.max(np.linalg.norm(flow_many(alt, 1.0, Z, RK4) - word, axis=1)))
    return err <= 1e-4 < alt_err, f"flow of G vs word b: {err:.1e} (<= 1e-4); opposite translation convention: {alt_err:.2f}"


def _letters(plan):
    return list(plan.factors) + [plan.G, plan.H]


def criterion_5():
    plan = build_plan(_config("generic_m3"))
    rng = np.random.default_rng(5)
    drift = 0.0
    for F in _letters(plan):
        box = F.support
        lo, hi = (np.array([iv[i] for iv in box.intervals]) for i in (0, 1))
        Z = rng.uniform(lo, hi, (100, 2))
        for t in np.linspace(0.1, 1.0, 10):
            drift = max(drift, float(np.max(np.abs(F.values(flow_many(F, t, Z, RK4)) - F.values(Z)))))
    det_err = 0.0
    for F in _letters(plan):
        box = F.support
        lo, hi = (np.array([iv[i] for iv in box.intervals]) for i in (0, 1))
        w = DiffeoWord.of(F)
        for z in rng.uniform(lo, hi, (50, 2)):
            det_err = max(det_err, abs(np.linalg.det(jacobian(w, z, cfg=RK4)) - 1.0))
    return drift <= 1e-6 and det_err <= 1e-5, f"energy drift {drift:.1e} (<= 1e-6), |det J - 1| {det_err:.1e} (<= 1e-5)"


def criterion_6():
    plans = [build_plan(_config("generic_m3")), build_plan(_config("kernel_balanced"))]
    exprs = [F for plan in plans for F in _letters(plan)]
    rng = np.random.default_rng(6)
    worst, worst_at, checked = 0.0, None, 0
    h = 1e-5
    for F in exprs:
        lo, hi = (np.array([iv[i] for iv in F.support.intervals]) for i in (0, 1))
        taken = 0
        while taken < 100:
            z = rng.uniform(lo, hi)
            g = np.array(F.grad(z))
            if np.linalg.norm(g) <= 1e-3:
                continue
            fd = np.array([(F(z + h * e) - F(z - h * e)) / (2 * h) for e in np.eye(2)])
            rel = float(np.linalg.norm(g - fd) / np.linalg.norm(g))
            if rel > worst:
                worst, worst_at = rel, (F, z, g, fd)
            taken += 1
        checked += taken
    # diagnose the worst point against a 40-digit reference derivative
    F, z, g, fd = worst_at
    exact = mp_gradient(F, z)
    ad_err = float(np.linalg.norm(g - exact) / np.linalg.norm(exact))
    fd_err = float(np.linalg.norm(fd - exact) / np.linalg.norm(exact))
    return worst <= 1e-6, (
        f"max relative |grad - central FD (h=1e-5)| {worst:.1e} over {checked} points (<= 1e-6); "
        f"at the worst point grad vs 40-digit reference {ad_err:.1e}, FD vs reference {fd_err:.1e}"
    )


def criterion_7():
    generic = calabi_of_plan(build_plan(_config("generic_m3")), cfg=RK4)
    total = generic["sum_inputs"]
    glue = abs(generic["G"]["value"] - total)
    glue_ok = glue <= 1e-6 * max(1.0, abs(total))

    balanced, info = balance_calabi(build_plan(_config("kernel_balanced")))
    rep = calabi_of_plan(balanced, cfg=RK4)
    worst = max(abs(v) for v in rep["factors"].values())
    comp = verify_factorization(balanced, samples=200, tol=1e-3, cfg=RK4)
    ok = glue_ok and worst <= 1e-5 and comp.passed
    return ok, (
        f"|Cal G - sum Cal F_i| = {glue:.1e} (<= {1e-6 * max(1.0, abs(total)):.1e}); balanced kernel plan: "
        f"max |Cal A_k| = {worst:.1e} (<= 1e-5), composition error {comp.metrics['max_error']:.1e} (<= 1e-3)"
    )


def criterion_8():
    start = time.perf_counter()
    count, mismatches = exhaustive_mismatches(6)
    elapsed = time.perf_counter() - start
    return not mismatches and elapsed < 10, f"{count} words of <= 6 letters, {len(mismatches)} mismatches, {elapsed:.2f}s (< 10s)"


def criterion_9(tmp: Path):
    outs = [tmp / "first.json", tmp / "second.json"]
    codes = [main(["verify", "--config", str(CONFIGS / "generic_m3.json"), "--out", str(p)]) for p in outs]
    same = outs[0].read_bytes() == outs[1].read_bytes()
    return same and codes == [0, 0], f"two verify runs: exit codes {codes}, byte-identical reports: {same}"


CRITERIA = {
    1: ("symbolic core", criterion_1),
    2: ("end-to-end factorization", criterion_2),
    3: ("displacement", criterion_3),
    4: ("glued factor is autonomous", criterion_4),
    5: ("integrator soundness", criterion_5),
    6: ("exact gradients", criterion_6),
    7: ("Calabi", criterion_7),
    8: ("word algebra vs brute force", criterion_8),
    9: ("determinism", criterion_9),
}


# ---------------------------------------------------------------- pytest


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys, tmp_path):
    title, fn = CRITERIA[number]
    passed, detail = fn(tmp_path) if number == 9 else fn()
    with capsys.disabled():
        print("\n" + _line(number, title, passed, detail))
    assert passed, detail


if __name__ == "__main__":
    import tempfile

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for number, (title, fn) in sorted(CRITERIA.items()):
            passed, detail = fn(Path(tmp)) if number == 9 else fn()
            failures += not passed
            print(_line(number, title, passed, detail), flush=True)
    sys.exit(1 if failures else 0)
