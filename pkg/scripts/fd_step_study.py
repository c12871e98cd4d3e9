"""How far central differences sit from the exact gradient on the fixture Hamiltonians.

For each fixture expression, find the sample point (|grad| > 1e-3) where
central differences with step 1e-5 disagree most with the computed gradient,
then compare both against a 40-digit reference over a range of FD steps.
"""

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import mp_gradient  # noqa: E402

from autonorm.cli import ScenarioConfig, build_plan  # noqa: E402


def central(F, z, h):
    return np.array([(F(z + h * e) - F(z - h * e)) / (2 * h) for e in np.eye(len(z))])


def main():
    rng = np.random.default_rng(6)
    exprs = []
    for name in ("generic_m3", "kernel_balanced"):
        plan = build_plan(ScenarioConfig.load(ROOT / "configs" / f"{name}.json"))
        exprs += [(f"{name}:F{i}", F) for i, F in enumerate(plan.factors, 1)] + [(f"{name}:G", plan.G), (f"{name}:H", plan.H)]
    steps = (1e-4, 3e-5, 1e-5, 3e-6, 1e-6, 1e-7)
    print(f"{'expression':<22} {'|grad|':>8} {'grad err':>9} " + " ".join(f"fd h={h:.0e}" for h in steps))
    for label, F in exprs:
        lo, hi = (np.array([iv[i] for iv in F.support.intervals]) for i in (0, 1))
        worst, at = -1.0, None
        taken = 0
        while taken < 100:
            z = rng.uniform(lo, hi)
            g = np.array(F.grad(z))
            if np.linalg.norm(g) <= 1e-3:
                continue
            rel = np.linalg.norm(g - central(F, z, 1e-5)) / np.linalg.norm(g)
            if rel > worst:
                worst, at = rel, (z, g)
            taken += 1
        z, g = at
        exact = mp_gradient(F, z)
        norm = np.linalg.norm(exact)
        errs = [np.linalg.norm(central(F, z, h) - exact) / norm for h in steps]
        print(f"{label:<22} {norm:>8.1e} {np.linalg.norm(g - exact) / norm:>9.1e} " + " ".join(f"{e:>9.1e}" for e in errs))


if __name__ == "__main__":
    main()
