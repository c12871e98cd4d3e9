"""Factor the three-bump scenario and print every verification line.

    python3 scripts/headline_m3.py [--config configs/generic_m3.json] [--samples 200]
"""

import argparse
import time
from pathlib import Path

from autonorm.calabi import calabi_of_plan
from autonorm.cli import ScenarioConfig, build_plan
from autonorm.factorization import verify_factorization, verify_plan_displacement

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=ROOT / "configs" / "generic_m3.json")
    ap.add_argument("--samples", type=int, default=200)
    args = ap.parse_args()

    cfg = ScenarioConfig.load(args.config)
    start = time.perf_counter()
    plan = build_plan(cfg)
    icfg = cfg.integrator_config()
    print(f"m={plan.m} r={plan.spec.r:.4f} L={plan.spec.L:.4f}")
    for name, ham in plan.hamiltonians().items():
        print(f"  {name}: {len(plan.three_factors()[name])} letters, Hamiltonian {ham[:90]}{'...' if len(ham) > 90 else ''}")
    print(verify_plan_displacement(plan, args.samples, icfg).line())
    print(verify_factorization(plan, args.samples, cfg.verification.tolerance, icfg).line())
    cal = calabi_of_plan(plan, cfg=icfg)
    print(f"Calabi: sum inputs {cal['sum_inputs']:.6e}, G {cal['G']['value']:.6e}, factors {cal['factors']}")
    print(f"total {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
