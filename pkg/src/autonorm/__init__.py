"""Factor compactly supported Hamiltonian diffeomorphisms into three autonomous flows."""

from .expr import HamiltonianExpr, parse
from .factorization import ConstructionError, FactorizationPlan, plan_factorization, verify_factorization

__all__ = [
    "ConstructionError",
    "FactorizationPlan",
    "HamiltonianExpr",
    "parse",
    "plan_factorization",
    "verify_factorization",
]
