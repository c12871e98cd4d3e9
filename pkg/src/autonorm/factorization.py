"""From m autonomous factors to three: f = A1 o A2 o A3.

With h the displacing map, g and b from :mod:`autonorm.words`, and
f = [g, h] b, the three factors are

    A1 = g h g^-1   (Hamiltonian H o g^-1)
    A2 = h^-1       (Hamiltonian -H)
    A3 = b          (Hamiltonian G, the glued sum of translated F_i)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import words
from .displacement import DisplacementSpec, build_displacement_hamiltonian, verify_displacement
from .expr import Box, HamiltonianExpr, Node
from .geometry import (
    DEFAULT_CONFIG,
    DiffeoWord,
    IntegratorConfig,
    Letter,
    compose,
    conjugate_word,
    evaluate_many,
    flow_many,
    invert_word,
    pushforward_flow,
)
from .report import VerificationReport


class ConstructionError(ValueError):
    """The inputs do not admit the construction (unbounded support, overlap, m = 0)."""


def _summand_offsets(m: int, L: float) -> list[float]:
    # summand i sits at label i - m - 1, i.e. translated by (i - m - 1) L in x1
    return [(i - m - 1) * L for i in range(1, m + 1)]


def glued_hamiltonian(
    factors: list[HamiltonianExpr],
    spec: DisplacementSpec,
    check: bool = True,
    reverse: bool = False,
) -> HamiltonianExpr:
    """G(z) = sum_i F_i(z - (i-m-1) L e_x1), the Hamiltonian of b.

    ``reverse=True`` builds the opposite convention (each F_i translated the
    other way), kept only so the flow-vs-word check can rule it out.
    """
    m = len(factors)
    if m == 0:
        raise ConstructionError("no factors")
    sign = -1.0 if reverse else 1.0
    node: Node | None = None
    boxes: list[Box] = []
    for F, off in zip(factors, _summand_offsets(m, spec.L)):
        shifted = F.shifted(0, sign * off)
        boxes.append(shifted.support)
        node = shifted.root if node is None else node + shifted.root
    if check:
        for i in range(m):
            for j in range(i + 1, m):
                if not boxes[i].disjoint(boxes[j]):
                    raise ConstructionError(f"support boxes of glued summands {i + 1} and {j + 1} overlap")
    return HamiltonianExpr(node, spec.n)


def instantiate(u: words.GroupWord, a: list[DiffeoWord], h: DiffeoWord) -> DiffeoWord:
    """Realise an abstract group word with flow words (label k -> conjugation by h^k)."""
    parts = []
    for label, w in u.parts:
        core = compose(a[i - 1] if i > 0 else invert_word(a[-i - 1]) for i in w)
        parts.append(conjugate_word(core, h**label))
    parts.append(h**u.h_exponent)
    return compose(parts)


def abstract(w: DiffeoWord, glued: words.GroupWord | None = None) -> words.GroupWord:
    """Map a word of tagged letters ("a<i>", "h", "G") back to the abstract group.

    A "G" letter stands for ``glued`` (the element b), which is what its flow
    is checked to equal numerically.
    """
    acc = words.IDENTITY
    for letter in w.letters:
        if letter.duration not in (1.0, -1.0):
            raise ValueError("only unit-time letters have an abstract counterpart")
        p = int(letter.duration)
        if letter.tag == "h":
            acc = words.multiply(acc, words.h_power(p))
        elif letter.tag == "G" and glued is not None:
            acc = words.multiply(acc, glued if p > 0 else words.invert(glued))
        elif letter.tag.startswith("a"):
            acc = words.multiply(acc, words.gen(int(letter.tag[1:]), 0, p))
        else:
            raise ValueError(f"letter tag {letter.tag!r} has no abstract counterpart")
    return acc


@dataclass
class FactorizationPlan:
    factors: list[HamiltonianExpr]
    spec: DisplacementSpec
    H: HamiltonianExpr
    G: HamiltonianExpr
    h: DiffeoWord
    g: DiffeoWord
    A1: DiffeoWord
    A2: DiffeoWord
    A3: DiffeoWord
    f: DiffeoWord
    b: DiffeoWord
    a: list[DiffeoWord] = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def product(self) -> DiffeoWord:
        return self.A1 * self.A2 * self.A3

    def three_factors(self) -> dict[str, DiffeoWord]:
        return {"A1": self.A1, "A2": self.A2, "A3": self.A3}

    def hamiltonians(self) -> dict[str, str]:
        """Autonomy witnesses: one Hamiltonian per factor."""
        return {"A1": f"({self.H}) o g^-1", "A2": f"-({self.H})", "A3": str(self.G)}

    def a1_hamiltonian(self, Z: np.ndarray, cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
        """Evaluate H o g^-1 pointwise."""
        return self.H.values(evaluate_many(invert_word(self.g), Z, cfg))

    def working_box(self) -> Box:
        """Points whose orbits under every word of the plan stay inside the tube."""
        s = self.spec
        iv = [(-s.r, s.r)] * (2 * s.n)
        iv[0] = (-(s.m + 1) * s.L - s.r, s.L + s.r)
        return Box(tuple(iv))

    def summary(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "r": self.spec.r,
            "L": self.spec.L,
            "eps": self.spec.eps,
            "tube": self.spec.tube().to_list(),
            "support_boxes": [F.support.to_list() for F in self.factors],
            "glued_support_box": self.G.support.to_list(),
            "factors": {
                name: {"hamiltonian": ham, "letters": len(w)}
                for (name, w), ham in zip(self.three_factors().items(), self.hamiltonians().values())
            },
            "displacement_hamiltonian": str(self.H),
        }


def plan_factorization(
    factors: list[HamiltonianExpr],
    L: float | None = None,
    eps: float = 1.0,
    allow_short: bool = False,
    margin: float = 0.1,
    H: HamiltonianExpr | None = None,
) -> FactorizationPlan:
    """Build h, g and the three autonomous factors for f = a_1 o ... o a_m.

    ``H`` replaces the displacing Hamiltonian (used by Calabi balancing); it
    must agree with the standard one on the tube.
    """
    if not factors:
        raise ConstructionError("need at least one factor (m >= 1)")
    n = factors[0].n
    if any(F.n != n for F in factors):
        raise ConstructionError("factors live in different dimensions")
    radius = 0.0
    for i, F in enumerate(factors, 1):
        box = F.support_bound()
        if box is None:
            raise ConstructionError(f"factor {i} ({F}) has no certified bounded support")
        radius = max(radius, box.radius())
    r = radius + margin
    m = len(factors)
    try:
        spec = DisplacementSpec(r=r, m=m, n=n, L=L, eps=eps, allow_short=allow_short)
    except ValueError as exc:
        raise ConstructionError(str(exc)) from exc
    if H is None:
        H = build_displacement_hamiltonian(spec)
    h = DiffeoWord.of(H, 1.0, "h")
    a = [DiffeoWord.of(F, 1.0, f"a{i}") for i, F in enumerate(factors, 1)]
    g = instantiate(words.build_g(m), a, h)
    b = instantiate(words.build_b(m), a, h)
    G = glued_hamiltonian(factors, spec, check=not allow_short)
    return FactorizationPlan(
        factors=list(factors),
        spec=spec,
        H=H,
        G=G,
        h=h,
        g=g,
        A1=conjugate_word(h, g),
        A2=invert_word(h),
        A3=DiffeoWord.of(G, 1.0, "G"),
        f=compose(a),
        b=b,
        a=a,
    )


def sample_points(plan: FactorizationPlan, samples: int, seed: int = 0) -> np.ndarray:
    """Deterministic grid over B(r) (half the budget), then seeded uniform points in the working box."""
    dim = 2 * plan.n
    r = plan.spec.r
    n_grid = samples // 2
    grid = np.zeros((0, dim))
    k = 2
    while n_grid and grid.shape[0] < n_grid:
        axis = np.linspace(-r, r, k)
        mesh = np.stack(np.meshgrid(*[axis] * dim, indexing="ij"), axis=-1).reshape(-1, dim)
        grid = mesh[np.linalg.norm(mesh, axis=1) <= r]
        k += 1
    if grid.shape[0] > n_grid:
        grid = grid[np.linspace(0, grid.shape[0] - 1, n_grid).round().astype(int)]
    rng = np.random.default_rng(seed)
    box = plan.working_box()
    lo = np.array([a for a, _ in box.intervals])
    hi = np.array([b for _, b in box.intervals])
    uniform = rng.uniform(lo, hi, size=(samples - grid.shape[0], dim))
    return np.vstack([grid, uniform])


class TubeMonitor:
    """Counts h-letter applications that start or end outside the tube."""

    def __init__(self, tube: Box, tol: float = 1e-9):
        lo = np.array([a for a, _ in tube.intervals]) - tol
        hi = np.array([b for _, b in tube.intervals]) + tol
        self.lo, self.hi = lo, hi
        self.checked = 0
        self.violations = 0

    def __call__(self, letter: Letter, before: np.ndarray, after: np.ndarray) -> None:
        if letter.tag != "h":
            return
        for pts in (before, after):
            ok = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
            self.checked += pts.shape[0]
            self.violations += int((~ok).sum())


def verify_factorization(
    plan: FactorizationPlan,
    samples: int = 200,
    tol: float = 1e-3,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    seed: int = 0,
    glue_tol: float = 1e-4,
    deep_samples: int = 0,
) -> VerificationReport:
    """Numerically compare f with A1 o A2 o A3 on sample points.

    Also checks the glued flow against the word b (and that the opposite
    translation convention fails), the symbolic reduction of the plan's
    word, and, with ``deep_samples > 0``, the conjugation law for A1.
    """
    Z = sample_points(plan, samples, seed)
    monitor = TubeMonitor(plan.spec.tube())
    fz = evaluate_many(plan.f, Z, cfg)
    pz = evaluate_many(plan.product, Z, cfg, guard=monitor)
    err = np.linalg.norm(fz - pz, axis=1)

    bz = evaluate_many(plan.b, Z, cfg, guard=monitor)
    gz = flow_many(plan.G, 1.0, Z, cfg)
    glue_err = float(np.max(np.linalg.norm(bz - gz, axis=1)))
    alt = glued_hamiltonian(plan.factors, plan.spec, check=False, reverse=True)
    alt_err = float(np.max(np.linalg.norm(bz - flow_many(alt, 1.0, Z, cfg), axis=1)))

    symbolic = abstract(plan.product, words.build_b(plan.m)) == words.target(plan.m)

    metrics = {
        "samples": int(Z.shape[0]),
        "max_error": float(err.max()),
        "mean_error": float(err.mean()),
        "glued_flow_vs_word_max_error": glue_err,
        "opposite_convention_max_error": alt_err,
        "convention": "summand i is F_i o h^-(i-m-1), i.e. translated by (i-m-1)L in x1" if glue_err <= glue_tol < alt_err else "undetermined",
        "symbolic_reduction_ok": symbolic,
        "tube_checks": monitor.checked,
        "tube_violations": monitor.violations,
        "letters": {name: len(w) for name, w in plan.three_factors().items()},
    }
    notes = [
        f"error budget: RK4 step {cfg.step} per letter, {len(plan.product) + len(plan.f)} letter applications per point",
    ]
    passed = err.max() <= tol and glue_err <= glue_tol and symbolic and monitor.violations == 0
    if deep_samples:
        deep = Z[:deep_samples]
        direct = evaluate_many(plan.A1, deep, cfg)
        pushed = np.array([pushforward_flow(plan.g, plan.H, p, 1.0, cfg) for p in deep])
        metrics["conjugation_law_max_error"] = float(np.max(np.linalg.norm(direct - pushed, axis=1)))
    return VerificationReport(
        name="composition",
        passed=bool(passed),
        metrics=metrics,
        tolerances={"composition": tol, "glued": glue_tol},
        notes=notes,
    )


def verify_plan_displacement(plan: FactorizationPlan, samples: int = 200, cfg: IntegratorConfig = DEFAULT_CONFIG, seed: int = 0):
    return verify_displacement(plan.h, plan.spec, samples, cfg, seed)
