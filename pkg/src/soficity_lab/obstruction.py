"""The bad-edge counting argument on a single finite instance.

Given the A-generator graph Gamma, the B-generator graph Lambda on the same
points and a candidate involution ``tau`` (the image of the stable letter),
compute the components Omega_j, the set D, the heavy index set, the
partitions Theta of D within each heavy component and the number of
Gamma-edges whose tau-image is not a Lambda-edge, and compare that count
with ``c' N / 200`` where ``c' = c * min(1, lambda - 1)``.

Component indices are 0-based in all returned structures.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .actions import LabeledAction, OrbitPartition, Perm, blocks_refine, check_perm, compose, partition_from_perms
from .presentations import Word, as_word
from .schreier import MultiGraph, graph_from_perms
from .sofic import SoficApprox, evaluate_word, moved_points

T_SQUARE_THRESHOLD = Fraction(1, 10)
D_THRESHOLD = Fraction(9, 20)
HEAVY_THRESHOLD = Fraction(1, 10)
MASS_THRESHOLD = Fraction(1, 10)
BOUND_DIVISOR = 200


def _fr(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(str(x))


@dataclass(frozen=True)
class ObstructionInstance:
    n: int
    gamma: Mapping[str, Perm]
    lam: Mapping[str, Perm]
    tau: Perm
    measured_c: Fraction
    measured_lambda: Fraction
    h_relators: tuple[Word, ...] = ()

    def __post_init__(self):
        check_perm(self.tau, self.n)
        for perms in (self.gamma, self.lam):
            for p in perms.values():
                check_perm(p, self.n)
        object.__setattr__(self, "gamma", {k: tuple(v) for k, v in self.gamma.items()})
        object.__setattr__(self, "lam", {k: tuple(v) for k, v in self.lam.items()})
        object.__setattr__(self, "tau", tuple(self.tau))
        object.__setattr__(self, "measured_c", as_fraction(self.measured_c))
        object.__setattr__(self, "measured_lambda", as_fraction(self.measured_lambda))
        object.__setattr__(self, "h_relators", tuple(as_word(w) for w in self.h_relators))

    @classmethod
    def from_action(
        cls, action: LabeledAction, family_a: str, family_b: str, tau: Perm, measured_c, measured_lambda,
        h_relators: Sequence = (),
    ) -> ObstructionInstance:
        gamma = {lb: action.generators[lb] for lb in action.family(family_a)}
        lam = {lb: action.generators[lb] for lb in action.family(family_b)}
        return cls(action.n, gamma, lam, tau, measured_c, measured_lambda, tuple(h_relators))

    def gamma_graph(self) -> MultiGraph:
        return graph_from_perms(self.n, self.gamma)

    def lambda_graph(self) -> MultiGraph:
        return graph_from_perms(self.n, self.lam)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "gamma": {k: list(v) for k, v in self.gamma.items()},
            "lambda": {k: list(v) for k, v in self.lam.items()},
            "tau": list(self.tau),
            "measuredC": _fr(self.measured_c),
            "measuredLambda": _fr(self.measured_lambda),
            "hRelators": [str(w) for w in self.h_relators],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> ObstructionInstance:
        return cls(
            int(data["n"]),
            {k: tuple(v) for k, v in data["gamma"].items()},
            {k: tuple(v) for k, v in data["lambda"].items()},
            tuple(data["tau"]),
            as_fraction(data["measuredC"]),
            as_fraction(data["measuredLambda"]),
            tuple(as_word(w) for w in data.get("hRelators", [])),
        )


def components(inst: ObstructionInstance) -> OrbitPartition:
    """Gamma components, largest first, equal sizes ordered by least vertex."""
    return partition_from_perms(inst.n, list(inst.gamma.values()))


def lambda_components(inst: ObstructionInstance) -> OrbitPartition:
    return partition_from_perms(inst.n, list(inst.lam.values()))


def compute_D(inst: ObstructionInstance, comps: OrbitPartition | None = None) -> frozenset[int]:
    """Points ``w`` whose component index is at most that of ``tau(w)``."""
    comps = comps or components(inst)
    idx = comps.point_to_block
    return frozenset(w for w in range(inst.n) if idx[w] <= idx[inst.tau[w]])


@dataclass(frozen=True)
class HeavyIndices:
    indices: tuple[int, ...]
    mass: int
    d_size: int
    implication_checked: bool
    implication_holds: bool


def heavy_indices(
    inst: ObstructionInstance, d: frozenset[int] | None = None, comps: OrbitPartition | None = None
) -> HeavyIndices:
    """Components meeting D in at least a tenth of their points, and their total size.

    When ``|D| >= 9N/20`` the consequence ``mass >= N/10`` is evaluated and
    recorded (never assumed).
    """
    comps = comps or components(inst)
    d = compute_D(inst, comps) if d is None else d
    heavy = []
    for j, block in enumerate(comps.blocks):
        meet = sum(1 for x in block if x in d)
        if meet >= HEAVY_THRESHOLD * len(block):
            heavy.append(j)
    mass = sum(len(comps.blocks[j]) for j in heavy)
    checked = len(d) >= D_THRESHOLD * inst.n
    holds = (mass >= MASS_THRESHOLD * inst.n) if checked else True
    return HeavyIndices(tuple(heavy), mass, len(d), checked, holds)


@dataclass
class ThetaPartition:
    component: int
    component_size: int
    blocks: list[tuple[int, ...]]
    lambda_chain: list[bool]
    boundary_sizes: list[int]
    boundary_union: int
    violations: list[str] = field(default_factory=list)

    @property
    def boundary_sum(self) -> int:
        return sum(self.boundary_sizes)

    @property
    def double_count_holds(self) -> bool:
        return 2 * self.boundary_union >= self.boundary_sum

    def to_json(self) -> dict:
        return {
            "component": self.component,
            "componentSize": self.component_size,
            "blockSizes": [len(b) for b in self.blocks],
            "lambdaChain": self.lambda_chain,
            "boundarySizes": self.boundary_sizes,
            "boundaryUnion": self.boundary_union,
            "doubleCountHolds": self.double_count_holds,
            "violations": self.violations,
        }


def theta_partition(
    inst: ObstructionInstance,
    j: int,
    comps: OrbitPartition | None = None,
    d: frozenset[int] | None = None,
    gamma_graph: MultiGraph | None = None,
) -> ThetaPartition:
    """Split ``D & Omega_j`` by the Lambda-component containing ``tau(w)``.

    Blocks are ordered by least element. For each block the comparison
    ``lambda |Theta_q| <= |Omega_j|`` is recorded; failures are listed in
    ``violations`` rather than raised.
    """
    comps = comps or components(inst)
    d = compute_D(inst, comps) if d is None else d
    g = gamma_graph or inst.gamma_graph()
    lam_idx = lambda_components(inst).point_to_block
    omega = comps.blocks[j]
    groups: dict[int, list[int]] = {}
    for w in omega:
        if w in d:
            groups.setdefault(lam_idx[inst.tau[w]], []).append(w)
    blocks = sorted((tuple(sorted(v)) for v in groups.values()), key=lambda b: b[0])

    inside_block = {}
    for q, b in enumerate(blocks):
        for x in b:
            inside_block[x] = q
    sizes = [0] * len(blocks)
    union = 0
    for u, v, _ in g.edges:
        qu, qv = inside_block.get(u), inside_block.get(v)
        if qu == qv:
            continue
        union += 1
        if qu is not None:
            sizes[qu] += 1
        if qv is not None:
            sizes[qv] += 1

    chain = [inst.measured_lambda * len(b) <= len(omega) for b in blocks]
    violations = [
        f"lambda*|Theta_{q}| = {inst.measured_lambda * len(b)} > |Omega_{j}| = {len(omega)}"
        for q, (b, ok) in enumerate(zip(blocks, chain)) if not ok
    ]
    return ThetaPartition(j, len(omega), blocks, chain, sizes, union, violations)


@dataclass
class ObstructionReport:
    n: int
    components: list[int]
    d_size: int
    heavy_indices: list[int]
    heavy_mass: int
    theta_stats: list[ThetaPartition]
    bad_edge_count: int
    gamma_edge_count: int
    c_prime: Fraction
    bound: Fraction
    bound_holds: bool
    precondition_flags: dict[str, bool]
    t_square_defect: Fraction
    implications: dict[str, bool | None]

    @property
    def theorem_instance(self) -> bool:
        return all(self.precondition_flags.values())

    @property
    def bad_edge_fraction(self) -> Fraction:
        return Fraction(self.bad_edge_count, self.n)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "components": self.components,
            "dSize": self.d_size,
            "heavyIndices": self.heavy_indices,
            "heavyMass": self.heavy_mass,
            "thetaStats": [t.to_json() for t in self.theta_stats],
            "badEdgeCount": self.bad_edge_count,
            "gammaEdgeCount": self.gamma_edge_count,
            "badEdgeFraction": _fr(self.bad_edge_fraction),
            "cPrime": _fr(self.c_prime),
            "bound": _fr(self.bound),
            "boundHolds": self.bound_holds,
            "preconditionFlags": dict(self.precondition_flags),
            "theoremInstance": self.theorem_instance,
            "tSquareDefect": _fr(self.t_square_defect),
            "implications": dict(self.implications),
        }


def lambda_edge_set(inst: ObstructionInstance) -> set[tuple[int, int]]:
    out = set()
    for p in inst.lam.values():
        for u in range(inst.n):
            v = p[u]
            out.add((u, v) if u <= v else (v, u))
    return out


def count_bad_edges(inst: ObstructionInstance) -> int:
    """Gamma-edges ``{v, s(v)}`` (with multiplicity) whose tau-image is not a Lambda-edge."""
    lam_edges = lambda_edge_set(inst)
    tau = inst.tau
    bad = 0
    for p in inst.gamma.values():
        for v in range(inst.n):
            a, b = tau[v], tau[p[v]]
            if ((a, b) if a <= b else (b, a)) not in lam_edges:
                bad += 1
    return bad


def precondition_flags(inst: ObstructionInstance, comps: OrbitPartition | None = None) -> dict[str, bool]:
    comps = comps or components(inst)
    if inst.h_relators:
        model = SoficApprox(inst.n, {**inst.gamma, **inst.lam})
        perfect = all(moved_points(evaluate_word(model, w)) == 0 for w in inst.h_relators)
    else:
        perfect = True
    return {
        "perfectOnH": perfect,
        "containment": blocks_refine(lambda_components(inst), comps).holds,
        "lambdaGT1": inst.measured_lambda > 1,
        "tSquareDefectOK": t_square_defect(inst) <= T_SQUARE_THRESHOLD,
    }


def t_square_defect(inst: ObstructionInstance) -> Fraction:
    return Fraction(moved_points(compose(inst.tau, inst.tau)), inst.n)


def bad_edge_count(inst: ObstructionInstance) -> ObstructionReport:
    """Run the full counting argument and assemble the report.

    ``bound_holds`` is an observed comparison ``bad >= c' N / 200``; it is
    a theorem instance only when every precondition flag holds.
    """
    comps = components(inst)
    d = compute_D(inst, comps)
    heavy = heavy_indices(inst, d, comps)
    g = inst.gamma_graph()
    thetas = [theta_partition(inst, j, comps, d, g) for j in heavy.indices]
    bad = count_bad_edges(inst)
    c_prime = inst.measured_c * min(Fraction(1), inst.measured_lambda - 1)
    bound = c_prime * inst.n / BOUND_DIVISOR
    tsq = t_square_defect(inst)
    d_implication = (len(d) >= D_THRESHOLD * inst.n) if tsq <= T_SQUARE_THRESHOLD else None
    return ObstructionReport(
        n=inst.n,
        components=comps.sizes(),
        d_size=len(d),
        heavy_indices=list(heavy.indices),
        heavy_mass=heavy.mass,
        theta_stats=thetas,
        bad_edge_count=bad,
        gamma_edge_count=len(g.edges),
        c_prime=c_prime,
        bound=bound,
        bound_holds=bad >= bound,
        precondition_flags=precondition_flags(inst, comps),
        t_square_defect=tsq,
        implications={
            "tSquareImpliesD": d_implication,
            "dImpliesMass": heavy.implication_holds if heavy.implication_checked else None,
            "doubleCount": all(t.double_count_holds for t in thetas),
        },
    )


def random_involution(n: int, rng: random.Random, fixed: int | None = None) -> Perm:
    """Uniformly shuffled involution with ``fixed`` fixed points (random parity-compatible count if omitted)."""
    if fixed is None:
        fixed = rng.randrange(n % 2, n + 1, 2)
    if (n - fixed) % 2:
        raise ValueError("n - fixed must be even")
    pts = list(range(n))
    rng.shuffle(pts)
    tau = list(range(n))
    for i in range(fixed, n, 2):
        a, b = pts[i], pts[i + 1]
        tau[a], tau[b] = b, a
    return tuple(tau)
