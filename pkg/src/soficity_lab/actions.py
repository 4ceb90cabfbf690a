"""Labeled permutation actions, orbit partitions and orbit-density reports.

Coset spaces of PSL_d(F_p) are realized concretely as projective spaces
P^{d-1}(F_p); the families of interest are the elementary generators of
SL_d ("full") and those of the upper-left SL_2 block ("psl2block").
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .errors import ScaleExceeded, UnknownFamily
from .modmat import (
    ModMatrix,
    canon_flat,
    elementary_generators,
    group_closure,
    identity_flat,
    is_prime,
    mul_flat,
    projective_scalars,
)

Perm = tuple[int, ...]

DEFAULT_POINT_BUDGET = 200_000


def check_perm(p: Sequence[int], n: int) -> None:
    if len(p) != n or set(p) != set(range(n)):
        raise ValueError(f"not a permutation of range({n}): {list(p)[:12]}...")


def compose(p: Perm, q: Perm) -> Perm:
    """``p`` after ``q``."""
    return tuple(p[i] for i in q)


def invert(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


@dataclass(frozen=True)
class LabeledAction:
    """Permutations of ``range(n)``, one per label, grouped into named families."""

    n: int
    generators: Mapping[str, Perm]
    families: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    point_labels: tuple | None = None

    def __post_init__(self):
        gens = {k: tuple(v) for k, v in self.generators.items()}
        for label, perm in gens.items():
            check_perm(perm, self.n)
        fams = {name: tuple(labels) for name, labels in self.families.items()}
        for name, labels in fams.items():
            missing = [lb for lb in labels if lb not in gens]
            if missing:
                raise ValueError(f"family {name!r} references unknown labels {missing}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "families", fams)

    def family(self, name: str) -> tuple[str, ...]:
        if name not in self.families:
            raise UnknownFamily(name)
        return self.families[name]

    def perms(self, family: str) -> list[Perm]:
        return [self.generators[lb] for lb in self.family(family)]

    def with_family(self, name: str, labels: Sequence[str]) -> LabeledAction:
        fams = dict(self.families)
        fams[name] = tuple(labels)
        return LabeledAction(self.n, self.generators, fams, self.point_labels)


# -- projective spaces ------------------------------------------------------------

def projective_points(d: int, p: int) -> list[tuple[int, ...]]:
    """Points of P^{d-1}(F_p) as vectors whose first nonzero coordinate is 1.

    Ordered lexicographically, so index 0 is ``(0, ..., 0, 1)``.
    """
    pts = []
    for v in product(range(p), repeat=d):
        nz = next((x for x in v if x), 0)
        if nz == 1:
            pts.append(v)
    return pts


def normalize_vector(v: Sequence[int], p: int) -> tuple[int, ...]:
    nz = next((x % p for x in v if x % p), None)
    if nz is None:
        raise ValueError("zero vector has no projective point")
    inv = pow(nz, -1, p)
    return tuple((x * inv) % p for x in v)


def matrix_on_points(mat: ModMatrix, points: Sequence[tuple[int, ...]], index: Mapping) -> Perm:
    d, p = mat.dim, mat.modulus
    rows = mat.rows
    out = []
    for v in points:
        w = [sum(rows[i][k] * v[k] for k in range(d)) for i in range(d)]
        out.append(index[normalize_vector(w, p)])
    return tuple(out)


def _label_elementary(d: int) -> list[str]:
    return [f"E{i + 1}{j + 1}" for i in range(d) for j in range(d) if i != j]


def projective_action(
    d: int,
    p: int,
    families: Mapping[str, Sequence[ModMatrix]] | None = None,
    budget: int = DEFAULT_POINT_BUDGET,
) -> LabeledAction:
    """Action of SL_d(F_p) matrices on P^{d-1}(F_p).

    Always provides family ``full`` (labels ``Eij`` for the transvections
    I + E_ij) and ``psl2block`` (``E12``, ``E21``). Extra ``families`` of
    matrices get labels ``<family>[k]``.
    """
    if d < 2 or not is_prime(p):
        raise ValueError("need d >= 2 and p prime")
    size = (p**d - 1) // (p - 1)
    if size > budget:
        raise ScaleExceeded(f"P^{d - 1}(F_{p}) has {size} points; budget is {budget}")
    points = projective_points(d, p)
    assert len(points) == size
    index = {v: i for i, v in enumerate(points)}

    gens: dict[str, Perm] = {}
    labels = _label_elementary(d)
    for lb, mat in zip(labels, elementary_generators(d, p)):
        gens[lb] = matrix_on_points(mat, points, index)
    fams: dict[str, tuple[str, ...]] = {"full": tuple(labels), "psl2block": ("E12", "E21")}
    for name, mats in (families or {}).items():
        fam_labels = []
        for k, mat in enumerate(mats):
            if mat.dim != d or mat.modulus != p:
                raise ValueError(f"family {name!r}: matrix {k} is not {d}x{d} mod {p}")
            lb = f"{name}[{k}]"
            gens[lb] = matrix_on_points(mat, points, index)
            fam_labels.append(lb)
        fams[name] = tuple(fam_labels)
    return LabeledAction(size, gens, fams, tuple(points))


def cayley_action(
    generators: Sequence[ModMatrix],
    labels: Sequence[str] | None = None,
    projective: bool = True,
    budget: int = DEFAULT_POINT_BUDGET,
) -> LabeledAction:
    """Left-multiplication action of the generated group on itself.

    Points are the group elements (flat canonical forms) in BFS order, so
    point 0 is the identity. The single family is named ``gens``.
    """
    d, m = generators[0].dim, generators[0].modulus
    scalars = projective_scalars(d, m) if projective else [1]
    elements = group_closure(generators, projective=projective, budget=budget)
    index = {g: i for i, g in enumerate(elements)}
    labels = list(labels) if labels is not None else [f"s{k}" for k in range(len(generators))]
    gens = {}
    for lb, g in zip(labels, generators):
        gf = canon_flat(g.entries, m, scalars)
        gens[lb] = tuple(index[canon_flat(mul_flat(gf, x, d, m), m, scalars)] for x in elements)
    return LabeledAction(len(elements), gens, {"gens": tuple(labels)}, tuple(elements))


def orbit_map(elements: Sequence[tuple[int, ...]], d: int, p: int, base_point: Sequence[int]) -> list[int]:
    """Index in P^{d-1}(F_p) of ``g . base_point`` for each flat matrix ``g`` mod p."""
    points = projective_points(d, p)
    index = {v: i for i, v in enumerate(points)}
    out = []
    for g in elements:
        w = [sum(g[i * d + k] * base_point[k] for k in range(d)) for i in range(d)]
        out.append(index[normalize_vector(w, p)])
    return out


# -- orbits ---------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitPartition:
    blocks: tuple[tuple[int, ...], ...]
    point_to_block: tuple[int, ...]

    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def size_multiset(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for b in self.blocks:
            out[len(b)] = out.get(len(b), 0) + 1
        return out


def partition_from_perms(n: int, perms: Sequence[Perm]) -> OrbitPartition:
    """Orbits of the group generated by ``perms``.

    Blocks are sorted by size descending, ties broken by least point.
    """
    seen = [-1] * n
    raw = []
    for start in range(n):
        if seen[start] >= 0:
            continue
        block = [start]
        seen[start] = len(raw)
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for g in perms:
                y = g[x]
                if seen[y] < 0:
                    seen[y] = len(raw)
                    block.append(y)
                    queue.append(y)
        raw.append(tuple(sorted(block)))
    raw.sort(key=lambda b: (-len(b), b[0]))
    p2b = [0] * n
    for k, b in enumerate(raw):
        for x in b:
            p2b[x] = k
    return OrbitPartition(tuple(raw), tuple(p2b))


def orbit_partition(action: LabeledAction, family: str) -> OrbitPartition:
    return partition_from_perms(action.n, action.perms(family))


@dataclass(frozen=True)
class ContainmentResult:
    holds: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self):
        return self.holds


def blocks_refine(fine: OrbitPartition, coarse: OrbitPartition) -> ContainmentResult:
    for block in fine.blocks:
        target = coarse.point_to_block[block[0]]
        if any(coarse.point_to_block[x] != target for x in block):
            return ContainmentResult(False, block)
    return ContainmentResult(True)


def orbit_containment_check(action: LabeledAction, family_a: str, family_b: str) -> ContainmentResult:
    """Whether every ``family_b`` orbit lies inside a ``family_a`` orbit.

    On failure ``witness`` is the first offending B-orbit.
    """
    return blocks_refine(orbit_partition(action, family_b), orbit_partition(action, family_a))


@dataclass(frozen=True)
class DensityReport:
    total_points: int
    max_b_orbit: int
    min_a_orbit: int
    lam: Fraction
    sixteen_bound_holds: bool

    @property
    def lambda_gt_1(self) -> bool:
        return self.lam > 1

    def to_json(self) -> dict:
        return {
            "totalPoints": self.total_points,
            "maxBOrbit": self.max_b_orbit,
            "minAOrbit": self.min_a_orbit,
            "lambda": f"{self.lam.numerator}/{self.lam.denominator}",
            "lambdaGT1": self.lambda_gt_1,
            "sixteenBoundHolds": self.sixteen_bound_holds,
        }


def density_report(action: LabeledAction, family_a: str, family_b: str) -> DensityReport:
    """Smallest A-orbit against largest B-orbit, counted as points.

    ``lam`` is their exact ratio; ``sixteen_bound_holds`` records whether
    ``16 * max_b_orbit <= n``.
    """
    a_sizes = orbit_partition(action, family_a).sizes()
    b_sizes = orbit_partition(action, family_b).sizes()
    max_b = max(b_sizes)
    min_a = min(a_sizes)
    return DensityReport(action.n, max_b, min_a, Fraction(min_a, max_b), 16 * max_b <= action.n)


def identity_perm(n: int) -> Perm:
    return tuple(range(n))


def upper_left_block(rows2: Sequence[Sequence[int]], d: int, m: int) -> ModMatrix:
    """Embed a 2x2 matrix in the upper-left corner of the d x d identity."""
    e = list(identity_flat(d))
    for i in range(2):
        for j in range(2):
            e[i * d + j] = rows2[i][j]
    return ModMatrix(d, m, tuple(e))
