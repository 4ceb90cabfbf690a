"""Desk-scale checks of the reductions to prime quotients.

* :func:`crt_split` factors a modulus and reduces/recombines matrices.
* :func:`frattini_probe` tests that lifts of mod-p generators of PSL_d(F_p)
  generate PSL_d(Z/p^n Z), i.e. that the reduction kernel consists of
  non-generators.
* :func:`normal_subgroups_of_product` enumerates the normal subgroups of
  a product of two small simple groups by brute force.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ._parallel import pmap
from .actions import Perm, compose, invert, projective_action
from .errors import ScaleExceeded
from .modmat import (
    ModMatrix,
    bfs_closure,
    canon_flat,
    elementary_generators,
    identity_flat,
    is_prime,
    mul_flat,
    projective_scalars,
    psl_order,
    psl_order_prime_power,
)


# -- CRT -----------------------------------------------------------------------

def factorize(q: int) -> list[tuple[int, int]]:
    out = []
    f = 2
    while f * f <= q:
        if q % f == 0:
            e = 0
            while q % f == 0:
                q //= f
                e += 1
            out.append((f, e))
        f += 1
    if q > 1:
        out.append((q, 1))
    return out


@dataclass(frozen=True)
class CrtSplit:
    q: int
    factors: tuple[tuple[int, int], ...]

    @property
    def moduli(self) -> list[int]:
        return [p**n for p, n in self.factors]

    def reduce(self, mat: ModMatrix) -> list[ModMatrix]:
        return [mat.reduce(m) for m in self.moduli]

    def recombine(self, parts: Sequence[ModMatrix]) -> ModMatrix:
        if len(parts) != len(self.factors):
            raise ValueError("one component per prime-power factor required")
        d = parts[0].dim
        entries = []
        for idx in range(d * d):
            x = 0
            for part, m in zip(parts, self.moduli):
                rest = self.q // m
                x += part.entries[idx] * rest * pow(rest, -1, m)
            entries.append(x % self.q)
        return ModMatrix(d, self.q, tuple(entries))


def crt_split(q: int) -> CrtSplit:
    if q < 2:
        raise ValueError("q must be at least 2")
    return CrtSplit(q, tuple(factorize(q)))


# -- Frattini probe --------------------------------------------------------------

@dataclass
class FrattiniProbeReport:
    d: int
    p: int
    n: int
    trials: int
    seed: int
    failures: int = 0
    accepted: int = 0
    rejected_at_mod_p: int = 0
    unresolved: int = 0
    group_order: int = 0
    kernel_order: int = 0
    expected_kernel_order: int = 0

    def to_json(self) -> dict:
        return {
            "d": self.d, "p": self.p, "n": self.n, "trials": self.trials, "seed": self.seed,
            "failures": self.failures, "accepted": self.accepted,
            "rejectedAtModP": self.rejected_at_mod_p, "unresolved": self.unresolved,
            "groupOrder": self.group_order, "kernelOrder": self.kernel_order,
            "expectedKernelOrder": self.expected_kernel_order,
        }


def _reduce_canon(g, d, p, scalars_p):
    return canon_flat(tuple(x % p for x in g), p, scalars_p)


def _closure_size(gens, d, m, scalars, budget):
    def mul(a, b):
        return canon_flat(mul_flat(a, b, d, m), m, scalars)

    return len(bfs_closure(gens, mul, identity_flat(d), budget))


_TRIAL_STATE: dict = {}


def _init_trial_state(state):
    _TRIAL_STATE.clear()
    _TRIAL_STATE.update(state)


def _run_trial(trial: int):
    st = _TRIAL_STATE
    d, p, n = st["d"], st["p"], st["n"]
    q = p**n
    rng = random.Random(f"{st['seed']}:{trial}")
    sampler = st["sampler"] or (lambda r: r.choice(st["elements"]))
    rejected = 0
    for _ in range(st["max_attempts"]):
        picks = [sampler(rng) for _ in range(st["set_size"])]
        mod_p = [_reduce_canon(g, d, p, st["scalars_p"]) for g in picks]
        if _closure_size(mod_p, d, p, st["scalars_p"], st["budget"]) != st["order_p"]:
            rejected += 1
            continue
        size = _closure_size(picks, d, q, st["scalars_q"], st["budget"])
        return ("accepted", size != st["order_q"], rejected)
    return ("unresolved", False, rejected)


def frattini_probe(
    d: int,
    p: int,
    n: int,
    trials: int = 50,
    seed: int = 0,
    set_size: int = 2,
    max_attempts: int = 100,
    budget: int = 1_000_000,
    sampler: Callable[[random.Random], tuple[int, ...]] | None = None,
) -> FrattiniProbeReport:
    """Check that lifts of mod-p generating sets generate PSL_d(Z/p^n Z).

    Each trial draws ``set_size`` elements (uniformly from the enumerated
    group unless ``sampler`` is given), redraws until their reductions
    generate PSL_d(F_p), then closes them mod p^n. A failure is an
    accepted set that does not generate the whole group. Trials that never
    pass the mod-p stage within ``max_attempts`` are ``unresolved``.
    """
    if not is_prime(p) or n < 1 or d < 2:
        raise ValueError("need d >= 2, p prime, n >= 1")
    q = p**n
    expected_order = psl_order_prime_power(d, p, n)
    if expected_order > budget:
        raise ScaleExceeded(f"|PSL_{d}(Z/{q}Z)| = {expected_order} exceeds budget {budget}")
    scalars_q = projective_scalars(d, q)
    scalars_p = projective_scalars(d, p)
    gens = [canon_flat(g.entries, q, scalars_q) for g in elementary_generators(d, q)]

    def mul(a, b):
        return canon_flat(mul_flat(a, b, d, q), q, scalars_q)

    elements = bfs_closure(gens, mul, identity_flat(d), budget)
    ident_p = identity_flat(d)
    kernel = sum(1 for g in elements if _reduce_canon(g, d, p, scalars_p) == ident_p)

    report = FrattiniProbeReport(
        d, p, n, trials, seed,
        group_order=len(elements),
        kernel_order=kernel,
        expected_kernel_order=p ** ((n - 1) * (d * d - 1)),
    )
    state = dict(
        d=d, p=p, n=n, seed=seed, set_size=set_size, max_attempts=max_attempts, budget=budget,
        elements=elements, scalars_p=scalars_p, scalars_q=scalars_q, sampler=sampler,
        order_p=psl_order(d, p).order, order_q=len(elements),
    )
    if sampler is None:
        outcomes = pmap(_run_trial, range(trials), initializer=_init_trial_state, initargs=(state,))
    else:
        _init_trial_state(state)
        outcomes = [_run_trial(t) for t in range(trials)]
    for kind, failed, rejected in outcomes:
        report.rejected_at_mod_p += rejected
        if kind == "accepted":
            report.accepted += 1
            report.failures += int(failed)
        else:
            report.unresolved += 1
    return report


def borel_sampler(d: int, q: int) -> Callable[[random.Random], tuple[int, ...]]:
    """Random upper unitriangular matrices mod q (a proper subgroup; never generates mod p)."""
    scalars = projective_scalars(d, q)

    def sample(rng: random.Random):
        e = list(identity_flat(d))
        for i in range(d):
            for j in range(i + 1, d):
                e[i * d + j] = rng.randrange(q)
        return canon_flat(tuple(e), q, scalars)

    return sample


# -- normal subgroups of H1 x H2 ---------------------------------------------------

@dataclass(frozen=True)
class PermGroup:
    """A permutation group given by its degree and generators."""

    degree: int
    generators: tuple[Perm, ...]
    name: str = ""

    def identity(self) -> Perm:
        return tuple(range(self.degree))

    def elements(self, budget: int | None = None) -> list[Perm]:
        return bfs_closure(self.generators, compose, self.identity(), budget)

    def order(self) -> int:
        return len(self.elements())


def alternating_group(k: int) -> PermGroup:
    if k < 3:
        return PermGroup(max(k, 1), (), f"A{k}")
    gens = [tuple([1, 2, 0] + list(range(3, k)))]
    if k > 3:
        if k % 2:
            gens.append(tuple(list(range(1, k)) + [0]))
        else:
            gens.append(tuple([0] + list(range(2, k)) + [1]))
    return PermGroup(k, tuple(gens), f"A{k}")


def psl_perm_group(d: int, p: int) -> PermGroup:
    """PSL_d(F_p) via its action on P^{d-1}(F_p) (faithful)."""
    act = projective_action(d, p)
    return PermGroup(act.n, tuple(act.perms("full")), f"PSL{d}({p})")


def trivial_group() -> PermGroup:
    return PermGroup(1, (), "1")


def direct_product(h1: PermGroup, h2: PermGroup) -> PermGroup:
    n1, n2 = h1.degree, h2.degree
    gens = []
    for g in h1.generators:
        gens.append(tuple(g) + tuple(range(n1, n1 + n2)))
    for g in h2.generators:
        gens.append(tuple(range(n1)) + tuple(x + n1 for x in g))
    return PermGroup(n1 + n2, tuple(gens), f"{h1.name}x{h2.name}")


def _perm_order(p: Perm) -> int:
    k, x, ident = 1, p, tuple(range(len(p)))
    while x != ident:
        x = compose(p, x)
        k += 1
    return k


def order_profile(g: PermGroup) -> tuple[int, tuple]:
    """Group order with the multiset of element orders; an isomorphism invariant."""
    els = g.elements()
    return len(els), tuple(sorted(Counter(_perm_order(x) for x in els).items()))


def _subgroup(gens: Sequence[Perm], ident: Perm) -> frozenset:
    return frozenset(bfs_closure(gens, compose, ident))


def normal_closure(x: Perm, group_gens: Sequence[Perm], ident: Perm) -> tuple[frozenset, list[Perm]]:
    gens = [x]
    sub = _subgroup(gens, ident)
    changed = True
    while changed:
        changed = False
        for g in group_gens:
            ginv = invert(g)
            for s in list(gens):
                c = compose(compose(g, s), ginv)
                if c not in sub:
                    gens.append(c)
                    sub = _subgroup(gens, ident)
                    changed = True
    return sub, gens


def conjugacy_classes(elements: Sequence[Perm], group_gens: Sequence[Perm]) -> list[list[Perm]]:
    inverses = [invert(g) for g in group_gens]
    seen: set = set()
    classes = []
    for x in elements:
        if x in seen:
            continue
        cls = [x]
        seen.add(x)
        i = 0
        while i < len(cls):
            y = cls[i]
            i += 1
            for g, gi in zip(group_gens, inverses):
                z = compose(compose(g, y), gi)
                if z not in seen:
                    seen.add(z)
                    cls.append(z)
        classes.append(cls)
    return classes


@dataclass
class NormalSubgroup:
    order: int
    label: str
    elements: frozenset = field(repr=False)


@dataclass
class NormalSubgroupReport:
    factor_orders: tuple[int, int]
    subgroups: list[NormalSubgroup]
    all_subproducts: bool
    hypothesis_violated: bool

    def labels(self) -> set[str]:
        return {s.label for s in self.subgroups}

    def to_json(self) -> dict:
        return {
            "factorOrders": list(self.factor_orders),
            "subgroups": [{"order": s.order, "label": s.label} for s in self.subgroups],
            "allSubproducts": self.all_subproducts,
            "hypothesisViolated": self.hypothesis_violated,
        }


def _label_subproduct(sub: frozenset, n1: int, o1: int, o2: int) -> str:
    p1 = {x[:n1] for x in sub}
    p2 = {x[n1:] for x in sub}
    if len(sub) != len(p1) * len(p2) or len(p1) not in (1, o1) or len(p2) not in (1, o2):
        return "non-subproduct"
    names = [nm for nm, size, full in (("H1", len(p1), o1), ("H2", len(p2), o2)) if size == full and full > 1]
    return "x".join(names) if names else "1"


def normal_subgroups_of_product(h1: PermGroup, h2: PermGroup, budget: int = 20_000) -> NormalSubgroupReport:
    """All normal subgroups of ``h1 x h2``, each labeled by the factor product it equals.

    Normal closures of conjugacy-class representatives and their joins give
    the full lattice. ``hypothesis_violated`` is set when the factors share
    order and element-order profile (treated as isomorphic).
    """
    prof1, prof2 = order_profile(h1), order_profile(h2)
    o1, o2 = prof1[0], prof2[0]
    if o1 * o2 > budget:
        raise ScaleExceeded(f"|H1 x H2| = {o1 * o2} exceeds budget {budget}")
    g = direct_product(h1, h2)
    ident = g.identity()
    elements = g.elements()

    found: dict[frozenset, list[Perm]] = {frozenset([ident]): []}
    for cls in conjugacy_classes(elements, g.generators):
        sub, gens = normal_closure(cls[0], g.generators, ident)
        found.setdefault(sub, gens)
    changed = True
    while changed:
        changed = False
        items = list(found.items())
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                a, ga = items[i]
                b, gb = items[j]
                if a <= b or b <= a:
                    continue
                join = _subgroup(ga + gb, ident)
                if join not in found:
                    found[join] = ga + gb
                    changed = True

    n1 = h1.degree
    subs = [NormalSubgroup(len(s), _label_subproduct(s, n1, o1, o2), s) for s in found]
    subs.sort(key=lambda s: (s.order, s.label))
    return NormalSubgroupReport(
        (o1, o2),
        subs,
        all(s.label != "non-subproduct" for s in subs),
        prof1 == prof2 and o1 > 1,
    )
