"""Schreier coset multigraphs, edge boundaries and edge expansion.

Edges are undirected for counting purposes: an edge crossing the
boundary of ``W`` is counted once per multiplicity, loops never cross and
contribute 2 to the degree of their vertex.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .actions import LabeledAction
from .errors import NoAdmissibleSubset, NoConvergence, NotACovering, NotRegular, OutOfRange, ScaleExceeded

EXACT_MAX_VERTICES = 24
POWER_ITERATION_SEED = 1729
POWER_ITERATION_MAX_ITERS = 100_000

Edge = tuple[int, int, str]


@dataclass(frozen=True)
class MultiGraph:
    """Vertices ``range(n)`` and an edge multiset of ``(u, v, label)``.

    For Schreier graphs ``v`` is the image of ``u`` under the label's
    permutation; edges are kept in (label order, u) order.
    """

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        for u, v, _ in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise OutOfRange(f"edge ({u}, {v}) outside range({self.n})")

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def regular_degree(self) -> int | None:
        deg = self.degrees()
        return deg[0] if deg and all(x == deg[0] for x in deg) else None

    def labels(self) -> list[str]:
        seen: dict[str, None] = {}
        for _, _, lb in self.edges:
            seen.setdefault(lb, None)
        return list(seen)

    def components(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        comps.sort(key=lambda c: (-len(c), c[0]))
        return comps

    def adjacency(self) -> sp.csr_matrix:
        rows, cols = [], []
        for u, v, _ in self.edges:
            rows += [u, v]
            cols += [v, u]
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v} {lb}\n" for u, v, lb in self.edges)

    @classmethod
    def from_edge_list(cls, text: str, n: int | None = None) -> MultiGraph:
        edges = []
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            label = parts[2] if len(parts) > 2 else ""
            edges.append((int(parts[0]), int(parts[1]), label))
        if n is None:
            n = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
        return cls(n, tuple(edges))

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        lines += [f"  {v};" for v in range(self.n)]
        for u, v, lb in self.edges:
            attr = f' [label="{lb}"]' if lb else ""
            lines.append(f"  {u} -- {v}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def from_pairs(n: int, pairs: Iterable[tuple[int, int]], label: str = "") -> MultiGraph:
    return MultiGraph(n, tuple((u, v, label) for u, v in pairs))


def cycle_graph(n: int) -> MultiGraph:
    return from_pairs(n, [(i, (i + 1) % n) for i in range(n)], "s")


def complete_graph(n: int) -> MultiGraph:
    return from_pairs(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def graph_from_perms(n: int, perms: Mapping[str, Sequence[int]]) -> MultiGraph:
    edges = []
    for label, perm in perms.items():
        edges += [(v, perm[v], label) for v in range(n)]
    return MultiGraph(n, tuple(edges))


def build_schreier(action: LabeledAction, family: str) -> MultiGraph:
    """One edge ``{v, s(v)}`` per vertex and generator ``s`` of the family."""
    labels = action.family(family)
    return graph_from_perms(action.n, {lb: action.generators[lb] for lb in labels})


# -- boundaries ---------------------------------------------------------------

def _as_mask(g: MultiGraph, w: Iterable[int]) -> list[bool]:
    inside = [False] * g.n
    for x in w:
        if not 0 <= x < g.n:
            raise OutOfRange(f"vertex {x} outside range({g.n})")
        inside[x] = True
    return inside


def boundary_edges(g: MultiGraph, w: Iterable[int]) -> list[int]:
    """Indices (into ``g.edges``) of edges with exactly one endpoint in ``w``."""
    inside = _as_mask(g, w)
    return [i for i, (u, v, _) in enumerate(g.edges) if inside[u] != inside[v]]


def edge_boundary(g: MultiGraph, w: Iterable[int]) -> int:
    return len(boundary_edges(g, w))


def isoperimetric_ratio(g: MultiGraph, w: Iterable[int]) -> Fraction:
    w = set(w)
    if not w:
        raise NoAdmissibleSubset("isoperimetric ratio of the empty set")
    return Fraction(edge_boundary(g, w), len(w))


# -- expansion ----------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionResult:
    mode: str
    value: Fraction | None = None
    witness: tuple[int, ...] | None = None
    lo: float | None = None
    hi: float | None = None
    lambda2: float | None = None
    iterations: int = 0

    def contains(self, x) -> bool:
        if self.mode == "exact":
            return self.value == x
        return self.lo <= float(x) <= self.hi

    def to_json(self) -> dict:
        if self.mode == "exact":
            return {
                "mode": "exact",
                "value": f"{self.value.numerator}/{self.value.denominator}",
                "witness": list(self.witness),
            }
        return {"mode": "spectral", "lo": self.lo, "hi": self.hi, "lambda2": self.lambda2,
                "iterations": self.iterations}


def expansion_exact(g: MultiGraph, max_vertices: int = EXACT_MAX_VERTICES, chunk: int = 1 << 20) -> ExpansionResult:
    """Minimum of |dW|/|W| over nonempty ``W`` with ``|W| <= n/2``, by full subset scan.

    Ties are broken by smallest ``|W|``, then smallest bitmask.
    """
    n = g.n
    if n > max_vertices:
        raise ScaleExceeded(f"exact expansion limited to {max_vertices} vertices, graph has {n}")
    half = n // 2
    if half < 1:
        raise NoAdmissibleSubset("no nonempty W with |W| <= n/2")
    eu = np.array([u for u, v, _ in g.edges if u != v], dtype=np.int64)
    ev = np.array([v for u, v, _ in g.edges if u != v], dtype=np.int64)

    best_b = [None] * (half + 1)
    best_mask = [None] * (half + 1)
    total = 1 << n
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        sizes = np.bitwise_count(masks)
        keep = sizes <= half
        masks, sizes = masks[keep], sizes[keep]
        if masks.size == 0:
            continue
        bnd = np.zeros(masks.size, dtype=np.int64)
        for u, v in zip(eu, ev):
            bnd += ((masks >> u) ^ (masks >> v)) & 1
        for k in range(1, half + 1):
            sel = sizes == k
            if not sel.any():
                continue
            idx = np.argmin(np.where(sel, bnd, np.iinfo(np.int64).max))
            b = int(bnd[idx])
            if best_b[k] is None or b < best_b[k]:
                best_b[k], best_mask[k] = b, int(masks[idx])

    value, witness_mask = None, None
    for k in range(1, half + 1):
        if best_b[k] is None:
            continue
        r = Fraction(best_b[k], k)
        if value is None or r < value:
            value, witness_mask = r, best_mask[k]
    witness = tuple(i for i in range(n) if witness_mask >> i & 1)
    return ExpansionResult("exact", value=value, witness=witness)


def second_eigenvalue(
    g: MultiGraph,
    tol: float = 1e-12,
    max_iters: int = POWER_ITERATION_MAX_ITERS,
    seed: int = POWER_ITERATION_SEED,
) -> tuple[float, float, int]:
    """Bracket for the second-smallest normalized-Laplacian eigenvalue of a regular graph.

    Power iteration on ``(I + A/k)/2`` with the constant vector projected
    out. Returns ``(lo, hi, iterations)``: ``hi`` comes from the Rayleigh
    quotient, ``lo`` subtracts the residual norm.
    """
    k = g.regular_degree()
    if k is None:
        raise NotRegular("spectral bounds need a regular graph")
    if g.n < 2:
        raise NoAdmissibleSubset("need at least two vertices")
    if len(g.components()) > 1:
        return 0.0, 0.0, 0
    b = (sp.identity(g.n, format="csr") + g.adjacency() / k) * 0.5
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(g.n)
    x -= x.mean()
    x /= np.linalg.norm(x)
    rq_prev = None
    for it in range(1, max_iters + 1):
        y = b @ x
        rq = float(x @ y)
        y -= y.mean()
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # x spans an eigenvalue-0 direction of b, i.e. lambda_2 = 2
            return 2.0, 2.0, it
        if rq_prev is not None and abs(rq - rq_prev) < tol:
            resid = float(np.linalg.norm(b @ x - rq * x))
            hi = 2.0 * (1.0 - rq)
            lo = max(0.0, 2.0 * (1.0 - rq - resid))
            return lo, max(hi, 0.0), it
        rq_prev = rq
        x = y / ny
    raise NoConvergence(tol, max_iters)


def expansion_spectral(g: MultiGraph, tol: float = 1e-12, max_iters: int = POWER_ITERATION_MAX_ITERS) -> ExpansionResult:
    """Cheeger interval ``[k lambda2 / 2, k sqrt(2 lambda2)]`` around the expansion constant."""
    k = g.regular_degree()
    if k is None:
        raise NotRegular("spectral bounds need a regular graph")
    lam_lo, lam_hi, iters = second_eigenvalue(g, tol, max_iters)
    lo = k * lam_lo / 2.0
    hi = k * float(np.sqrt(2.0 * lam_hi))
    return ExpansionResult("spectral", lo=lo, hi=hi, lambda2=lam_hi, iterations=iters)


# -- coverings ------------------------------------------------------------------

def _successors(g: MultiGraph) -> dict[str, list[int]]:
    succ: dict[str, list[int | None]] = {}
    for u, v, lb in g.edges:
        row = succ.setdefault(lb, [None] * g.n)
        if row[u] is not None:
            raise NotACovering(f"label {lb!r} has two edges out of vertex {u}", vertex=u, label=lb)
        row[u] = v
    for lb, row in succ.items():
        if None in row:
            u = row.index(None)
            raise NotACovering(f"label {lb!r} has no edge out of vertex {u}", vertex=u, label=lb)
    return succ


def validate_covering(cover: MultiGraph, base: MultiGraph, fiber_map: Sequence[int]) -> None:
    """Raise :class:`NotACovering` unless ``fiber_map`` is a label-preserving covering."""
    if len(fiber_map) != cover.n:
        raise NotACovering("fiber map must assign every cover vertex")
    if set(fiber_map) != set(range(base.n)):
        raise NotACovering("fiber map is not surjective onto the base")
    sc, sb = _successors(cover), _successors(base)
    if set(sc) != set(sb):
        raise NotACovering(f"label sets differ: {sorted(sc)} vs {sorted(sb)}")
    for lb, row in sc.items():
        brow = sb[lb]
        for u, v in enumerate(row):
            if fiber_map[v] != brow[fiber_map[u]]:
                raise NotACovering(
                    f"edge {u} -{lb}-> {v} maps to {fiber_map[u]} -> {fiber_map[v]}, "
                    f"base has {fiber_map[u]} -> {brow[fiber_map[u]]}",
                    vertex=u,
                    label=lb,
                )


@dataclass
class CoveringReport:
    trials: int
    seed: int
    equal: int
    mismatches: list

    @property
    def all_equal(self) -> bool:
        return self.equal == self.trials

    def to_json(self) -> dict:
        return {"trials": self.trials, "seed": self.seed, "equal": self.equal,
                "allEqual": self.all_equal, "mismatches": self.mismatches}


def covering_ratio_check(
    cover: MultiGraph, base: MultiGraph, fiber_map: Sequence[int], trials: int = 100, seed: int = 0
) -> CoveringReport:
    """Compare the isoperimetric ratio of random base subsets with that of their preimages."""
    validate_covering(cover, base, fiber_map)
    rng = random.Random(seed)
    fibers: list[list[int]] = [[] for _ in range(base.n)]
    for v, b in enumerate(fiber_map):
        fibers[b].append(v)
    equal, mismatches = 0, []
    for _ in range(trials):
        size = rng.randint(1, base.n)
        d = rng.sample(range(base.n), size)
        pre = [v for b in d for v in fibers[b]]
        r_base = isoperimetric_ratio(base, d)
        r_cover = isoperimetric_ratio(cover, pre)
        if r_base == r_cover:
            equal += 1
        else:
            mismatches.append({"subset": sorted(d), "base": str(r_base), "cover": str(r_cover)})
    return CoveringReport(trials, seed, equal, mismatches)
