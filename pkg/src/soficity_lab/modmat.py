"""Matrices over Z/mZ, projective canonical forms and PSL_d order formulas.

Matrices are stored row-major as flat tuples of residues. The hot loops
(closure enumeration, coset actions) use the ``*_flat`` helpers directly;
:class:`ModMatrix` wraps them for everything else.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd, prod
from typing import Callable, Hashable, Iterable, Sequence

from .errors import NonUnitDeterminant, ScaleExceeded

Flat = tuple[int, ...]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# -- flat-tuple kernels -----------------------------------------------------

def mul_flat(a: Flat, b: Flat, d: int, m: int) -> Flat:
    out = []
    for i in range(d):
        row = a[i * d:(i + 1) * d]
        for j in range(d):
            s = 0
            for k in range(d):
                s += row[k] * b[k * d + j]
            out.append(s % m)
    return tuple(out)


def identity_flat(d: int) -> Flat:
    return tuple(1 if i == j else 0 for i in range(d) for j in range(d))


def det_int(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    n = len(rows)
    if n == 0:
        return 1
    a = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _minor(rows: Sequence[Sequence[int]], i: int, j: int) -> list[list[int]]:
    return [list(r[:j]) + list(r[j + 1:]) for k, r in enumerate(rows) if k != i]


def adjugate_int(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(rows)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            adj[j][i] = (-1) ** (i + j) * det_int(_minor(rows, i, j))
    return adj


def projective_scalars(d: int, m: int) -> list[int]:
    """Units ``lam`` mod m with ``lam**d == 1``; these are the central scalars of SL_d(Z/mZ)."""
    return [lam for lam in range(1, m) if gcd(lam, m) == 1 and pow(lam, d, m) == 1]


def canon_flat(a: Flat, m: int, scalars: Sequence[int]) -> Flat:
    """Lexicographically least scalar multiple of ``a`` over ``scalars``."""
    if len(scalars) == 1:
        return a
    best = a
    for lam in scalars:
        if lam == 1:
            continue
        cand = tuple((lam * x) % m for x in a)
        if cand < best:
            best = cand
    return best


def bfs_closure(
    generators: Iterable,
    multiply: Callable,
    identity: Hashable,
    budget: int | None = None,
) -> list:
    """All products of ``generators`` reachable from ``identity`` (left multiplication).

    For a finite group the result is the generated subgroup. Elements are
    returned in BFS discovery order.
    """
    gens = list(generators)
    seen = {identity}
    order = [identity]
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = multiply(g, x)
            if y not in seen:
                seen.add(y)
                order.append(y)
                if budget is not None and len(order) > budget:
                    raise ScaleExceeded(f"closure exceeded budget of {budget} elements")
                queue.append(y)
    return order


# -- value types ---------------------------------------------------------------

@dataclass(frozen=True)
class ModMatrix:
    """A ``dim`` x ``dim`` matrix with entries reduced into ``[0, modulus)``."""

    dim: int
    modulus: int
    entries: Flat

    def __post_init__(self):
        if self.dim < 1 or self.modulus < 2:
            raise ValueError("need dim >= 1 and modulus >= 2")
        if len(self.entries) != self.dim * self.dim:
            raise ValueError(f"expected {self.dim * self.dim} entries, got {len(self.entries)}")
        reduced = tuple(int(x) % self.modulus for x in self.entries)
        object.__setattr__(self, "entries", reduced)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], modulus: int) -> ModMatrix:
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise ValueError("matrix must be square")
        return cls(d, modulus, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, dim: int, modulus: int) -> ModMatrix:
        return cls(dim, modulus, identity_flat(dim))

    @property
    def rows(self) -> list[list[int]]:
        d = self.dim
        return [list(self.entries[i * d:(i + 1) * d]) for i in range(d)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.dim + j]

    def _check_compatible(self, other: ModMatrix):
        if self.dim != other.dim or self.modulus != other.modulus:
            raise ValueError(
                f"incompatible matrices: ({self.dim}, mod {self.modulus}) vs ({other.dim}, mod {other.modulus})"
            )

    def __matmul__(self, other: ModMatrix) -> ModMatrix:
        self._check_compatible(other)
        return ModMatrix(self.dim, self.modulus, mul_flat(self.entries, other.entries, self.dim, self.modulus))

    def det(self) -> int:
        return det_int(self.rows) % self.modulus

    def is_identity(self) -> bool:
        return self.entries == identity_flat(self.dim)

    def inverse(self) -> ModMatrix:
        det = det_int(self.rows)
        if gcd(det, self.modulus) != 1:
            raise NonUnitDeterminant(f"det = {det % self.modulus} is not a unit mod {self.modulus}")
        dinv = pow(det, -1, self.modulus)
        adj = adjugate_int(self.rows)
        return ModMatrix.from_rows([[dinv * x for x in r] for r in adj], self.modulus)

    def reduce(self, modulus: int) -> ModMatrix:
        """Reduction to Z/modulus Z; ``modulus`` must divide the current one."""
        if self.modulus % modulus:
            raise ValueError(f"{modulus} does not divide {self.modulus}")
        return ModMatrix(self.dim, modulus, self.entries)

    def to_text(self) -> str:
        lines = [f"{self.dim} {self.modulus}"]
        lines += [" ".join(map(str, r)) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ModMatrix:
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        d, m = int(lines[0][0]), int(lines[0][1])
        rows = [[int(x) for x in ln] for ln in lines[1:1 + d]]
        if len(rows) != d:
            raise ValueError(f"expected {d} matrix rows")
        return cls.from_rows(rows, m)

    def __str__(self) -> str:
        return self.to_text().rstrip()


def mat_mul(a: ModMatrix, b: ModMatrix) -> ModMatrix:
    return a @ b


def inverse(a: ModMatrix) -> ModMatrix:
    return a.inverse()


@dataclass(frozen=True)
class ProjectiveMatrix:
    """An element of PSL_d(Z/mZ), held by its canonical representative."""

    rep: ModMatrix

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def modulus(self) -> int:
        return self.rep.modulus

    def __matmul__(self, other: ProjectiveMatrix) -> ProjectiveMatrix:
        return canonicalize(self.rep @ other.rep)

    def inverse(self) -> ProjectiveMatrix:
        return canonicalize(self.rep.inverse())

    def is_identity(self) -> bool:
        return self.rep.is_identity()


def canonicalize(m: ModMatrix, projective: bool = True) -> ProjectiveMatrix:
    """Canonical representative of ``m``.

    With ``projective`` the representative is the lexicographically least
    (row-major) matrix among ``lam * m`` for central scalars ``lam``;
    otherwise ``m`` is only validated and wrapped.
    """
    if m.det() != 1 % m.modulus:
        raise NonUnitDeterminant(f"det = {m.det()} mod {m.modulus}; expected 1")
    if not projective:
        return ProjectiveMatrix(m)
    scalars = projective_scalars(m.dim, m.modulus)
    return ProjectiveMatrix(ModMatrix(m.dim, m.modulus, canon_flat(m.entries, m.modulus, scalars)))


def elementary_generators(d: int, m: int) -> list[ModMatrix]:
    """The ``d(d-1)`` transvections ``I + E_ij`` (i != j) over Z/mZ, ordered by (i, j)."""
    if d < 2 or m < 2:
        raise ValueError("need d >= 2 and m >= 2")
    gens = []
    for i in range(d):
        for j in range(d):
            if i != j:
                e = list(identity_flat(d))
                e[i * d + j] = 1
                gens.append(ModMatrix(d, m, tuple(e)))
    return gens


def transvection(d: int, m: int, i: int, j: int, r: int = 1) -> ModMatrix:
    e = list(identity_flat(d))
    e[i * d + j] = r
    return ModMatrix(d, m, tuple(e))


def group_closure(
    generators: Sequence[ModMatrix],
    projective: bool = False,
    budget: int | None = 2_000_000,
) -> list[Flat]:
    """Flat canonical forms of every element generated by ``generators``."""
    if not generators:
        raise ValueError("need at least one generator")
    d, m = generators[0].dim, generators[0].modulus
    scalars = projective_scalars(d, m) if projective else [1]
    gens = [canon_flat(g.entries, m, scalars) for g in generators]

    def multiply(g, x):
        return canon_flat(mul_flat(g, x, d, m), m, scalars)

    return bfs_closure(gens, multiply, identity_flat(d), budget)


# -- closed-form orders --------------------------------------------------------

@dataclass(frozen=True)
class GroupCard:
    d: int
    p: int
    order: int
    min_proper_index: int

    def to_json(self) -> dict:
        return {"d": self.d, "p": self.p, "order": self.order, "minProperIndex": self.min_proper_index}


def gl_order(d: int, p: int) -> int:
    return prod(p**d - p**j for j in range(d))


def psl_order(d: int, p: int) -> GroupCard:
    """|PSL_d(F_p)| = prod_{j<d}(p^d - p^j) / (gcd(d, p-1) (p-1)), and the index (p^d-1)/(p-1)."""
    if d < 2:
        raise ValueError("need d >= 2")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    order = gl_order(d, p) // (gcd(d, p - 1) * (p - 1))
    return GroupCard(d, p, order, (p**d - 1) // (p - 1))


def sl_order(d: int, p: int, n: int = 1) -> int:
    """|SL_d(Z/p^n Z)| = p^{(n-1)(d^2-1)} |SL_d(F_p)|."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p ** ((n - 1) * (d * d - 1)) * gl_order(d, p) // (p - 1)


def psl_order_prime_power(d: int, p: int, n: int) -> int:
    """|PSL_d(Z/p^n Z)|: SL order divided by the number of central scalars."""
    return sl_order(d, p, n) // len(projective_scalars(d, p**n))
