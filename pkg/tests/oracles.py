"""Brute-force reference computations, deliberately independent of soficity_lab.

Everything here is slow, literal and written straight from the definitions:
no shared helpers with the package, no numpy.
"""

from fractions import Fraction
from itertools import combinations, permutations, product
import math


def leibniz_det(rows, m=None):
    n = len(rows)
    total = 0
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inversions % 2 else 1
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total % m if m else total


def sl_elements(d, m):
    """All d x d matrices mod m with determinant 1, as row tuples."""
    out = []
    for entries in product(range(m), repeat=d * d):
        rows = [entries[i * d:(i + 1) * d] for i in range(d)]
        if leibniz_det(rows, m) == 1:
            out.append(tuple(entries))
    return out


def psl_order_brute(d, p):
    """|SL_d(F_p)| by enumeration, divided by the number of scalar matrices in it."""
    sl = sl_elements(d, p)
    central = sum(1 for lam in range(1, p) if pow(lam, d, p) == 1)
    return len(sl) // central


def psl_order_bigint(d, p):
    """The order as an explicit product, written out independently of the package formula."""
    num = 1
    for j in range(d):
        num *= p ** d - p ** j
    return num // (math.gcd(d, p - 1) * (p - 1))


def projective_points_brute(d, p):
    """Lines of F_p^d, each as the frozenset of its nonzero vectors."""
    lines = set()
    for v in product(range(p), repeat=d):
        if any(v):
            lines.add(frozenset(tuple(lam * x % p for x in v) for lam in range(1, p)))
    return lines


def elementary(d, p, i, j):
    rows = [[int(r == c) for c in range(d)] for r in range(d)]
    rows[i][j] = 1
    return rows


def orbit_sizes_brute(d, p, mats):
    """Orbit sizes of the group generated by ``mats`` on projective points, via repeated closure."""
    lines = list(projective_points_brute(d, p))
    owner = {}
    for idx, line in enumerate(lines):
        for v in line:
            owner[v] = idx

    def apply(mat, v):
        return tuple(sum(mat[r][c] * v[c] for c in range(d)) % p for r in range(d))

    seen = set()
    sizes = []
    for start in range(len(lines)):
        if start in seen:
            continue
        orbit = {start}
        changed = True
        while changed:
            changed = False
            for idx in list(orbit):
                v = next(iter(lines[idx]))
                for mat in mats:
                    w = owner[apply(mat, v)]
                    if w not in orbit:
                        orbit.add(w)
                        changed = True
        seen |= orbit
        sizes.append(len(orbit))
    return sorted(sizes, reverse=True)


def undirected_boundary(n, edges, subset):
    s = set(subset)
    return sum(1 for u, v in edges if u != v and ((u in s) != (v in s)))


def expansion_brute(n, edges):
    """min |dW|/|W| over nonempty W with |W| <= n/2, via itertools.combinations."""
    best = None
    for k in range(1, n // 2 + 1):
        for w in combinations(range(n), k):
            r = Fraction(undirected_boundary(n, edges, w), k)
            if best is None or r < best:
                best = r
    return best


def bad_edges_brute(n, gamma_perms, lambda_perms, tau):
    """Double loop over Gamma-edges and Lambda-edges, no hashing."""
    lam_pairs = []
    for p in lambda_perms:
        for u in range(n):
            lam_pairs.append((u, p[u]))
    bad = 0
    for p in gamma_perms:
        for v in range(n):
            a, b = tau[v], tau[p[v]]
            hit = False
            for x, y in lam_pairs:
                if (x == a and y == b) or (x == b and y == a):
                    hit = True
                    break
            if not hit:
                bad += 1
    return bad


def components_brute(n, perms):
    """Connected components via union-find, sorted by size desc then least vertex."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for u in range(n):
            a, b = find(u), find(p[u])
            if a != b:
                parent[a] = b
    groups = {}
    for u in range(n):
        groups.setdefault(find(u), []).append(u)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: (-len(g), g[0]))


def word_perm(assignment, word):
    """Evaluate a word (list of (symbol, +-1)) right to left, inverting by search."""
    n = len(next(iter(assignment.values())))
    out = list(range(n))
    for sym, e in reversed(word):
        p = assignment[sym]
        if e == 1:
            out = [p[x] for x in out]
        else:
            out = [p.index(x) for x in out]
    return out


def mat2_trace_hyperbolic(m):
    """SL_2(Z) closed form: hyperbolic iff |trace| > 2."""
    return abs(m[0][0] + m[1][1]) > 2


def int_matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
