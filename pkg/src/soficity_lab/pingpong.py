"""Projective dynamics on RP^{d-1}: hyperbolic profiles and ping-pong certificates.

The metric is ``Delta(p, q) = sqrt(1 - <p, q>^2)``, the sine of the angle
between the two lines. A ball ``{x : Delta(x, c) < r}`` with ``r <= 1`` is
the angular cap of radius ``arcsin(r)`` around ``c``; geometric tests are
done with angles and all margins are angles in radians.

:func:`check_rooted_system` is a sampling certificate: ``Verified`` means
every sampled check passed with the requested margin, ``Refuted`` comes
with a witness point (re-checked in rational arithmetic where the claim
allows it).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidInput, NotHyperbolic, ScaleExceeded, UndefinedProjection
from .modmat import adjugate_int, det_int
from .presentations import Word

NORM_TOL = 1e-12
CAP_SAMPLE_SEED = 7
EXACT_SLOP = 1e-9  # unconfirmed failures shallower than this count as Inconclusive


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidInput("zero vector is not a projective point")
    v = v / n
    for x in v:
        if abs(x) > NORM_TOL:
            v = v if x > 0 else -v
            break
    return v + 0.0  # drop negative zeros


@dataclass(frozen=True)
class ProjectivePoint:
    """A line in R^d, stored as a unit vector whose first nonzero coordinate is positive."""

    vector: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(float(x) for x in _sign_normalize(self.vector)))

    @property
    def v(self) -> np.ndarray:
        return np.array(self.vector)

    @property
    def dim(self) -> int:
        return len(self.vector)


@dataclass(frozen=True)
class ProjHyperplane:
    """A projective hyperplane, represented by its unit normal."""

    normal: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(float(x) for x in _sign_normalize(self.normal)))

    @property
    def n(self) -> np.ndarray:
        return np.array(self.normal)


def point(*coords) -> ProjectivePoint:
    if len(coords) == 1 and not np.isscalar(coords[0]):
        coords = tuple(coords[0])
    return ProjectivePoint(tuple(coords))


def _unit(p) -> np.ndarray:
    return p.v if isinstance(p, ProjectivePoint) else p / np.linalg.norm(p)


def proj_metric(p: ProjectivePoint, q: ProjectivePoint) -> float:
    # |p - <p,q> q| equals sqrt(1 - <p,q>^2) but keeps its accuracy for nearby lines
    a, b = p.v, q.v
    return float(min(1.0, np.linalg.norm(a - np.dot(a, b) * b)))


def angle(p: ProjectivePoint | np.ndarray, q: ProjectivePoint | np.ndarray) -> float:
    """Angle in [0, pi/2] between two lines."""
    a, b = _unit(p), _unit(q)
    c = float(np.dot(a, b))
    return float(np.arctan2(np.linalg.norm(a - c * b), abs(c)))


def hyperplane_angle(p: ProjectivePoint | np.ndarray, h: ProjHyperplane) -> float:
    """Angle between a line and a hyperplane; ``sin`` of it is Delta(p, h)."""
    a = _unit(p)
    return float(np.arcsin(min(1.0, abs(float(np.dot(a, h.n))))))


def act(m, p: ProjectivePoint) -> ProjectivePoint:
    return ProjectivePoint(tuple(np.asarray(m, dtype=float) @ p.v))


# -- hyperbolic elements ---------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicProfile:
    alpha: ProjectivePoint
    alpha_inv: ProjectivePoint
    rho: ProjHyperplane
    rho_inv: ProjHyperplane
    top_gap: float
    bottom_gap: float
    eigenvalues: tuple[complex, ...] = field(default=(), repr=False)


def _closest(values: np.ndarray, target: complex) -> int:
    return int(np.argmin(np.abs(values - target)))


def _real_unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    # a real eigenvalue's eigenvector may come back with a common complex phase
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    return np.real(v) / np.linalg.norm(np.real(v))


def classify_hyperbolic(m: Sequence[Sequence[int]], tol: float = 1e-6) -> HyperbolicProfile:
    """Attracting points and repelling hyperplanes of ``m`` and ``m^-1``.

    Accepted iff the largest and smallest eigenvalue moduli are each
    separated from the rest by a factor greater than ``1 + tol`` and the
    extreme eigenvectors pair nondegenerately with the left eigenvectors.
    The default ``tol`` absorbs the square-root eigenvalue splitting of
    Jordan blocks in double precision.
    """
    rows = [list(map(int, r)) for r in m]
    d = len(rows)
    if d < 2 or any(len(r) != d for r in rows):
        raise InvalidInput("need a square matrix of size >= 2")
    if abs(det_int(rows)) != 1:
        raise InvalidInput("determinant must be +-1")
    a = np.array(rows, dtype=float)
    w, vr = np.linalg.eig(a)
    order = np.argsort(-np.abs(w), kind="stable")
    w, vr = w[order], vr[:, order]
    mods = np.abs(w)
    top_gap = float(mods[0] / mods[1])
    bottom_gap = float(mods[-2] / mods[-1])
    if top_gap <= 1 + tol or abs(w[0].imag) > tol * mods[0]:
        raise NotHyperbolic("degenerateTop", f"|eigenvalue| ratio {top_gap}")
    if bottom_gap <= 1 + tol or abs(w[-1].imag) > tol * mods[-1]:
        raise NotHyperbolic("degenerateBottom", f"|eigenvalue| ratio {bottom_gap}")

    wl, vl = np.linalg.eig(a.T)
    v_top, v_bot = _real_unit(vr[:, 0]), _real_unit(vr[:, -1])
    u_top = _real_unit(vl[:, _closest(wl, w[0])])
    u_bot = _real_unit(vl[:, _closest(wl, w[-1])])
    for v, u, lam in ((v_top, u_top, w[0].real), (v_bot, u_bot, w[-1].real)):
        resid = np.linalg.norm(a @ v - lam * v) / max(1.0, abs(lam))
        if abs(float(u @ v)) < np.sqrt(tol) * 1e-2 or resid > 1e-6:
            raise NotHyperbolic("notSemisimpleAtExtremes", f"pairing {float(u @ v)}, residual {resid}")
    return HyperbolicProfile(
        alpha=ProjectivePoint(tuple(v_top)),
        alpha_inv=ProjectivePoint(tuple(v_bot)),
        rho=ProjHyperplane(tuple(u_top)),
        rho_inv=ProjHyperplane(tuple(u_bot)),
        top_gap=top_gap,
        bottom_gap=bottom_gap,
        eigenvalues=tuple(complex(x) for x in w),
    )


def is_hyperbolic(m, tol: float = 1e-6) -> bool:
    try:
        classify_hyperbolic(m, tol)
    except NotHyperbolic:
        return False
    return True


def projection_pi(p: ProjectivePoint, tol: float = 1e-12) -> ProjectivePoint:
    """Project onto [span(e_1, e_2)] by dropping coordinates 3..d."""
    v = np.array(p.v)
    v[2:] = 0.0
    if np.linalg.norm(v) < tol:
        raise UndefinedProjection("point lies in [span(e_3, ..., e_d)]")
    return ProjectivePoint(tuple(v))


# -- ball sets --------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    center: ProjectivePoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInput("ball radius must be positive")

    @property
    def angular_radius(self) -> float:
        return float(np.arcsin(self.radius)) if self.radius <= 1 else np.pi


@dataclass(frozen=True)
class BallSet:
    balls: tuple[Ball, ...]

    @classmethod
    def around(cls, points: Sequence[ProjectivePoint], radius: float) -> BallSet:
        return cls(tuple(Ball(p, radius) for p in points))

    def depth(self, x: np.ndarray) -> float:
        """Largest angular distance from ``x`` to the complement (negative outside)."""
        return max(b.angular_radius - angle(x, b.center.v) for b in self.balls)

    def to_json(self) -> list:
        return [{"center": list(b.center.vector), "radius": b.radius} for b in self.balls]

    @classmethod
    def from_json(cls, data) -> BallSet:
        return cls(tuple(Ball(ProjectivePoint(tuple(b["center"])), float(b["radius"])) for b in data))


def _frac_vec(v) -> list[Fraction]:
    return [Fraction(float(x)) for x in v]


def exact_delta_sq(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    """Delta(u, v)^2 = 1 - <u,v>^2 / (|u|^2 |v|^2) in rational arithmetic."""
    dot = sum(a * b for a, b in zip(u, v))
    return 1 - dot * dot / (sum(a * a for a in u) * sum(b * b for b in v))


def _exact_in_ball(x: Sequence[Fraction], ball: Ball, closed: bool = False) -> bool:
    r2 = Fraction(float(ball.radius)) ** 2
    d2 = exact_delta_sq(x, _frac_vec(ball.center.vector))
    return d2 <= r2 if closed else d2 < r2


def _exact_apply(m: Sequence[Sequence[int]], x: Sequence[Fraction]) -> list[Fraction]:
    return [sum(Fraction(int(a)) * b for a, b in zip(row, x)) for row in m]


def cap_samples(center: np.ndarray, ang: float, count: int) -> np.ndarray:
    """Deterministic points of the closed cap of angular radius ``ang``; half lie on its boundary."""
    d = center.size
    ang = min(ang, np.pi / 2)
    basis = np.linalg.svd(center.reshape(1, -1))[2][1:]  # orthonormal basis of center^perp
    if d == 2:
        ts = np.linspace(-ang, ang, max(count, 3))
        return np.outer(np.cos(ts), center) + np.outer(np.sin(ts), basis[0])
    rng = np.random.default_rng(CAP_SAMPLE_SEED)
    dirs = rng.standard_normal((count, d - 1))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    ts = np.full(count, ang)
    ts[count // 2:] = ang * np.sqrt(rng.random(count - count // 2))
    ts[-1] = 0.0
    tangent = dirs @ basis
    return np.outer(np.cos(ts), center) + np.sin(ts)[:, None] * tangent


@dataclass
class RootedSystemResult:
    status: str
    min_margin: float
    clause: int | None = None
    witness: tuple[float, ...] | None = None
    exact_confirmed: bool | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "minMargin": self.min_margin,
            "clause": self.clause,
            "witness": list(self.witness) if self.witness is not None else None,
            "exactConfirmed": self.exact_confirmed,
            "detail": self.detail,
        }


class _Refuted(Exception):
    def __init__(self, clause, witness, exact, detail):
        self.result = RootedSystemResult("Refuted", float("-inf"), clause, tuple(map(float, witness)), exact, detail)


def _int_inverse(m: Sequence[Sequence[int]]) -> list[list[int]]:
    det = det_int(m)
    return [[det * x for x in row] for row in adjugate_int(m)]


def _geodesic_point(c1: np.ndarray, c2: np.ndarray, t: float) -> np.ndarray:
    if np.dot(c1, c2) < 0:
        c2 = -c2
    u = c2 - np.dot(c1, c2) * c1
    nu = np.linalg.norm(u)
    if nu < NORM_TOL:
        return c1
    return np.cos(t) * c1 + np.sin(t) * (u / nu)


def _check_disjoint(o: Sequence[BallSet]) -> float:
    slack = np.inf
    for j in range(len(o)):
        for k in range(j + 1, len(o)):
            for b1 in o[j].balls:
                for b2 in o[k].balls:
                    a1, a2 = b1.angular_radius, b2.angular_radius
                    theta = angle(b1.center, b2.center)
                    s = theta - a1 - a2
                    if s < 0:
                        t = min(max((theta + a1 - a2) / 2, 0.0), theta)
                        w = _geodesic_point(b1.center.v, b2.center.v, t)
                        wf = _frac_vec(w)
                        exact = _exact_in_ball(wf, b1) and _exact_in_ball(wf, b2)
                        raise _Refuted(1, w, exact, f"O_{j} and O_{k} overlap")
                    slack = min(slack, s)
    return slack


def _check_points_inside(points, ballset: BallSet, clause: int, label: str) -> float:
    slack = np.inf
    for name, p in points:
        depth = ballset.depth(p.v)
        if depth <= 0:
            pf = _frac_vec(p.vector)
            exact = not any(_exact_in_ball(pf, b) for b in ballset.balls)
            raise _Refuted(clause, p.v, exact, f"{name} not in {label}")
        slack = min(slack, depth)
    return slack


def _check_avoids(ballset: BallSet, planes, clause: int, label: str) -> float:
    slack = np.inf
    for b in ballset.balls:
        for name, h in planes:
            beta = hyperplane_angle(b.center, h)
            s = beta - b.angular_radius
            if s <= 0:
                c = b.center.v
                w = c - np.dot(c, h.n) * h.n
                w = c if np.linalg.norm(w) < NORM_TOL else w
                raise _Refuted(clause, w, None, f"closure of {label} meets {name}")
            slack = min(slack, s)
    return slack


def check_rooted_system(
    gs: Sequence[Sequence[Sequence[int]]],
    o: Sequence[BallSet],
    grid: int = 2000,
    margin: float = 1e-3,
    tol: float = 1e-6,
) -> RootedSystemResult:
    """Check that ``gs[1:]`` is a ``gs[0]``-rooted free system witnessed by the ball sets ``o``.

    Clauses: (1) the ``o[j]`` are pairwise disjoint; (2) for j >= 1, ``o[j]``
    contains both attracting points of ``gs[j]`` and its closure avoids the
    repelling hyperplanes of ``gs[0]``; (3) the same for ``o[0]`` against
    every other element; (4) ``g_j^{+-1}`` maps the closure of ``o[k]`` into
    ``o[j]`` for all distinct j, k, tested on ``grid`` samples per ball.
    """
    if len(gs) != len(o) or not gs:
        raise InvalidInput("need one ball set per matrix")
    profiles = []
    for j, g in enumerate(gs):
        try:
            profiles.append(classify_hyperbolic(g, tol))
        except NotHyperbolic as exc:
            raise InvalidInput(f"g_{j} is not hyperbolic: {exc}") from exc
    dims = {len(g) for g in gs} | {b.center.dim for bs in o for b in bs.balls}
    if len(dims) != 1:
        raise InvalidInput(f"inconsistent dimensions {sorted(dims)}")
    if any(not bs.balls for bs in o):
        raise InvalidInput("every O_j needs at least one ball")

    s = len(gs) - 1
    slack = np.inf
    try:
        slack = min(slack, _check_disjoint(o))
        p0 = profiles[0]
        for j in range(1, s + 1):
            pj = profiles[j]
            slack = min(slack, _check_points_inside(
                [(f"alpha(g_{j})", pj.alpha), (f"alpha(g_{j}^-1)", pj.alpha_inv)], o[j], 2, f"O_{j}"))
            slack = min(slack, _check_avoids(
                o[j], [("rho(g_0)", p0.rho), ("rho(g_0^-1)", p0.rho_inv)], 2, f"O_{j}"))
        slack = min(slack, _check_points_inside(
            [("alpha(g_0)", p0.alpha), ("alpha(g_0^-1)", p0.alpha_inv)], o[0], 3, "O_0"))
        planes = []
        for j in range(1, s + 1):
            planes += [(f"rho(g_{j})", profiles[j].rho), (f"rho(g_{j}^-1)", profiles[j].rho_inv)]
        slack = min(slack, _check_avoids(o[0], planes, 3, "O_0"))
        for j in range(s + 1):
            mats = [(f"g_{j}", [list(r) for r in gs[j]]), (f"g_{j}^-1", _int_inverse(gs[j]))]
            for k in range(s + 1):
                if k == j:
                    continue
                for name, mat in mats:
                    slack = min(slack, _check_images(mat, name, o[k], o[j], grid, k, j))
    except _Refuted as r:
        return r.result
    status = "Verified" if slack >= margin else "Inconclusive"
    return RootedSystemResult(status, float(slack))


def _check_images(mat, name, src: BallSet, dst: BallSet, grid: int, k: int, j: int) -> float:
    a = np.array(mat, dtype=float)
    slack = np.inf
    for b in src.balls:
        pts = cap_samples(b.center.v, b.angular_radius, grid)
        imgs = pts @ a.T
        imgs /= np.linalg.norm(imgs, axis=1, keepdims=True)
        cos = np.abs(imgs @ np.array([bb.center.v for bb in dst.balls]).T)
        angs = np.arccos(np.clip(cos, 0.0, 1.0))
        radii = np.array([bb.angular_radius for bb in dst.balls])
        depth = np.max(radii[None, :] - angs, axis=1)
        i = int(np.argmin(depth))
        if depth[i] <= 0:
            c = b.center.v if np.dot(b.center.v, pts[i]) >= 0 else -b.center.v
            # boundary samples may round to just outside the closed ball; try a point nudged inward too
            for cand in (pts[i], pts[i] + 1e-9 * (c - pts[i])):
                x = _frac_vec(cand)
                y = _exact_apply(mat, x)
                if _exact_in_ball(x, b, closed=True) and not any(_exact_in_ball(y, bb) for bb in dst.balls):
                    raise _Refuted(4, cand, True, f"{name} maps a point of closure(O_{k}) outside O_{j}")
            if depth[i] < -EXACT_SLOP:
                raise _Refuted(4, pts[i], False, f"{name} maps a point of closure(O_{k}) outside O_{j}")
        slack = min(slack, float(depth[i]))
    return slack


def profile_distances(gs: Sequence[Sequence[Sequence[int]]], tol: float = 1e-6) -> dict:
    """Pairwise Delta between attracting points and point/hyperplane distances, for inspection."""
    profs = [classify_hyperbolic(g, tol) for g in gs]
    pts = {}
    planes = {}
    for j, p in enumerate(profs):
        pts[f"alpha(g_{j})"] = p.alpha
        pts[f"alpha(g_{j}^-1)"] = p.alpha_inv
        planes[f"rho(g_{j})"] = p.rho
        planes[f"rho(g_{j}^-1)"] = p.rho_inv
    names = list(pts)
    point_pairs = {
        f"{a}|{b}": proj_metric(pts[a], pts[b]) for i, a in enumerate(names) for b in names[i + 1:]
    }
    point_plane = {
        f"{a}|{h}": float(abs(np.dot(pts[a].v, planes[h].n))) for a in names for h in planes
    }
    return {"points": point_pairs, "pointToPlane": point_plane}


# -- exact relation search -----------------------------------------------------------

@dataclass
class FreeWitnessResult:
    relation: Word | None
    max_len: int
    words_checked: int

    @property
    def found(self) -> bool:
        return self.relation is not None

    def to_json(self) -> dict:
        if self.relation is None:
            return {"result": "NoRelationUpTo", "maxLen": self.max_len, "wordsChecked": self.words_checked}
        return {"result": "Relation", "word": str(self.relation), "length": len(self.relation),
                "wordsChecked": self.words_checked}


def _imul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


def free_witness(
    mats: Sequence[Sequence[Sequence[int]]],
    max_len: int = 8,
    names: Sequence[str] | None = None,
    budget: int = 5_000_000,
) -> FreeWitnessResult:
    """Shortest nontrivial reduced word (up to ``max_len``) equal to +-identity.

    Words are enumerated level by level in lexicographic order over the
    letters ``x_1, ..., x_k, x_1^-1, ..., x_k^-1``; arithmetic is exact.
    """
    k = len(mats)
    names = list(names) if names is not None else [f"g{i}" for i in range(k)]
    if len(names) != k:
        raise InvalidInput("one name per matrix")
    if k == 0:
        return FreeWitnessResult(None, max_len, 0)
    total = sum(2 * k * (2 * k - 1) ** (n - 1) for n in range(1, max_len + 1))
    if total > budget:
        raise ScaleExceeded(f"{total} reduced words up to length {max_len} exceed budget {budget}")
    d = len(mats[0])
    letters = []
    for i, m in enumerate(mats):
        if abs(det_int(m)) != 1:
            raise InvalidInput(f"matrix {i} has determinant != +-1")
        letters.append((names[i], 1, tuple(tuple(int(x) for x in r) for r in m)))
    for i, m in enumerate(mats):
        letters.append((names[i], -1, tuple(tuple(r) for r in _int_inverse(m))))
    ident = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
    neg = tuple(tuple(-x for x in r) for r in ident)

    level = [((), None, ident)]
    checked = 0
    for _ in range(max_len):
        nxt = []
        for word, last, mat in level:
            for li, (sym, e, lm) in enumerate(letters):
                if last is not None and letters[last][0] == sym and letters[last][1] == -e:
                    continue
                prod = _imul(mat, lm)
                w = word + ((sym, e),)
                checked += 1
                if prod == ident or prod == neg:
                    return FreeWitnessResult(Word(w), max_len, checked)
                nxt.append((w, li, prod))
        level = nxt
    return FreeWitnessResult(None, max_len, checked)


def matrix_power(m: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    d = len(m)
    base = tuple(tuple(int(x) for x in r) for r in (m if n >= 0 else _int_inverse(m)))
    out = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
    for _ in range(abs(n)):
        out = _imul(out, base)
    return [list(r) for r in out]
