"""Finite model of a sofic approximation.

One instance holds permutations of ``range(n)`` for a finite generator
set together with a relator window. Defects are exact fractions with
denominator ``n``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .actions import Perm, check_perm, invert
from .errors import MismatchedModel, NotInjective, UnknownLabel
from .presentations import Word, as_word


@dataclass(frozen=True)
class SoficApprox:
    n: int
    assignment: Mapping[str, Perm]
    relators: tuple[Word, ...] = ()
    test_words: tuple[Word, ...] = ()

    def __post_init__(self):
        perms = {}
        for label, perm in self.assignment.items():
            perm = tuple(perm)
            check_perm(perm, self.n)
            perms[label] = perm
        object.__setattr__(self, "assignment", perms)
        object.__setattr__(self, "relators", tuple(as_word(w) for w in self.relators))
        object.__setattr__(self, "test_words", tuple(as_word(w) for w in self.test_words))

    def perm(self, symbol: str, exponent: int = 1) -> Perm:
        """Permutation of a letter; inverse letters are derived, so sigma(s^-1) = sigma(s)^-1."""
        if symbol not in self.assignment:
            raise UnknownLabel(symbol)
        p = self.assignment[symbol]
        return p if exponent == 1 else invert(p)

    def labels(self) -> list[str]:
        return list(self.assignment)


def evaluate_word(a: SoficApprox, w: Word | str) -> Perm:
    """Permutation of ``w = x_1 ... x_k``, i.e. ``v -> x_1(x_2(...x_k(v)))``."""
    w = as_word(w)
    result = list(range(a.n))
    for sym, e in reversed(w.letters):
        p = a.perm(sym, e)
        result = [p[v] for v in result]
    return tuple(result)


def moved_points(p: Perm) -> int:
    return sum(1 for i, x in enumerate(p) if i != x)


@dataclass
class DefectReport:
    n: int
    relator_defects: dict[str, Fraction]
    freeness_fixed_fractions: dict[str, Fraction]

    @property
    def max_relator_defect(self) -> Fraction:
        return max(self.relator_defects.values(), default=Fraction(0))

    def to_json(self) -> dict:
        def fr(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator}"

        return {
            "n": self.n,
            "relatorDefects": {k: fr(v) for k, v in self.relator_defects.items()},
            "freenessFixedFractions": {k: fr(v) for k, v in self.freeness_fixed_fractions.items()},
            "maxRelatorDefect": fr(self.max_relator_defect),
        }


def relator_defect(a: SoficApprox, w: Word | str) -> Fraction:
    """Fraction of points not fixed by ``w``."""
    return Fraction(moved_points(evaluate_word(a, w)), a.n)


def fixed_fraction(a: SoficApprox, w: Word | str) -> Fraction:
    return 1 - relator_defect(a, w)


def defect_report(a: SoficApprox, test_words: Sequence[Word | str] | None = None) -> DefectReport:
    words = a.test_words if test_words is None else tuple(as_word(w) for w in test_words)
    return DefectReport(
        a.n,
        {str(w): relator_defect(a, w) for w in a.relators},
        {str(w): fixed_fraction(a, w) for w in words},
    )


@dataclass
class EditDistance:
    per_label: dict[str, Fraction]

    @property
    def max(self) -> Fraction:
        return max(self.per_label.values(), default=Fraction(0))


def edit_distance(a: SoficApprox, b: SoficApprox) -> EditDistance:
    """Per-label fraction of points where the two assignments disagree."""
    if a.n != b.n:
        raise MismatchedModel(f"point counts differ: {a.n} vs {b.n}")
    if set(a.assignment) != set(b.assignment):
        raise MismatchedModel(f"label sets differ: {sorted(a.assignment)} vs {sorted(b.assignment)}")
    out = {}
    for lb, p in a.assignment.items():
        q = b.assignment[lb]
        out[lb] = Fraction(sum(1 for x, y in zip(p, q) if x != y), a.n)
    return EditDistance(out)


@dataclass(frozen=True)
class EmbeddingSpec:
    target_size: int
    injection: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "injection", tuple(self.injection))


def conjugacy_embed(a: SoficApprox, spec: EmbeddingSpec) -> SoficApprox:
    """Push ``a`` forward along an injection into ``range(target_size)``; points off the image are fixed."""
    inj = spec.injection or tuple(range(a.n))
    if len(inj) != a.n:
        raise NotInjective(f"injection has {len(inj)} entries for {a.n} points")
    if len(set(inj)) != len(inj) or any(not 0 <= u < spec.target_size for u in inj):
        raise NotInjective("injection must be injective into range(target_size)")
    pushed = {}
    for lb, p in a.assignment.items():
        q = list(range(spec.target_size))
        for v in range(a.n):
            q[inj[v]] = inj[p[v]]
        pushed[lb] = tuple(q)
    return SoficApprox(spec.target_size, pushed, a.relators, a.test_words)


def restrict(a: SoficApprox, injection: Sequence[int]) -> SoficApprox:
    """Pull an embedded approximation back to the original points."""
    pos = {u: v for v, u in enumerate(injection)}
    out = {}
    for lb, p in a.assignment.items():
        out[lb] = tuple(pos[p[u]] for u in injection)
    return SoficApprox(len(injection), out, a.relators, a.test_words)


def perfectness_check(a: SoficApprox) -> bool:
    """True iff every relator acts as the identity."""
    if not a.relators:
        warnings.warn("empty relator window: perfectness holds vacuously", stacklevel=2)
        return True
    return all(moved_points(evaluate_word(a, w)) == 0 for w in a.relators)


def relabel(a: SoficApprox, bijection: Sequence[int]) -> SoficApprox:
    """Conjugate every permutation by ``bijection`` (point ``v`` becomes ``bijection[v]``)."""
    return conjugacy_embed(a, EmbeddingSpec(a.n, tuple(bijection)))


# -- text format -----------------------------------------------------------------

def parse_sofic(text: str) -> SoficApprox:
    """Read the ``.sofic`` format.

    First line ``N``; then ``label: image list`` lines; then optional
    ``relators:`` and ``words:`` sections with one word per line. ``#``
    starts a comment.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty sofic file")
    n = int(lines[0])
    assignment: dict[str, Perm] = {}
    relators: list[Word] = []
    words: list[Word] = []
    section = "labels"
    for ln in lines[1:]:
        low = ln.lower()
        if low in ("relators:", "words:"):
            section = low[:-1]
            continue
        if section == "labels":
            label, _, images = ln.partition(":")
            if not _:
                raise ValueError(f"expected 'label: images', got {ln!r}")
            assignment[label.strip()] = tuple(int(x) for x in images.split())
        elif section == "relators":
            relators.append(Word.parse(ln))
        else:
            words.append(Word.parse(ln))
    return SoficApprox(n, assignment, tuple(relators), tuple(words))


def format_sofic(a: SoficApprox) -> str:
    out = [str(a.n)]
    out += [f"{lb}: {' '.join(map(str, p))}" for lb, p in a.assignment.items()]
    if a.relators:
        out.append("relators:")
        out += [str(w) for w in a.relators]
    if a.test_words:
        out.append("words:")
        out += [str(w) for w in a.test_words]
    return "\n".join(out) + "\n"
