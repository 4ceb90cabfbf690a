"""Words in free groups, HNN-mod-2 relators and the involution check.

A word is a tuple of ``(symbol, exponent)`` letters with exponent +1 or
-1. The text syntax is space separated: ``"t a t^-1 b^-1"``; ``x^k`` for
any nonzero integer k expands to |k| letters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import IncompleteMap, MismatchedRanks

Letter = tuple[str, int]


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple((str(s), int(e)) for s, e in self.letters)
        for s, e in letters:
            if e not in (1, -1):
                raise ValueError(f"letter {s}^{e}: exponents must be +1 or -1")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> Word:
        letters = []
        for tok in text.replace("*", " ").split():
            if "^" in tok:
                sym, exp = tok.split("^", 1)
                k = int(exp)
            else:
                sym, k = tok, 1
            if k == 0 or not sym:
                raise ValueError(f"bad token {tok!r}")
            letters += [(sym, 1 if k > 0 else -1)] * abs(k)
        return cls(tuple(letters))

    @classmethod
    def of(cls, *symbols: str) -> Word:
        return cls.parse(" ".join(symbols))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def inverse(self) -> Word:
        return Word(tuple((s, -e) for s, e in reversed(self.letters)))

    def reduced(self) -> Word:
        return free_reduce(self)

    def is_reduced(self) -> bool:
        return all(not (a[0] == b[0] and a[1] == -b[1]) for a, b in zip(self.letters, self.letters[1:]))

    def symbols(self) -> set[str]:
        return {s for s, _ in self.letters}

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(s if e == 1 else f"{s}^-1" for s, e in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def as_word(w) -> Word:
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        return Word.parse(w)
    return Word(tuple(w))


def free_reduce(w: Word) -> Word:
    stack: list[Letter] = []
    for s, e in w.letters:
        if stack and stack[-1][0] == s and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((s, e))
    return Word(tuple(stack))


def random_word(symbols: Sequence[str], length: int, rng: random.Random) -> Word:
    return Word(tuple((rng.choice(symbols), rng.choice((1, -1))) for _ in range(length)))


def apply_map(w: Word, images: Mapping[str, Word | str]) -> Word:
    """Image of ``w`` under the homomorphism sending each symbol to ``images[symbol]``."""
    out: list[Letter] = []
    for s, e in w.letters:
        if s not in images:
            raise IncompleteMap(s)
        img = as_word(images[s])
        out.extend(img.letters if e == 1 else img.inverse().letters)
    return free_reduce(Word(tuple(out)))


# -- HNN extensions -------------------------------------------------------------

@dataclass(frozen=True)
class HNN2Presentation:
    """Data of ``H *_phi / 2``: ``phi`` sends ``a_words[j]`` to ``b_words[j]``."""

    h_generators: tuple[str, ...]
    a_words: tuple[Word, ...]
    b_words: tuple[Word, ...]
    t: str = "t"
    mod2: bool = True

    @property
    def relators(self) -> list[Word]:
        return hnn_mod2_relators(self.a_words, self.b_words, self.t, self.mod2)

    @classmethod
    def from_json(cls, data: Mapping) -> HNN2Presentation:
        a = tuple(as_word(w) for w in data.get("aWords", []))
        b = tuple(as_word(w) for w in data.get("bWords", []))
        if "phi" in data:
            b = tuple(b[int(i)] for i in data["phi"])
        return cls(tuple(data.get("hGenerators", [])), a, b, data.get("t", "t"), bool(data.get("mod2", True)))


def hnn_mod2_relators(
    a_words: Sequence[Word | str],
    b_words: Sequence[Word | str],
    t: str = "t",
    mod2: bool = True,
) -> list[Word]:
    """``t t`` (unless ``mod2`` is off) followed by ``t a_j t^-1 b_j^-1`` for each j, reduced."""
    if len(a_words) != len(b_words):
        raise MismatchedRanks(f"{len(a_words)} A-generators but {len(b_words)} B-generators")
    tw = Word(((t, 1),))
    rels = [Word(((t, 1), (t, 1)))] if mod2 else []
    for a, b in zip(a_words, b_words):
        rels.append(free_reduce(tw * as_word(a) * tw.inverse() * as_word(b).inverse()))
    return rels


def involution_check(
    a_generators: Sequence[str],
    b_generators: Sequence[str],
    omega: Mapping[str, str],
    trials: int = 100,
    seed: int = 0,
    word_length: int = 12,
) -> bool:
    """Whether ``omega`` swaps ``a_j <-> b_j`` and squares to the identity.

    ``omega`` must be defined on every generator. The square is also
    checked on ``trials`` random words.
    """
    gens = list(a_generators) + list(b_generators)
    missing = [g for g in gens if g not in omega]
    if missing:
        raise IncompleteMap(f"omega undefined on {missing}")
    if len(a_generators) != len(b_generators):
        return False
    for a, b in zip(a_generators, b_generators):
        if omega[a] != b or omega[b] != a:
            return False
    if any(omega[g] not in omega or omega[omega[g]] != g for g in gens):
        return False
    if not gens:
        return True
    rng = random.Random(seed)
    images = {g: Word(((omega[g], 1),)) for g in gens}
    for _ in range(trials):
        w = free_reduce(random_word(gens, word_length, rng))
        if apply_map(apply_map(w, images), images) != w:
            return False
    return True


def swap_involution(a_generators: Iterable[str], b_generators: Iterable[str]) -> dict[str, str]:
    omega = {}
    for a, b in zip(a_generators, b_generators):
        omega[a] = b
        omega[b] = a
    return omega
