"""Knot group presentations: free-group words, the 2-bridge table, and the
abelianization map onto the infinite cyclic group.

Words serialize as strings with lowercase = generator, uppercase = inverse
("abAB").  Generators are indexed from 1; a letter is the signed index, with
negative meaning the inverse.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import InvalidFraction, UnknownKnot


def free_reduce(letters):
    """Cancel adjacent x x^-1 pairs; idempotent and length-nonincreasing."""
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class Word:
    """Freely reduced word in the generators: tuple of signed 1-based indices."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        self.letters = free_reduce(tuple(int(x) for x in letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def inverse(self):
        return Word(tuple(-x for x in reversed(self.letters)))

    def is_identity(self):
        return not self.letters

    @classmethod
    def from_string(cls, text, generators):
        index = {name: i + 1 for i, name in enumerate(generators)}
        letters = []
        for ch in text:
            base = ch.lower()
            if base not in index:
                raise ValueError(f"unknown generator letter {ch!r}")
            letters.append(index[base] if ch.islower() else -index[base])
        return cls(letters)

    def to_string(self, generators):
        out = []
        for x in self.letters:
            name = generators[abs(x) - 1]
            out.append(name if x > 0 else name.upper())
        return "".join(out)

    def __repr__(self):
        return f"Word({self.letters!r})"


@dataclass(frozen=True)
class GroupPresentation:
    """Finitely presented group with a distinguished meridian and the
    abelianization exponents of the generators.

    Invariants (checked on construction): every relator abelianizes to 0,
    the meridian abelianizes to 1.
    """

    generators: tuple
    relators: tuple
    meridian: Word
    abelianization: tuple  # exponent of t for each generator
    genus: int | None = None

    def __post_init__(self):
        for r in self.relators:
            if abelianize(r, self) != 0:
                raise ValueError(f"relator {r!r} does not abelianize to 0")
        if abelianize(self.meridian, self) != 1:
            raise ValueError("meridian does not abelianize to 1")

    @property
    def num_generators(self):
        return len(self.generators)

    def deficiency(self):
        return len(self.generators) - len(self.relators)

    def word(self, text):
        return Word.from_string(text, self.generators)

    def to_json_dict(self):
        d = {
            "generators": list(self.generators),
            "relators": [r.to_string(self.generators) for r in self.relators],
            "meridian": self.meridian.to_string(self.generators),
            "abelianization": {g: e for g, e in zip(self.generators, self.abelianization)},
        }
        if self.genus is not None:
            d["genus"] = self.genus
        return d

    @classmethod
    def from_json_dict(cls, d):
        gens = tuple(d["generators"])
        ab = tuple(int(d["abelianization"][g]) for g in gens)
        return cls(
            generators=gens,
            relators=tuple(Word.from_string(r, gens) for r in d["relators"]),
            meridian=Word.from_string(d["meridian"], gens),
            abelianization=ab,
            genus=d.get("genus"),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def abelianize(w, presentation):
    """Image of a word under the abelianization map, as the exponent of t."""
    exps = presentation.abelianization
    return sum((1 if x > 0 else -1) * exps[abs(x) - 1] for x in w)


# ---------------------------------------------------------------------------
# 2-bridge presentations (Schubert normal form)
# ---------------------------------------------------------------------------

def two_bridge_presentation(p, q, genus=None):
    """Two-generator one-relator presentation of the 2-bridge knot group b(p,q).

    The relator is w a w^-1 b^-1 with w = x_1^{e_1} ... x_{p-1}^{e_{p-1}},
    where x_i alternates a, b, a, b, ... and e_i = (-1)^floor(i*q/p).
    Both generators are meridians (abelianization exponent 1).
    """
    if not (0 < q < p) or math.gcd(p, q) != 1 or p % 2 == 0:
        raise InvalidFraction(f"need 0 < q < p, gcd(p,q)=1, p odd; got {p}/{q}")
    # The exponent pattern is palindromic only for odd q; an even q is
    # replaced by p - q, which presents the mirror knot (same group).
    q_eff = q if q % 2 == 1 else p - q
    w = []
    for i in range(1, p):
        gen = 1 if i % 2 == 1 else 2  # a for odd positions, b for even
        eps = -1 if (i * q_eff // p) % 2 == 1 else 1
        w.append(eps * gen)
    w = Word(w)
    relator = w * Word([1]) * w.inverse() * Word([-2])
    return GroupPresentation(
        generators=("a", "b"),
        relators=(relator,),
        meridian=Word([1]),
        abelianization=(1, 1),
        genus=genus,
    )


@dataclass(frozen=True)
class KnotRecord:
    """A named knot: 2-bridge fraction, presentation, genus and fiberedness."""

    name: str
    p: int
    q: int
    presentation: GroupPresentation
    genus: int
    fibered: bool


# name -> (p, q, genus, fibered); fractions in Schubert normal form.
_KNOT_TABLE = {
    "3_1": (3, 1, 1, True),
    "4_1": (5, 3, 1, True),
    "5_2": (7, 3, 1, False),
    "6_1": (9, 5, 1, False),
    "6_2": (11, 3, 2, True),
    "7_2": (11, 5, 1, False),
}

_TWIST_RE = re.compile(r"^twist\((-?\d+)\)$")
_TWIST_RANGE = 8


def _twist_fraction(p):
    # p full twists plus a clasp; the p = 1 / p = -1 cases are the trefoil
    # and the figure-eight, the only fibered members of the family.
    if p == 0 or abs(p) > _TWIST_RANGE:
        raise UnknownKnot(f"twist parameter out of range: {p}")
    if p > 0:
        return 4 * p - 1, 2
    return 4 * (-p) + 1, 2


def builtin_knot(name):
    """Look up a built-in knot by table name or twist(p) with |p| <= 8."""
    m = _TWIST_RE.match(name)
    if m:
        p = int(m.group(1))
        pp, qq = _twist_fraction(p)
        return KnotRecord(
            name=name,
            p=pp,
            q=qq,
            presentation=two_bridge_presentation(pp, qq, genus=1),
            genus=1,
            fibered=abs(p) == 1,
        )
    if name not in _KNOT_TABLE:
        raise UnknownKnot(f"no built-in knot named {name!r}")
    p, q, genus, fibered = _KNOT_TABLE[name]
    return KnotRecord(
        name=name,
        p=p,
        q=q,
        presentation=two_bridge_presentation(p, q, genus=genus),
        genus=genus,
        fibered=fibered,
    )


def builtin_names(include_twists=True):
    names = list(_KNOT_TABLE)
    if include_twists:
        names += [f"twist({p})" for p in range(-_TWIST_RANGE, _TWIST_RANGE + 1)
                  if p != 0]
    return names
