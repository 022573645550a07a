"""Elements and words in a free product A*B of two finitely generated free groups.

A letter is a :class:`FactorElement`: a freely reduced word in the generators of
one factor.  Generators are positive integers; a syllable ``(g, e)`` stands for
``g**e``.  Words are tuples of letters.  The reduced normal form of a word is an
:class:`AlternatingWord`; an empty alternating word is the identity and a
one-letter word is a factor element.

Multiplication is left to right, matching right actions: ``u * v`` means
"``u`` first, then ``v``".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable

from .errors import FactorConjugate, InputError

FACTORS = ("A", "B")


def other_factor(tag: str) -> str:
    return "B" if tag == "A" else "A"


def _free_reduce(syllables: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    for gen, exp in syllables:
        if exp == 0:
            continue
        if out and out[-1][0] == gen:
            total = out[-1][1] + exp
            out.pop()
            if total:
                out.append((gen, total))
        else:
            out.append((gen, exp))
    return tuple(out)


@dataclass(frozen=True)
class FactorElement:
    """An element of factor ``A`` or ``B``, stored freely reduced."""

    factor: str
    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.factor not in FACTORS:
            raise InputError(f"unknown factor tag {self.factor!r}")
        sylls = []
        for gen, exp in self.syllables:
            gen, exp = int(gen), int(exp)
            if gen < 1:
                raise InputError(f"generator index must be positive, got {gen}")
            sylls.append((gen, exp))
        object.__setattr__(self, "syllables", _free_reduce(sylls))

    @classmethod
    def gen(cls, factor: str, index: int, exp: int = 1) -> "FactorElement":
        return cls(factor, ((index, exp),))

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def __mul__(self, other: "FactorElement") -> "FactorElement":
        if other.factor != self.factor:
            raise InputError("cannot multiply elements of different factors")
        return FactorElement(self.factor, self.syllables + other.syllables)

    def inverse(self) -> "FactorElement":
        return FactorElement(self.factor, tuple((g, -e) for g, e in reversed(self.syllables)))

    def steps(self) -> list[tuple[int, int]]:
        """The element spelled as single generator steps ``(g, +1)`` / ``(g, -1)``."""
        out = []
        for g, e in self.syllables:
            s = 1 if e > 0 else -1
            out.extend([(g, s)] * abs(e))
        return out

    def max_generator(self) -> int:
        return max((g for g, _ in self.syllables), default=0)

    def __str__(self) -> str:
        if not self.syllables:
            return f"{self.factor}:1"
        return f"{self.factor}:" + "*".join(
            f"{self.factor.lower()}{g}" + (f"^{e}" if e != 1 else "") for g, e in self.syllables
        )


GeneralWord = tuple  # tuple[FactorElement, ...]; scratch words, not necessarily reduced


@dataclass(frozen=True)
class AlternatingWord:
    """A reduced word: nontrivial letters with strictly alternating factors."""

    letters: tuple[FactorElement, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        for i, x in enumerate(letters):
            if x.is_identity:
                raise InputError(f"letter {i} is trivial")
            if i and letters[i - 1].factor == x.factor:
                raise InputError(f"letters {i - 1} and {i} lie in the same factor")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return AlternatingWord(self.letters[i])
        return self.letters[i]

    def __mul__(self, other) -> "AlternatingWord":
        return reduce(tuple(self) + tuple(other))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    @property
    def is_cyclic(self) -> bool:
        """Cyclically reduced in the wide sense: even length >= 2 (first and last factors differ)."""
        return len(self.letters) >= 2 and len(self.letters) % 2 == 0

    @property
    def is_cyclically_reduced(self) -> bool:
        """Cyclically reduced and in the A-first convention a1 b1 ... an bn."""
        return self.is_cyclic and self.letters[0].factor == "A"

    def inverse(self) -> "AlternatingWord":
        return AlternatingWord(tuple(x.inverse() for x in reversed(self.letters)))

    def rotate(self, k: int) -> "AlternatingWord":
        """Cyclic rotation moving the first ``k`` letters to the end."""
        k %= max(len(self.letters), 1)
        return AlternatingWord(self.letters[k:] + self.letters[:k])

    def __pow__(self, k: int) -> "AlternatingWord":
        if k < 0:
            return self.inverse() ** -k
        return reduce(self.letters * k)

    def max_generator(self, factor: str) -> int:
        return max((x.max_generator() for x in self.letters if x.factor == factor), default=0)

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.letters) if self.letters else "1"


def as_letters(word) -> tuple[FactorElement, ...]:
    if isinstance(word, FactorElement):
        return (word,)
    return tuple(word)


def inverse_word(word) -> tuple[FactorElement, ...]:
    return tuple(x.inverse() for x in reversed(as_letters(word)))


def reduce(word) -> AlternatingWord:
    """Normal form: merge adjacent same-factor letters, drop identities, to fixpoint."""
    out: list[FactorElement] = []
    for x in as_letters(word):
        if x.is_identity:
            continue
        if out and out[-1].factor == x.factor:
            merged = out.pop() * x
            if not merged.is_identity:
                out.append(merged)
        else:
            out.append(x)
    return AlternatingWord(tuple(out))


def swap_factors(word) -> AlternatingWord:
    """The involution exchanging the roles of A and B letter by letter."""
    return AlternatingWord(tuple(FactorElement(other_factor(x.factor), x.syllables) for x in as_letters(word)))


def cyclic_reduce(word) -> tuple[AlternatingWord, AlternatingWord]:
    """Return ``(w', c)`` with ``w = c w' c^-1``, ``w'`` cyclically reduced and A-first.

    Raises :class:`FactorConjugate` when ``w`` is conjugate into a factor (this
    includes the identity, reported as the identity of ``A``).
    """
    cur = list(reduce(word).letters)
    conj: list[FactorElement] = []
    while len(cur) >= 2 and cur[0].factor == cur[-1].factor:
        first = cur[0]
        # w = first * (rest * first) * first^-1
        conj.append(first)
        cur = list(reduce(tuple(cur[1:]) + (first,)).letters)
    if len(cur) <= 1:
        elem = cur[0] if cur else FactorElement("A")
        raise FactorConjugate(elem, reduce(tuple(conj)))
    if cur[0].factor == "B":
        conj.append(cur[0])
        cur = cur[1:] + cur[:1]
    return AlternatingWord(tuple(cur)), reduce(tuple(conj))


def is_proper_power(w: AlternatingWord) -> tuple[AlternatingWord, int] | None:
    """Return ``(root, k)`` with ``w = root**k`` for the largest ``k >= 2``, else ``None``."""
    letters = w.letters
    m = len(letters)
    for period in range(2, m, 2):
        if m % period:
            continue
        if all(letters[i] == letters[i % period] for i in range(period, m)):
            return AlternatingWord(letters[:period]), m // period
    return None


def prefixes(w: AlternatingWord) -> list[tuple[int, AlternatingWord]]:
    return [(i, AlternatingWord(w.letters[:i])) for i in range(1, len(w) + 1)]


def prefix_pairs(w: AlternatingWord) -> list[tuple[AlternatingWord, AlternatingWord]]:
    """All ``(w1, w2)`` with ``w1`` and ``w1 w2`` nonempty prefixes, ``w2`` nonempty."""
    n = len(w)
    return [
        (AlternatingWord(w.letters[:i]), AlternatingWord(w.letters[i:j]))
        for i in range(1, n)
        for j in range(i + 1, n + 1)
    ]


# ---------------------------------------------------------------------------
# serialization

def word_ranks(word) -> dict[str, int]:
    ranks = {f: 0 for f in FACTORS}
    for x in as_letters(word):
        ranks[x.factor] = max(ranks[x.factor], x.max_generator())
    return ranks


def word_to_json(word, ranks: dict[str, int] | None = None) -> dict:
    letters = as_letters(word)
    found = word_ranks(letters)
    if ranks is not None:
        found = {f: max(found[f], int(ranks.get(f, 0))) for f in FACTORS}
    return {
        "factors": found,
        "syllables": [[x.factor, [[g, e] for g, e in x.syllables]] for x in letters],
    }


def word_from_json(data: dict) -> AlternatingWord:
    try:
        letters = tuple(FactorElement(tag, tuple((int(g), int(e)) for g, e in sylls))
                        for tag, sylls in data["syllables"])
        ranks = data.get("factors", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed word JSON: {exc}") from exc
    for x in letters:
        if ranks and x.max_generator() > int(ranks.get(x.factor, 0)):
            raise InputError(f"generator index exceeds declared rank of factor {x.factor}")
    return reduce(letters)


_TOKEN = re.compile(r"^([AB]):(.+)$")
_SYLL = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")


class SymbolTable:
    """Maps generator names to indices, per factor, in order of first appearance."""

    def __init__(self, names: dict[str, list[str]] | None = None):
        self.names = {f: list((names or {}).get(f, [])) for f in FACTORS}

    def index(self, factor: str, name: str) -> int:
        table = self.names[factor]
        if name not in table:
            table.append(name)
        return table.index(name) + 1

    def name(self, factor: str, index: int) -> str:
        table = self.names[factor]
        while len(table) < index:
            table.append(f"{factor.lower()}{len(table) + 1}")
        return table[index - 1]

    def to_json(self) -> dict:
        return {f: list(v) for f, v in self.names.items()}


def parse_inline(text: str, symbols: SymbolTable | None = None) -> tuple[tuple[FactorElement, ...], SymbolTable]:
    """Parse ``"A:x B:y^-1 A:x^2*z"`` into a general word.

    Each token is ``FACTOR:syll*syll*...`` with optional integer exponents.
    ``1`` or an empty string is the empty word.
    """
    symbols = symbols or SymbolTable()
    letters = []
    text = text.strip()
    if text in ("", "1"):
        return (), symbols
    for tok in text.split():
        m = _TOKEN.match(tok)
        if not m:
            raise InputError(f"cannot parse token {tok!r}")
        factor, body = m.groups()
        sylls = []
        for part in body.split("*"):
            sm = _SYLL.match(part)
            if not sm:
                raise InputError(f"cannot parse syllable {part!r} in {tok!r}")
            name, exp = sm.group(1), int(sm.group(2) or 1)
            sylls.append((symbols.index(factor, name), exp))
        letters.append(FactorElement(factor, tuple(sylls)))
    return tuple(letters), symbols


def format_inline(word, symbols: SymbolTable) -> str:
    parts = []
    for x in as_letters(word):
        body = "*".join(symbols.name(x.factor, g) + (f"^{e}" if e != 1 else "") for g, e in x.syllables)
        parts.append(f"{x.factor}:{body or '1'}")
    return " ".join(parts) if parts else "1"


def parse_word(text: str, symbols: SymbolTable | None = None) -> tuple[tuple[FactorElement, ...], SymbolTable]:
    """Accept either inline syntax or the JSON word form."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid word JSON: {exc}") from exc
        return tuple(word_from_json(data)), symbols or SymbolTable()
    return parse_inline(stripped, symbols)

