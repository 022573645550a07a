"""Combinatorial admissible surfaces in simple normal form and their audit.

A surface is given by w-boundary circles (one exponent each) and a perfect
matching of their junctures by arcs.  Circle ``i`` with exponent ``n`` carries
``|n| * |w|`` segments; segment ``p`` runs from juncture ``p`` to juncture
``p + 1`` and reads the letters of ``w`` (``n > 0``) or of ``w^-1`` (``n < 0``).
Segment ids coincide with the id of their starting juncture.

Pieces are the cycles of "follow a segment to its end, cross the arc there,
continue with the outgoing segment", so every piece lies on one side (A or B).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .actions import StackingCertificate
from .errors import InvalidMatching, NotCyclicallyReduced, WordMismatch
from .plline import rat_str
from .words import AlternatingWord, FactorElement, word_from_json, word_to_json


class Juncture(NamedTuple):
    boundary: int
    position: int


Arc = tuple[Juncture, Juncture]


def _j(x) -> Juncture:
    return Juncture(int(x[0]), int(x[1]))


def juncture_phase(L: int, exponent: int, position: int) -> int:
    """Index of the prefix of ``w`` that ends at this juncture (0 for the full word)."""
    return position % L if exponent > 0 else (-position) % L


def juncture_type(L: int, exponent: int, position: int) -> str:
    """``"AB"`` if the incoming segment is A-labelled, else ``"BA"``."""
    phase = juncture_phase(L, exponent, position)
    odd = phase % 2 == 1
    return "AB" if odd == (exponent > 0) else "BA"


def segment_label(w: AlternatingWord, exponent: int, position: int) -> FactorElement:
    L = len(w)
    if exponent > 0:
        return w[position % L]
    return w[L - 1 - position % L].inverse()


@dataclass(frozen=True)
class Piece:
    side: str
    segments: tuple[Juncture, ...]  # traversal order
    winding: FactorElement
    kind: str  # "disk" or "annulus"

    @property
    def d(self) -> int:
        return len(self.segments)

    @property
    def chi(self) -> int:
        return 1 if self.kind == "disk" else 0


@dataclass(frozen=True)
class CompressibilityWitness:
    arc: Arc
    phase: int

    def to_json(self) -> dict:
        return {"arc": [list(self.arc[0]), list(self.arc[1])], "phase": self.phase}


class NormalFormSurface:
    """Boundaries plus arc matching; pieces are derived on construction."""

    def __init__(self, word: AlternatingWord, boundaries: Sequence[int], matching: Iterable,
                 forced_annuli: Iterable[int] = ()):
        if not word.is_cyclically_reduced:
            raise NotCyclicallyReduced(f"{word} is not cyclically reduced in the A-first form")
        self.word = word
        self.boundaries = tuple(int(n) for n in boundaries)
        if any(n == 0 for n in self.boundaries):
            raise InvalidMatching("boundary exponents must be nonzero")
        L = len(word)
        self.partner: dict[Juncture, Juncture] = {}
        arcs = []
        for pair in matching:
            j, k = (_j(x) for x in pair)
            for x in (j, k):
                if not (0 <= x.boundary < len(self.boundaries)
                        and 0 <= x.position < abs(self.boundaries[x.boundary]) * L):
                    raise InvalidMatching(f"juncture {tuple(x)} does not exist")
                if x in self.partner:
                    raise InvalidMatching(f"juncture {tuple(x)} lies on two arcs")
            if j == k:
                raise InvalidMatching(f"arc joins juncture {tuple(j)} to itself")
            if self.type(j) == self.type(k):
                raise InvalidMatching(f"arc joins two {self.type(j)} junctures {tuple(j)} and {tuple(k)}")
            self.partner[j], self.partner[k] = k, j
            arcs.append(tuple(sorted((j, k))))
        missing = [j for j in self.junctures() if j not in self.partner]
        if missing:
            raise InvalidMatching(f"juncture {tuple(missing[0])} lies on no arc")
        self.arcs: tuple[Arc, ...] = tuple(sorted(arcs))
        self.forced_annuli = frozenset(forced_annuli)
        self.pieces: tuple[Piece, ...] = tuple(derive_pieces(self))

    def junctures(self) -> list[Juncture]:
        L = len(self.word)
        return [Juncture(i, p) for i, n in enumerate(self.boundaries) for p in range(abs(n) * L)]

    segments = junctures

    def circle_length(self, b: int) -> int:
        return abs(self.boundaries[b]) * len(self.word)

    def phase(self, j: Juncture) -> int:
        return juncture_phase(len(self.word), self.boundaries[j.boundary], j.position)

    def type(self, j: Juncture) -> str:
        return juncture_type(len(self.word), self.boundaries[j.boundary], j.position)

    def label(self, s: Juncture) -> FactorElement:
        return segment_label(self.word, self.boundaries[s.boundary], s.position)

    def end(self, s: Juncture) -> Juncture:
        return Juncture(s.boundary, (s.position + 1) % self.circle_length(s.boundary))

    @property
    def degree(self) -> int:
        return sum(abs(n) for n in self.boundaries)

    def to_json(self) -> dict:
        return {"word": word_to_json(self.word), "boundaries": list(self.boundaries),
                "matching": [[list(j), list(k)] for j, k in self.arcs]}

    @classmethod
    def from_json(cls, data: dict) -> "NormalFormSurface":
        try:
            word = word_from_json(data["word"])
            return cls(word, data["boundaries"], data["matching"])
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, (InvalidMatching, NotCyclicallyReduced, WordMismatch)):
                raise
            raise InvalidMatching(f"malformed surface JSON: {exc}") from exc


def derive_pieces(surface: NormalFormSurface) -> list[Piece]:
    """Cycles of ``s -> outgoing segment at partner(end(s))``, ordered by first segment."""
    seen: set[Juncture] = set()
    pieces = []
    for s0 in surface.segments():
        if s0 in seen:
            continue
        cycle = []
        s = s0
        while s not in seen:
            seen.add(s)
            cycle.append(s)
            s = surface.partner[surface.end(s)]
        if s != s0:
            raise InvalidMatching("piece traversal does not close up")
        side = surface.label(s0).factor
        winding = FactorElement(side)
        for seg in cycle:
            winding = winding * surface.label(seg)
        idx = len(pieces)
        kind = "disk" if winding.is_identity and idx not in surface.forced_annuli else "annulus"
        pieces.append(Piece(side, tuple(cycle), winding, kind))
    return pieces


def euler_neg(surface: NormalFormSurface) -> int:
    """``-chi(S)`` as the sum over pieces of ``d(P)/2 - chi(P)``."""
    total = sum(Fraction(p.d, 2) - p.chi for p in surface.pieces)
    if total.denominator != 1:
        raise InvalidMatching(f"non-integral Euler characteristic {total}")
    return int(total)


# ---------------------------------------------------------------------------
# lambda pullback and orientations

def pull_lambda(surface: NormalFormSurface, cert: StackingCertificate) -> dict[Juncture, Fraction]:
    if cert.word != surface.word:
        raise WordMismatch("certificate and surface are for different words")
    L = len(surface.word)
    return {j: cert.lam[surface.phase(j) or L] for j in surface.junctures()}


@dataclass(frozen=True)
class Orientation:
    """Each arc as ``(tail, head)``, pointing from the larger value to the smaller."""

    arcs: dict
    toward: dict  # juncture -> does its arc point toward it

    def head(self, j: Juncture) -> bool:
        return self.toward[j]


def orient_arcs(surface: NormalFormSurface, lam_hat: dict) -> Orientation | CompressibilityWitness:
    arcs = {}
    toward = {}
    for j, k in surface.arcs:
        if lam_hat[j] == lam_hat[k]:
            return CompressibilityWitness((j, k), surface.phase(j))
        tail, head = (j, k) if lam_hat[j] > lam_hat[k] else (k, j)
        arcs[(j, k)] = (tail, head)
        toward[head], toward[tail] = True, False
    return Orientation(arcs, toward)


@dataclass(frozen=True)
class Consistency:
    flags: dict  # segment -> consistent?
    consistent: int
    inconsistent: int


def segment_consistency(surface: NormalFormSurface, orientation: Orientation) -> Consistency:
    flags = {}
    for s in surface.segments():
        flags[s] = orientation.toward[s] == orientation.toward[surface.end(s)]
    c = sum(flags.values())
    return Consistency(flags, c, len(flags) - c)


def sign_changes(surface: NormalFormSurface, piece: Piece, orientation: Orientation) -> int:
    """Number of sign changes around ``piece``.

    ``sign_i`` is +1 when the arc entering segment ``i`` is oriented from the
    previous segment's end to this segment's start.
    """
    segs = piece.segments
    signs = []
    for i, s in enumerate(segs):
        prev_end = surface.end(segs[i - 1])
        arc = tuple(sorted((prev_end, s)))
        tail, _ = orientation.arcs[arc]
        signs.append(1 if tail == prev_end else -1)
    return sum(1 for i in range(len(signs)) if signs[i] != signs[(i + 1) % len(signs)])


# ---------------------------------------------------------------------------
# audit

@dataclass
class PieceRow:
    side: str
    d: int
    kind: str
    winding: str
    sc: int | None
    consistent: int | None

    def to_json(self) -> dict:
        return {"side": self.side, "d": self.d, "kind": self.kind, "winding": self.winding, "sc": self.sc}


@dataclass
class AuditReport:
    degree: int
    euler_neg: int
    verdict: str  # "holds", "violated" or "not_applicable"
    pieces: list[PieceRow] = field(default_factory=list)
    witness: CompressibilityWitness | None = None
    consistent: int | None = None
    inconsistent: int | None = None
    lemma_failures: list[str] = field(default_factory=list)

    @property
    def slack(self) -> int:
        return self.euler_neg - self.degree

    def to_json(self) -> dict:
        out = {
            "deg": self.degree,
            "euler_neg": self.euler_neg,
            "verdict": self.verdict,
            "pieces": [p.to_json() for p in self.pieces],
            "consistent": self.consistent,
            "inconsistent": self.inconsistent,
            "lemma_failures": list(self.lemma_failures),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def audit(surface: NormalFormSurface, cert: StackingCertificate) -> AuditReport:
    lam_hat = pull_lambda(surface, cert)
    deg, chi_neg = surface.degree, euler_neg(surface)
    orient = orient_arcs(surface, lam_hat)
    if isinstance(orient, CompressibilityWitness):
        rows = [PieceRow(p.side, p.d, p.kind, str(p.winding), None, None) for p in surface.pieces]
        return AuditReport(deg, chi_neg, "not_applicable", rows, witness=orient)
    cons = segment_consistency(surface, orient)
    rows, failures = [], []
    for i, p in enumerate(surface.pieces):
        sc = sign_changes(surface, p, orient)
        c = sum(cons.flags[s] for s in p.segments)
        rows.append(PieceRow(p.side, p.d, p.kind, str(p.winding), sc, c))
        if sc != c:
            failures.append(f"piece {i}: sc={sc} but {c} consistent segments")
        if sc % 2:
            failures.append(f"piece {i}: odd sc={sc}")
        if sc < 2 * p.chi:
            failures.append(f"piece {i}: sc={sc} < 2 chi")
        if p.kind == "disk" and sc == 0:
            failures.append(f"piece {i}: disk piece without sign changes")
    L = len(surface.word)
    if cons.consistent > (L - 2) * deg:
        failures.append(f"{cons.consistent} consistent segments exceed (|w|-2) deg = {(L - 2) * deg}")
    if cons.inconsistent < 2 * deg:
        failures.append(f"{cons.inconsistent} inconsistent segments, fewer than 2 deg = {2 * deg}")
    verdict = "holds" if chi_neg >= deg else "violated"
    return AuditReport(deg, chi_neg, verdict, rows, None, cons.consistent, cons.inconsistent, failures)


# ---------------------------------------------------------------------------
# surfaces from equations a = prod g_i w^{n_i} g_i^-1

def _cyclic_steps(e: FactorElement) -> tuple[tuple[int, int], ...]:
    steps = e.steps()
    while len(steps) >= 2 and steps[0][0] == steps[-1][0] and steps[0][1] == -steps[-1][1]:
        steps = steps[1:-1]
    return tuple(steps)


def factor_conjugate(x: FactorElement, y: FactorElement) -> bool:
    """Conjugacy in a free factor: cyclic reductions agree up to rotation."""
    if x.factor != y.factor:
        return False
    u, v = _cyclic_steps(x), _cyclic_steps(y)
    if len(u) != len(v):
        return False
    if not u:
        return True
    return any(u[i:] + u[:i] == v for i in range(len(u)))


@dataclass(frozen=True)
class EquationSurface:
    """Boundary data of the planar surface carried by ``a = prod g_i w^{n_i} g_i^-1``.

    The matching is not determined by the equation; :meth:`realized_by` tells
    whether a given surface on these boundaries has the required piece structure.
    """

    word: AlternatingWord
    target: FactorElement
    conjugators: tuple
    boundaries: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.boundaries)

    @property
    def degree(self) -> int:
        return sum(abs(n) for n in self.boundaries)

    @property
    def euler_neg(self) -> int:
        # sphere with k w-boundaries and one boundary for the target
        return self.k - 1

    def realized_by(self, surface: NormalFormSurface) -> bool:
        if surface.word != self.word or surface.boundaries != self.boundaries:
            return False
        annuli = [p for p in surface.pieces if p.kind == "annulus"]
        if len(annuli) != 1:
            return False
        ann = annuli[0]
        if ann.side != self.target.factor:
            return False
        if not (factor_conjugate(ann.winding, self.target) or factor_conjugate(ann.winding, self.target.inverse())):
            return False
        return surface_connected(surface) and euler_neg(surface) == self.euler_neg


def surface_connected(surface: NormalFormSurface) -> bool:
    parent = list(range(len(surface.boundaries)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for j, k in surface.arcs:
        parent[find(j.boundary)] = find(k.boundary)
    return len({find(i) for i in range(len(parent))}) == 1


def surface_from_equation(a: FactorElement, w: AlternatingWord, conjugators: Sequence,
                          exponents: Sequence[int]) -> EquationSurface:
    exps = tuple(int(n) for n in exponents)
    if any(n == 0 for n in exps):
        raise InvalidMatching("exponents must be nonzero")
    return EquationSurface(w, a, tuple(conjugators), exps)


def lambda_hat_json(lam_hat: dict) -> list:
    return [[list(j), rat_str(v)] for j, v in sorted(lam_hat.items())]
