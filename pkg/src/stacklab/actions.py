"""Actions of A*B on the line by PL homeomorphisms, trajectories and stability.

The verifier here (:func:`check_stability`, :func:`verify_certificate`) only
uses point evaluation of generator maps; it shares nothing with the builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import FactorMismatch, InputError, OverlappingSupports
from .plline import (IDENTITY, PLHomeo, compose, diagonal_product, pl_from_json, pl_to_json, rat,
                     rat_str)
from .words import FACTORS, AlternatingWord, FactorElement, as_letters, word_from_json, word_to_json


@dataclass(frozen=True)
class FactorAction:
    factor: str
    gens: Mapping[int, PLHomeo] = field(default_factory=dict)

    def __post_init__(self):
        if self.factor not in FACTORS:
            raise InputError(f"unknown factor tag {self.factor!r}")
        object.__setattr__(self, "gens", {int(k): v for k, v in dict(self.gens).items() if not v.is_identity})

    def gen(self, index: int) -> PLHomeo:
        return self.gens.get(index, IDENTITY)

    def hull(self) -> tuple[Fraction, Fraction] | None:
        sups = [h.support for h in self.gens.values()]
        if not sups:
            return None
        return min(s[0] for s in sups), max(s[1] for s in sups)

    def __hash__(self):
        return hash((self.factor, tuple(sorted(self.gens.items()))))


@dataclass(frozen=True)
class ProductAction:
    A: FactorAction = field(default_factory=lambda: FactorAction("A"))
    B: FactorAction = field(default_factory=lambda: FactorAction("B"))

    def __post_init__(self):
        if self.A.factor != "A" or self.B.factor != "B":
            raise FactorMismatch("ProductAction needs an A-action and a B-action")

    def factor_action(self, tag: str) -> FactorAction:
        return self.A if tag == "A" else self.B

    def hull(self) -> tuple[Fraction, Fraction] | None:
        hs = [h for h in (self.A.hull(), self.B.hull()) if h is not None]
        if not hs:
            return None
        return min(h[0] for h in hs), max(h[1] for h in hs)


def eval_factor(act: FactorAction, e: FactorElement) -> PLHomeo:
    if e.factor != act.factor:
        raise FactorMismatch(f"element of {e.factor} evaluated by an action of {act.factor}")
    out = IDENTITY
    for g, exp in e.syllables:
        h = act.gen(g)
        step = h if exp > 0 else h.inverse()
        for _ in range(abs(exp)):
            out = compose(out, step)
    return out


def eval_word(act: ProductAction, word) -> PLHomeo:
    out = IDENTITY
    for x in as_letters(word):
        out = compose(out, eval_factor(act.factor_action(x.factor), x))
    return out


def act_point(act: ProductAction, x: Fraction, word) -> Fraction:
    """Image of ``x`` under ``word``, one generator step at a time."""
    for letter in as_letters(word):
        fa = act.factor_action(letter.factor)
        for g, e in letter.syllables:
            h = fa.gen(g)
            if e < 0:
                h = h.inverse()
            for _ in range(abs(e)):
                x = h.eval(x)
    return x


@dataclass(frozen=True)
class Trajectory:
    base: Fraction
    points: tuple[tuple[int, Fraction], ...]


def trajectory(act: ProductAction, w: AlternatingWord, x) -> Trajectory:
    x = rat(x)
    pts = []
    cur = x
    for i, letter in enumerate(w, start=1):
        cur = act_point(act, cur, (letter,))
        pts.append((i, cur))
    return Trajectory(x, tuple(pts))


@dataclass(frozen=True)
class Verdict:
    kind: str  # "stable", "not_closed" or "duplicate"
    image: Fraction | None = None
    pair: tuple[int, int] | None = None

    @property
    def stable(self) -> bool:
        return self.kind == "stable"

    def describe(self) -> str:
        if self.kind == "stable":
            return "stable"
        if self.kind == "not_closed":
            return f"not closed: x.w = {self.image}"
        return f"duplicate: prefixes {self.pair[0]} and {self.pair[1]}"


def check_stability(act: ProductAction, w: AlternatingWord, x) -> Verdict:
    traj = trajectory(act, w, x)
    final = traj.points[-1][1]
    if final != traj.base:
        return Verdict("not_closed", image=final)
    first_seen: dict[Fraction, int] = {}
    best = None
    for i, p in traj.points:
        if p in first_seen:
            cand = (first_seen[p], i)
            if best is None or cand < best:
                best = cand
        else:
            first_seen[p] = i
    if best is not None:
        return Verdict("duplicate", pair=best)
    return Verdict("stable")


def generated_diagonal(acts: Iterable[ProductAction]) -> ProductAction:
    acts = list(acts)
    hulls = sorted((a.hull(), i) for i, a in enumerate(acts) if a.hull() is not None)
    for (h1, i), (h2, j) in zip(hulls, hulls[1:]):
        if h2[0] < h1[1]:
            raise OverlappingSupports(f"actions {i} and {j} have overlapping supports")
    out = {}
    for tag in FACTORS:
        idx = set()
        for a in acts:
            idx.update(a.factor_action(tag).gens)
        out[tag] = FactorAction(tag, {g: diagonal_product(a.factor_action(tag).gen(g) for a in acts)
                                      for g in sorted(idx)})
    return ProductAction(out["A"], out["B"])


@dataclass(frozen=True)
class StackingCertificate:
    word: AlternatingWord
    action: ProductAction
    base: Fraction
    lam: Mapping[int, Fraction]

    def to_json(self) -> dict:
        return {
            "word": word_to_json(self.word),
            "base": rat_str(self.base),
            "generators": {
                tag: {str(g): pl_to_json(h) for g, h in sorted(self.action.factor_action(tag).gens.items())}
                for tag in FACTORS
            },
            "lambda": {str(k): rat_str(v) for k, v in sorted(self.lam.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "StackingCertificate":
        try:
            word = word_from_json(data["word"])
            gens = {tag: FactorAction(tag, {int(g): pl_from_json(h)
                                            for g, h in data.get("generators", {}).get(tag, {}).items()})
                    for tag in FACTORS}
            lam = {int(k): rat(v) for k, v in data["lambda"].items()}
            base = rat(data["base"])
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed certificate JSON: {exc}") from exc
        return cls(word, ProductAction(gens["A"], gens["B"]), base, lam)


def certificate_from_action(w: AlternatingWord, act: ProductAction, x) -> StackingCertificate:
    traj = trajectory(act, w, x)
    return StackingCertificate(w, act, traj.base, dict(traj.points))


@dataclass(frozen=True)
class CertificateCheck:
    ok: bool
    reason: str
    verdict: Verdict


def verify_certificate(cert: StackingCertificate) -> CertificateCheck:
    """Independent exact check of a certificate: the action and the stored table."""
    w = cert.word
    if not w.is_cyclic:
        return CertificateCheck(False, "word is not cyclically reduced", Verdict("not_closed"))
    n = len(w)
    pending = Verdict("not_closed")
    if set(cert.lam) != set(range(1, n + 1)):
        return CertificateCheck(False, f"lambda table must have keys 1..{n}", pending)
    if cert.lam[n] != cert.base:
        return CertificateCheck(False, f"not closed: lambda[{n}] = {cert.lam[n]} differs from base {cert.base}",
                                pending)
    seen: dict[Fraction, int] = {}
    for k in range(1, n + 1):
        v = cert.lam[k]
        if v in seen:
            return CertificateCheck(False, f"duplicate: lambda entries {seen[v]} and {k} are equal",
                                    Verdict("duplicate", pair=(seen[v], k)))
        seen[v] = k
    verdict = check_stability(cert.action, w, cert.base)
    if not verdict.stable:
        return CertificateCheck(False, verdict.describe(), verdict)
    for k, p in trajectory(cert.action, w, cert.base).points:
        if cert.lam[k] != p:
            return CertificateCheck(False, f"lambda mismatch at prefix {k}: stored {cert.lam[k]}, actual {p}",
                                    verdict)
    return CertificateCheck(True, "stable", verdict)
