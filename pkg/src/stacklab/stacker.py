"""Construction of relative stackings.

Pipeline: for every prefix pair ``(w1, w2)`` of ``w`` the system
``{y.w = y, y.(w1 w2 w1^-1) != y}`` is conjugated by ``w1`` into
``{y.rot = y, y.w2 != y}``, solved by a dynamical arrangement on a catenation
(:func:`solve_simple`), moved back, and all solutions are merged by a finite
blow-up (:func:`combine_systems`).  The merged action is re-verified exactly.

Blocks of a catenation are length-2 integer intervals ``[origin + t, origin + t + 2]``.
Even ``t`` hosts letters of the first letter's factor, odd ``t`` the other.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .actions import (FactorAction, ProductAction, StackingCertificate, act_point, certificate_from_action,
                      check_stability, eval_word)
from .errors import (BadPattern, CapacityExceeded, CombineFailed, EqualElements, InputError,
                     InternalCheckFailed, NotCyclicallyReduced, ProperPower, SystemMismatch)
from .plline import (Interval, affine_conjugate, compose, conjugate_through, diagonal_product, fixed_sets,
                     make_mover, rat, rat_str)
from .words import (AlternatingWord, FactorElement, as_letters, inverse_word, is_proper_power,
                    other_factor, prefix_pairs, reduce, swap_factors)

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


@dataclass(frozen=True)
class StackerConfig:
    z_offset: Fraction = QUARTER  # gap width next to y1, y2 in Case 1
    retries: int = 8
    seed: int | None = None
    copy_fraction: Fraction = HALF  # nested copy radius relative to the localization radius

    def __post_init__(self):
        object.__setattr__(self, "z_offset", rat(self.z_offset))
        object.__setattr__(self, "copy_fraction", rat(self.copy_fraction))
        if not 0 < self.z_offset < 1:
            raise InputError("z_offset must lie in (0, 1)")
        if not 0 < self.copy_fraction < 1:
            raise InputError("copy_fraction must lie in (0, 1)")
        if self.retries < 0:
            raise InputError("retries must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict) -> "StackerConfig":
        known = {"z_offset", "retries", "seed", "copy_fraction"}
        kwargs = {k: v for k, v in data.items() if k in known}
        if "retries" in kwargs:
            kwargs["retries"] = int(kwargs["retries"])
        return cls(**kwargs)

    def rng_seed(self) -> int:
        if self.seed is not None:
            return int(self.seed)
        return int(os.environ.get("STACKLAB_SEED", "0"))


# ---------------------------------------------------------------------------
# catenations

_FAMILY = {"I": 0, "L": 0, "K": 0, "J": 1, "M": 1}


@dataclass(frozen=True)
class Catenation:
    tags: tuple[str, ...]
    blocks: tuple[Interval, ...]

    def __len__(self):
        return len(self.blocks)

    def block(self, tag: str) -> Interval:
        return self.blocks[self.tags.index(tag)]


def build_catenation(pattern: Sequence[str], origin: int = 0) -> Catenation:
    """Lay out length-2 blocks left to right, consecutive blocks overlapping by 1."""
    if not pattern:
        raise BadPattern("empty pattern")
    fams = []
    for tag in pattern:
        fam = _FAMILY.get(str(tag)[:1])
        if fam is None:
            raise BadPattern(f"unknown block tag {tag!r}")
        fams.append(fam)
    for i in range(1, len(fams)):
        if fams[i] == fams[i - 1]:
            raise BadPattern(f"blocks {pattern[i - 1]!r} and {pattern[i]!r} belong to the same family")
    blocks = tuple(Interval.open(origin + t, origin + t + 2) for t in range(len(pattern)))
    return Catenation(tuple(str(t) for t in pattern), blocks)


def arrangement_pattern(n: int, k: int) -> list[str]:
    """(I1, J1, ..., In, Jn, L1, M1, ..., Lk, Jn', In', ..., J1', I1')."""
    pat = []
    for i in range(1, n + 1):
        pat += [f"I{i}", f"J{i}"]
    for i in range(1, k + 1):
        pat.append(f"L{i}")
        if i < k:
            pat.append(f"M{i}")
    for i in range(n, 0, -1):
        pat += [f"J{i}'", f"I{i}'"]
    return pat


# ---------------------------------------------------------------------------
# actions realizing prescribed motions

def move_point(letter: FactorElement, support: Interval, p, q) -> FactorAction:
    """An action of ``letter.factor`` supported in ``support`` with ``p . letter = q``.

    The letter is spelled as single generator steps and the point is walked
    along a monotone chain from ``p`` to ``q``.  Free reduction of the letter
    makes the prescriptions of each generator jointly increasing.
    """
    p, q = rat(p), rat(q)
    if not (support.lo < p < support.hi and support.lo < q < support.hi):
        raise InputError(f"points {p}, {q} must lie inside {support}")
    steps = letter.steps()
    if not steps:
        if p != q:
            raise InputError("the identity cannot move a point")
        return FactorAction(letter.factor)
    if p == q:
        return FactorAction(letter.factor)
    m = len(steps)
    chain = [p + (q - p) * i / m for i in range(m + 1)]
    pairs: dict[int, list[tuple[Fraction, Fraction]]] = {}
    for i, (g, s) in enumerate(steps, start=1):
        src, dst = (chain[i - 1], chain[i]) if s > 0 else (chain[i], chain[i - 1])
        pairs.setdefault(g, []).append((src, dst))
    return FactorAction(letter.factor, {g: make_mover(support, ps) for g, ps in pairs.items()})


def separated_pair(interval: Interval, f: FactorElement, g: FactorElement, x, y) -> FactorAction:
    """An action on ``interval`` with ``y . g < x . f`` for given ``x < y`` inside it."""
    x, y = rat(x), rat(y)
    if f.factor != g.factor:
        raise InputError("f and g must lie in the same factor")
    if f.is_identity or g.is_identity:
        raise InputError("f and g must be nontrivial")
    if f == g:
        raise EqualElements(f"f and g are both {f}")
    if not (interval.lo < x < y < interval.hi):
        raise InputError(f"need {interval.lo} < x < y < {interval.hi}")
    # on [0, 4]: move s to t > s under e = g^-1 f, then z = s . g^-1 has z.g = s < t = z.f
    std = Interval(0, 4)
    e = g.inverse() * f
    base = move_point(e, std, 1, 3)
    act = ProductAction(**{f.factor: base, other_factor(f.factor): FactorAction(other_factor(f.factor))})
    ginv = (g.inverse(),)
    z = act_point(act, Fraction(1), ginv)
    target = act_point(act, z, (f,))
    delta = (std.hi - z) / 2
    while act_point(act, z + delta, (g,)) >= target:
        delta /= 2
    knots = [(std.lo, interval.lo), (z, x), (z + delta, y), (std.hi, interval.hi)]
    return FactorAction(f.factor, {k: conjugate_through(h, knots) for k, h in base.gens.items()})


def _assemble(parts: Iterable[FactorAction]) -> ProductAction:
    """Generator-wise diagonal product of block actions, separately per factor."""
    by_factor: dict[str, list[FactorAction]] = {"A": [], "B": []}
    for fa in parts:
        by_factor[fa.factor].append(fa)
    out = {}
    for tag, fas in by_factor.items():
        gens = sorted({g for fa in fas for g in fa.gens})
        out[tag] = FactorAction(tag, {g: diagonal_product(fa.gen(g) for fa in fas) for g in gens})
    return ProductAction(out["A"], out["B"])


@dataclass(frozen=True)
class TransportLeg:
    block: Interval
    letter: FactorElement
    start: Fraction
    end: Fraction


def plan_transport(letters: Sequence[FactorElement], blocks: Sequence[Interval], start, target,
                   direction: int) -> list[TransportLeg]:
    """Walk ``start`` through ``blocks`` one letter per block.

    Intermediate points sit in the overlap with the next block, at offset 7/4
    (rightward) or 1/4 (leftward) from the block's left end; the last letter
    lands on ``target``.
    """
    letters = list(letters)
    if len(letters) > len(blocks):
        raise CapacityExceeded(f"{len(letters)} letters but only {len(blocks)} blocks")
    p = rat(start)
    legs = []
    offset = Fraction(7, 4) if direction > 0 else QUARTER
    for i, (letter, blk) in enumerate(zip(letters, blocks)):
        q = rat(target) if i == len(letters) - 1 else blk.lo + offset
        legs.append(TransportLeg(blk, letter, p, q))
        p = q
    return legs


def _realize(legs: Iterable[TransportLeg]) -> list[FactorAction]:
    return [move_point(leg.letter, leg.block, leg.start, leg.end) for leg in legs]


@dataclass(frozen=True)
class Transport:
    actions: ProductAction
    end: Fraction


def _transport(letters, catenation: Catenation, start, gap: Interval, direction: int) -> Transport:
    letters = as_letters(letters)
    if not letters:
        return Transport(ProductAction(), rat(start))
    blocks = list(catenation.blocks) if direction > 0 else list(reversed(catenation.blocks))
    legs = plan_transport(letters, blocks, start, gap.midpoint, direction)
    return Transport(_assemble(_realize(legs)), legs[-1].end)


def rightward_transport(letters, catenation: Catenation, start, gap: Interval) -> Transport:
    """Blocks used left to right; the endpoint lands at the midpoint of ``gap``."""
    return _transport(letters, catenation, start, gap, +1)


def leftward_transport(letters, catenation: Catenation, start, gap: Interval) -> Transport:
    """Mirror image: blocks used right to left."""
    return _transport(letters, catenation, start, gap, -1)


# ---------------------------------------------------------------------------
# systems

@dataclass(frozen=True)
class EquationSystem:
    equations: tuple[AlternatingWord, ...] = ()
    inequations: tuple[AlternatingWord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(reduce(a) for a in self.equations))
        object.__setattr__(self, "inequations", tuple(reduce(b) for b in self.inequations))
        if not self.equations and not self.inequations:
            raise InputError("a system needs at least one equation or inequation")

    def words(self) -> tuple[AlternatingWord, ...]:
        return self.equations + self.inequations


@dataclass(frozen=True)
class SystemSolution:
    action: ProductAction
    point: Fraction


def solves(sys: EquationSystem, sol: SystemSolution) -> bool:
    x = sol.point
    return (all(act_point(sol.action, x, a) == x for a in sys.equations)
            and all(act_point(sol.action, x, b) != x for b in sys.inequations))


def conjugate_system(sys: EquationSystem, h) -> EquationSystem:
    """Replace every word ``a`` by ``h^-1 a h``."""
    h = as_letters(h)
    hinv = inverse_word(h)

    def conj(a):
        return reduce(hinv + tuple(a) + h)

    return EquationSystem(tuple(conj(a) for a in sys.equations), tuple(conj(b) for b in sys.inequations))


def transfer_solution(sol: SystemSolution, h) -> SystemSolution:
    """Move the point by ``h``: a solution of a system becomes one of its ``h``-conjugate."""
    return SystemSolution(sol.action, act_point(sol.action, sol.point, as_letters(h)))


# ---------------------------------------------------------------------------
# arrangements

@dataclass
class ArrangementPlan:
    case: int
    anchors: dict[str, Fraction] = field(default_factory=dict)
    catenation: Catenation | None = None
    interval: Interval | None = None
    rotations: list[FactorElement] = field(default_factory=list)
    swapped: bool = False

    def to_json(self) -> dict:
        blocks = []
        if self.catenation is not None:
            blocks = [{"tag": t, "lo": rat_str(b.lo), "hi": rat_str(b.hi)}
                      for t, b in zip(self.catenation.tags, self.catenation.blocks)]
        out = {
            "case": self.case,
            "anchors": {k: rat_str(v) for k, v in self.anchors.items()},
            "blocks": blocks,
            "rotations": len(self.rotations),
            "swapped": self.swapped,
        }
        if self.interval is not None:
            out["interval"] = [rat_str(self.interval.lo), rat_str(self.interval.hi)]
        return out


@dataclass(frozen=True)
class Arrangement:
    solution: SystemSolution
    interval: Interval
    plan: ArrangementPlan


def _swap_action(act: ProductAction) -> ProductAction:
    return ProductAction(FactorAction("A", act.B.gens), FactorAction("B", act.A.gens))


def _case1(w: AlternatingWord, w1: AlternatingWord, cfg: StackerConfig):
    n, k = len(w) // 2, (len(w1) + 1) // 2
    eps = cfg.z_offset
    cat = build_catenation(arrangement_pattern(n, k))
    blk = dict(zip(cat.tags, cat.blocks))
    x1, x2 = blk["J1"].lo, blk["J1'"].hi
    y1, y2 = blk[f"J{n}"].hi, blk[f"J{n}'"].lo
    z1, z2 = y1 - eps, y2 + eps
    first, last = 2 * n, 2 * n + 2 * k - 1  # the L/M stretch
    legs = plan_transport(w, cat.blocks[:first], x1, (z1 + y1) / 2, +1)
    legs += plan_transport(w, cat.blocks[last:][::-1], x2, (y2 + z2) / 2, -1)
    legs += plan_transport(w1, cat.blocks[first:last], z1, (z2 + blk[f"L{k}"].hi) / 2, +1)
    act = _assemble(_realize(legs))
    anchors = dict(x1=x1, x2=x2, y1=y1, y2=y2, z1=z1, z2=z2)
    return act, Interval(z1, z2), ArrangementPlan(1, anchors, cat)


def _case2(w: AlternatingWord, w1: AlternatingWord, cfg: StackerConfig):
    n, k = len(w) // 2, len(w1) // 2
    cat = build_catenation(arrangement_pattern(n, k))
    blk = dict(zip(cat.tags, cat.blocks))
    x1, x2 = blk["J1"].lo, blk["J1'"].hi
    y2 = blk[f"J{n}"].hi
    y1 = y2 - HALF
    jn = blk[f"J{n}'"]
    p1, p2 = jn.lo, jn.hi
    first = 2 * n
    legs = plan_transport(w, cat.blocks[:first], x1, (y1 + y2) / 2, +1)
    legs += plan_transport(w1[:-1], cat.blocks[first:first + 2 * k - 1], y1, p1 + HALF, +1)
    # J_n' is left free here; it receives the separated pair below
    tail = list(reversed(cat.blocks[first + 2 * k:]))
    legs += plan_transport(w[:-1], tail, x2, p2 - HALF, -1)
    u1, u2 = p1 + HALF, p2 - HALF
    sep = separated_pair(jn, w1[-1], w[-1], u1, u2)
    act = _assemble(_realize(legs) + [sep])
    v1 = act_point(act, u1, (w1[-1],))
    v2 = act_point(act, u2, (w[-1],))
    anchors = dict(x1=x1, x2=x2, y1=y1, y2=y2, p1=p1, p2=p2, u1=u1, u2=u2, v1=v1, v2=v2)
    return act, Interval(y1, v2), ArrangementPlan(2, anchors, cat)


def _check_interval(act: ProductAction, w, w1, iv: Interval):
    h, h1 = eval_word(act, w), eval_word(act, w1)
    if not (h.eval(iv.lo) >= iv.lo and h.eval(iv.hi) <= iv.hi):
        raise InternalCheckFailed(f"interval {iv} is not mapped into itself by w")
    if not (h1.eval(iv.lo) > iv.hi or h1.eval(iv.hi) < iv.lo):
        raise InternalCheckFailed(f"interval {iv} meets its image under the prefix")


def arrange(w: AlternatingWord, w1: AlternatingWord, config: StackerConfig | None = None) -> Arrangement:
    """Dynamical arrangement for ``{y.w = y, y.w1 != y}`` with ``w1`` a proper prefix.

    ``w`` only needs to be cyclically reduced in the wide sense; a B-first word
    is handled by exchanging the factors.
    """
    cfg = config or StackerConfig()
    w, w1 = reduce(w), reduce(w1)
    if not w.is_cyclic:
        raise NotCyclicallyReduced(f"{w} is not cyclically reduced")
    if not (0 < len(w1) < len(w) and w.letters[:len(w1)] == w1.letters):
        raise InputError(f"{w1} is not a proper prefix of {w}")
    if is_proper_power(w):
        raise ProperPower(f"{w} is a proper power")
    orig_w, orig_w1 = w, w1
    rotations: list[FactorElement] = []
    if len(w1) % 2 == 0:
        while w1[-1] == w[-1]:
            if len(rotations) > len(w):
                raise ProperPower(f"{orig_w} is a proper power")
            c = w[-1]
            rotations.append(c)
            w = AlternatingWord((c,) + w.letters[:-1])
            w1 = AlternatingWord((c,) + w1.letters[:-1])
    swapped = w[0].factor == "B"
    ws, w1s = (swap_factors(w), swap_factors(w1)) if swapped else (w, w1)
    if len(w1s) % 2:
        act, iv, plan = _case1(ws, w1s, cfg)
    else:
        act, iv, plan = _case2(ws, w1s, cfg)
    if swapped:
        act = _swap_action(act)
    _check_interval(act, w, w1, iv)
    sets = fixed_sets(eval_word(act, w), iv)
    if not sets:
        raise InternalCheckFailed(f"no fixed point of w in {iv}")
    x = sets[0].lo
    # undo the rotations: x_{j-1} = x_j . c_j
    for c in reversed(rotations):
        x = act_point(act, x, (c,))
        iv = Interval(act_point(act, iv.lo, (c,)), act_point(act, iv.hi, (c,)))
    _check_interval(act, orig_w, orig_w1, iv)
    plan.interval = iv
    plan.rotations = rotations
    plan.swapped = swapped
    return Arrangement(SystemSolution(act, x), iv, plan)


def solve_simple(w: AlternatingWord, w1: AlternatingWord,
                 config: StackerConfig | None = None) -> tuple[SystemSolution, Interval]:
    arr = arrange(w, w1, config)
    return arr.solution, arr.interval


# ---------------------------------------------------------------------------
# localization and combination

def _paths(act: ProductAction, x: Fraction, words: Iterable) -> dict[int, dict[str, set]]:
    """Generator steps met along each word from ``x``: ``{factor: {g: {(src, dst)}}}``."""
    moves: dict[str, dict[int, set]] = {"A": {}, "B": {}}
    for word in words:
        p = x
        for letter in as_letters(word):
            fa = act.factor_action(letter.factor)
            for g, s in letter.steps():
                h = fa.gen(g)
                if s > 0:
                    q = h.eval(p)
                    moves[letter.factor].setdefault(g, set()).add((p, q))
                else:
                    q = h.inverse().eval(p)
                    moves[letter.factor].setdefault(g, set()).add((q, p))
                p = q
    return moves


@dataclass(frozen=True)
class Localized:
    solution: SystemSolution
    radius: Fraction
    points: tuple[Fraction, ...]


def localize(sol: SystemSolution, words: Iterable) -> Localized:
    """Re-interpolate the action so each generator is a translation near every path point.

    The generator values at the path points are kept, so every equation and
    inequation keeps its truth value at the point, and a word fixing the point
    becomes the identity on a neighbourhood of it.
    """
    moves = _paths(sol.action, sol.point, list(words))
    pts = {sol.point}
    for per in moves.values():
        for pairs in per.values():
            for p, q in pairs:
                pts.update((p, q))
    pts = sorted(pts)
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    r = min([g / 4 for g in gaps] + [QUARTER])
    support = Interval(pts[0] - 1, pts[-1] + 1)
    out = {}
    for tag in ("A", "B"):
        gens = {}
        for g, pairs in moves[tag].items():
            presc = []
            for p, q in sorted(pairs):
                presc += [(p - r, q - r), (p + r, q + r)]
            gens[g] = make_mover(support, presc)
        out[tag] = FactorAction(tag, gens)
    return Localized(SystemSolution(ProductAction(out["A"], out["B"]), sol.point), r, tuple(pts))


def _nest(outer: Localized, inner: SystemSolution, frac: Fraction) -> SystemSolution:
    """Blow up ``outer``: put a scaled copy of ``inner`` around every outer path point."""
    hull = inner.action.hull()
    lo, hi = (hull if hull is not None else (inner.point, inner.point))
    lo, hi = min(lo, inner.point) - 1, max(hi, inner.point) + 1
    src = Interval(lo, hi)
    rho = outer.radius * frac
    copies = [Interval(q - rho, q + rho) for q in outer.points]
    gens = {}
    for tag in ("A", "B"):
        fo, fi = outer.solution.action.factor_action(tag), inner.action.factor_action(tag)
        merged = {}
        for g in sorted(set(fo.gens) | set(fi.gens)):
            h = fi.gen(g)
            tau = diagonal_product(affine_conjugate(h, src, dst) for dst in copies) if not h.is_identity else h
            merged[g] = compose(tau, fo.gen(g))
        gens[tag] = FactorAction(tag, merged)
    scale = (2 * rho) / (hi - lo)
    x = outer.solution.point - rho + (inner.point - lo) * scale
    return SystemSolution(ProductAction(gens["A"], gens["B"]), x)


def combine_systems(solutions: Sequence[tuple[EquationSystem, SystemSolution]],
                    config: StackerConfig | None = None) -> SystemSolution:
    """Merge solutions of systems sharing their equations into one solution of the union."""
    cfg = config or StackerConfig()
    solutions = list(solutions)
    if not solutions:
        raise InputError("nothing to combine")
    eqs = {frozenset(s.equations) for s, _ in solutions}
    if len(eqs) > 1:
        raise SystemMismatch("systems do not share the same equations")
    if len(solutions) == 1:
        return solutions[0][1]
    for s, sol in solutions:
        if not solves(s, sol):
            raise InternalCheckFailed("an input solution does not solve its system")
    words: list = []
    for s, _ in solutions:
        for a in s.words():
            if a not in words:
                words.append(a)
    rng = random.Random(cfg.rng_seed())
    cur_sys, cur = solutions[0]
    for sys, sol in solutions[1:]:
        union = EquationSystem(cur_sys.equations, tuple(dict.fromkeys(cur_sys.inequations + sys.inequations)))
        inner = localize(sol, words).solution
        frac = cfg.copy_fraction
        for attempt in range(cfg.retries + 1):
            cand = _nest(localize(cur, words), inner, frac)
            if solves(union, cand):
                break
            frac = Fraction(rng.randint(1, 15), 16)
        else:
            raise CombineFailed(f"combined action failed verification after {cfg.retries} retries")
        cur_sys, cur = union, cand
    return localize(cur, words).solution


# ---------------------------------------------------------------------------
# stackings

def stacking_systems(w: AlternatingWord) -> list[tuple[tuple[AlternatingWord, AlternatingWord], EquationSystem]]:
    out = []
    for w1, w2 in prefix_pairs(w):
        beta = reduce(tuple(w1) + tuple(w2) + inverse_word(w1))
        out.append(((w1, w2), EquationSystem((w,), (beta,))))
    return out


def build_stacking(w: AlternatingWord, config: StackerConfig | None = None) -> StackingCertificate:
    """Action and base point with a stable trajectory for ``w``; returns a certificate."""
    cfg = config or StackerConfig()
    w = reduce(w)
    if not w.is_cyclically_reduced:
        raise NotCyclicallyReduced(f"{w} is not cyclically reduced in the A-first form")
    pp = is_proper_power(w)
    if pp:
        raise ProperPower(f"{w} is a proper power: ({pp[0]})^{pp[1]}")
    solved = []
    for (w1, w2), sys in stacking_systems(w):
        conj = conjugate_system(sys, w1)
        sol, _ = solve_simple(conj.equations[0], conj.inequations[0], cfg)
        back = transfer_solution(sol, inverse_word(w1))
        if not solves(sys, back):
            raise InternalCheckFailed(f"transferred solution fails for prefix pair ({w1}, {w2})")
        solved.append((sys, back))
    combined = combine_systems(solved, cfg)
    cert = certificate_from_action(w, combined.action, combined.point)
    verdict = check_stability(combined.action, w, combined.point)
    if not verdict.stable:
        raise CombineFailed(f"combined action is not a stacking: {verdict.describe()}")
    return cert
