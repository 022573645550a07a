"""Exact piecewise-linear homeomorphisms of the line with bounded support.

A :class:`PLHomeo` is given by its breakpoints ``(x, y)``; it interpolates
linearly between them and is the identity outside ``[first.x, last.x]``.
Breakpoints are kept in canonical form (collinear points pruned) so that
structural equality is equality of maps.

Composition follows the right-action convention: ``compose(g, h)`` is the map
``x -> h(g(x))``.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError, MonotonicityViolation, OverlappingSupports

Rat = Fraction


def rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    return Fraction(value)


def rat_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo > self.hi:
            raise InputError(f"empty interval [{self.lo}, {self.hi}]")
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise InputError("a degenerate interval must be closed")

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, True)

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        x = rat(x)
        left = self.lo < x if self.lo_open else self.lo <= x
        right = x < self.hi if self.hi_open else x <= self.hi
        return left and right

    def interior_contains(self, x) -> bool:
        return self.lo < x < self.hi

    def __str__(self) -> str:
        return f"{'(' if self.lo_open else '['}{self.lo}, {self.hi}{')' if self.hi_open else ']'}"


def _collinear(p, q, r) -> bool:
    return (q[1] - p[1]) * (r[0] - q[0]) == (r[1] - q[1]) * (q[0] - p[0])


def _canonical(points: Sequence[tuple[Fraction, Fraction]]) -> tuple[tuple[Fraction, Fraction], ...]:
    if not points:
        return ()
    first, last = points[0][0], points[-1][0]
    # identity extension on both sides, represented by virtual diagonal points
    padded = [(first - 1, first - 1), *points, (last + 1, last + 1)]
    stack: list[tuple[Fraction, Fraction]] = []
    for p in padded:
        while len(stack) >= 2 and _collinear(stack[-2], stack[-1], p):
            stack.pop()
        stack.append(p)
    return tuple(stack[1:-1])


class PLHomeo:
    """Strictly increasing PL bijection of the line, identity off a bounded set."""

    __slots__ = ("breakpoints", "_xs", "_hash", "_inv")

    def __init__(self, breakpoints: Iterable = ()):
        pts = [(rat(x), rat(y)) for x, y in breakpoints]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if not (x0 < x1 and y0 < y1):
                raise MonotonicityViolation(f"breakpoints not strictly increasing at ({x0}, {y0}), ({x1}, {y1})")
        if pts and (pts[0][0] != pts[0][1] or pts[-1][0] != pts[-1][1]):
            raise MonotonicityViolation("first and last breakpoints must lie on the diagonal")
        self._set(_canonical(pts))

    def _set(self, bps):
        self.breakpoints = bps
        self._xs = [p[0] for p in bps]
        self._hash = None
        self._inv = None

    @classmethod
    def _trusted(cls, bps) -> "PLHomeo":
        # bps already validated and canonical
        h = cls.__new__(cls)
        h._set(tuple(bps))
        return h

    @classmethod
    def identity(cls) -> "PLHomeo":
        return cls(())

    @property
    def is_identity(self) -> bool:
        return not self.breakpoints

    @property
    def support(self) -> tuple[Fraction, Fraction] | None:
        """Closed hull of the support, or ``None`` for the identity."""
        if not self.breakpoints:
            return None
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    def __call__(self, x) -> Fraction:
        return self.eval(x)

    def eval(self, x) -> Fraction:
        bps = self.breakpoints
        if not bps:
            return x
        if x <= bps[0][0] or x >= bps[-1][0]:
            return x
        i = bisect_right(self._xs, x)
        (x0, y0), (x1, y1) = bps[i - 1], bps[i]
        if x == x0:
            return y0
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def inverse(self) -> "PLHomeo":
        # the mirror of a canonical form is canonical
        if self._inv is None:
            self._inv = PLHomeo._trusted((y, x) for x, y in self.breakpoints)
            self._inv._inv = self
        return self._inv

    def __eq__(self, other) -> bool:
        return isinstance(other, PLHomeo) and self.breakpoints == other.breakpoints

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.breakpoints)
        return self._hash

    def __repr__(self) -> str:
        if not self.breakpoints:
            return "PLHomeo(identity)"
        return "PLHomeo(" + ", ".join(f"({x}, {y})" for x, y in self.breakpoints) + ")"


IDENTITY = PLHomeo.identity()


def eval(h: PLHomeo, x) -> Fraction:  # noqa: A001 - mirrors the operation name
    return h.eval(rat(x))


def inverse(h: PLHomeo) -> PLHomeo:
    return h.inverse()


def compose(g: PLHomeo, h: PLHomeo) -> PLHomeo:
    """The map ``x -> h(g(x))``: apply ``g`` first."""
    if g.is_identity:
        return h
    if h.is_identity:
        return g
    ginv = g.inverse()
    xs = set(g._xs)
    xs.update(ginv.eval(x) for x in h._xs)
    return PLHomeo((x, h.eval(g.eval(x))) for x in sorted(xs))


def compose_all(maps: Iterable[PLHomeo]) -> PLHomeo:
    out = IDENTITY
    for m in maps:
        out = compose(out, m)
    return out


def power(h: PLHomeo, k: int) -> PLHomeo:
    base = h if k >= 0 else h.inverse()
    out = IDENTITY
    for _ in range(abs(k)):
        out = compose(out, base)
    return out


def image(h: PLHomeo, iv: Interval) -> Interval:
    return Interval(h.eval(iv.lo), h.eval(iv.hi), iv.lo_open, iv.hi_open)


def fixed_sets(h: PLHomeo, window: Interval) -> list[Interval]:
    """Maximal connected subsets of ``window`` fixed by ``h``, sorted, exact."""
    lo, hi = window.lo, window.hi
    if lo == hi:
        return [Interval.point(lo)] if h.eval(lo) == lo else []
    grid = [lo, *(x for x in h._xs if lo < x < hi), hi]
    pieces: list[tuple[Fraction, Fraction]] = []
    for u, v in zip(grid, grid[1:]):
        du, dv = h.eval(u) - u, h.eval(v) - v
        if du == 0 and dv == 0:
            pieces.append((u, v))
        elif du == 0:
            pieces.append((u, u))
        elif dv == 0:
            pieces.append((v, v))
        elif (du > 0) != (dv > 0):
            r = u + du * (v - u) / (du - dv)
            pieces.append((r, r))
    merged: list[list[Fraction]] = []
    for a, b in sorted(pieces):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    out = []
    for a, b in merged:
        lo_open = window.lo_open and a == lo
        hi_open = window.hi_open and b == hi
        if a == b and (lo_open or hi_open):
            continue
        out.append(Interval(a, b, lo_open, hi_open))
    return out


def make_mover(support: Interval, pairs: Sequence[tuple]) -> PLHomeo:
    """PL homeo supported in ``support`` sending each ``p`` to its ``q``.

    Uses one breakpoint per prescribed pair plus the two support endpoints.
    """
    pts = [(support.lo, support.lo)]
    pts += [(rat(p), rat(q)) for p, q in sorted(pairs, key=lambda pq: rat(pq[0]))]
    pts.append((support.hi, support.hi))
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if not (x0 < x1 and y0 < y1):
            raise MonotonicityViolation(
                f"prescription not jointly increasing inside {support}: ({x0} -> {y0}), ({x1} -> {y1})"
            )
    return PLHomeo(pts)


def conjugate_through(h: PLHomeo, knots: Sequence[tuple]) -> PLHomeo:
    """Transport ``h`` along the PL bijection ``psi`` through ``knots``.

    ``knots`` is a strictly increasing list of ``(s, t)`` pairs defining
    ``psi: [s_0, s_m] -> [t_0, t_m]``; ``h`` must be supported in ``[s_0, s_m]``.
    The result is ``y -> psi(h(psi^-1(y)))``, supported in ``[t_0, t_m]``.
    """
    knots = [(rat(s), rat(t)) for s, t in knots]
    for (s0, t0), (s1, t1) in zip(knots, knots[1:]):
        if not (s0 < s1 and t0 < t1):
            raise MonotonicityViolation("conjugating knots must be strictly increasing")
    if h.is_identity:
        return h
    s_lo, s_hi = knots[0][0], knots[-1][0]
    sup = h.support
    if sup[0] < s_lo or sup[1] > s_hi:
        raise InputError(f"map supported in [{sup[0]}, {sup[1]}] does not fit in [{s_lo}, {s_hi}]")
    psi = _knot_map(knots)
    hinv = h.inverse()
    xs = set(h._xs)
    xs.update(s for s, _ in knots)
    xs.update(hinv.eval(s) for s, _ in knots)
    return PLHomeo((psi(x), psi(h.eval(x))) for x in sorted(xs))


def _knot_map(knots):
    xs = [s for s, _ in knots]

    def psi(x):
        i = bisect_right(xs, x)
        if i == 0 or i == len(xs):
            if x == xs[-1]:
                return knots[-1][1]
            raise InputError(f"{x} outside the conjugating interval")
        (s0, t0), (s1, t1) = knots[i - 1], knots[i]
        return t0 + (t1 - t0) * (x - s0) / (s1 - s0)

    return psi


def affine_conjugate(h: PLHomeo, src: Interval, dst: Interval) -> PLHomeo:
    """Conjugate of ``h`` by the increasing affine bijection ``src -> dst``."""
    if src.length == 0 or dst.length == 0:
        raise InputError("affine conjugation needs nondegenerate intervals")
    return conjugate_through(h, [(src.lo, dst.lo), (src.hi, dst.hi)])


def diagonal_product(hs: Iterable[PLHomeo]) -> PLHomeo:
    """The map agreeing with each ``h`` on its support and the identity elsewhere."""
    maps = [h for h in hs if not h.is_identity]
    maps.sort(key=lambda h: h.support)
    for a, b in zip(maps, maps[1:]):
        if b.support[0] < a.support[1]:
            raise OverlappingSupports(f"supports [{a.support[0]}, {a.support[1]}] and "
                                      f"[{b.support[0]}, {b.support[1]}] overlap")
    pts: list[tuple[Fraction, Fraction]] = []
    for h in maps:
        for p in h.breakpoints:
            if pts and pts[-1] == p:
                continue
            pts.append(p)
    return PLHomeo(pts)


def pl_to_json(h: PLHomeo) -> dict:
    return {"breakpoints": [[rat_str(x), rat_str(y)] for x, y in h.breakpoints]}


def pl_from_json(data: dict) -> PLHomeo:
    try:
        return PLHomeo((rat(x), rat(y)) for x, y in data["breakpoints"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed PLHomeo JSON: {exc}") from exc
