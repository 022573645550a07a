"""Exhaustive desk-scale oracles: surface enumeration, audit sweeps, equation search."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .actions import StackingCertificate
from .errors import BudgetExceeded, CapExceeded, InputError
from .surfaces import Juncture, NormalFormSurface, audit, juncture_type
from .words import AlternatingWord, FactorElement, as_letters, reduce, word_to_json

DEFAULT_CAP = 16
DEFAULT_BUDGET = 10 ** 7


def _typed_junctures(w: AlternatingWord, boundaries: Sequence[int]):
    L = len(w)
    ab, ba = [], []
    for i, n in enumerate(boundaries):
        for p in range(abs(n) * L):
            (ab if juncture_type(L, n, p) == "AB" else ba).append(Juncture(i, p))
    return ab, ba


def count_junctures(w: AlternatingWord, boundaries: Sequence[int]) -> int:
    return sum(abs(n) for n in boundaries) * len(w)


def enumerate_surfaces(w: AlternatingWord, boundaries: Sequence[int], cap: int = DEFAULT_CAP,
                       ) -> Iterator[NormalFormSurface]:
    """All AB/BA perfect matchings on the junctures, in lexicographic order.

    AB junctures are listed in sorted order and the i-th one is joined to the
    i-th entry of each permutation of the sorted BA junctures.
    """
    if any(n == 0 for n in boundaries):
        raise InputError("boundary exponents must be nonzero")
    total = count_junctures(w, boundaries)
    if total > cap:
        raise CapExceeded(f"{total} junctures exceed the cap of {cap}")
    ab, ba = _typed_junctures(w, boundaries)
    for perm in itertools.permutations(ba):
        yield NormalFormSurface(w, boundaries, list(zip(ab, perm)))


def boundary_multisets(max_degree: int) -> list[tuple[int, ...]]:
    """Sorted nonempty multisets of nonzero exponents with total degree at most ``max_degree``."""
    out = []

    def rec(prefix, remaining, lo):
        if prefix:
            out.append(tuple(prefix))
        for n in range(lo, max_degree + 1):
            if n == 0 or abs(n) > remaining:
                continue
            rec(prefix + [n], remaining - abs(n), n)

    rec([], max_degree, -max_degree)
    return sorted(out, key=lambda t: (sum(abs(n) for n in t), len(t), t))


@dataclass
class SweepReport:
    word: AlternatingWord
    max_degree: int
    surfaces: int = 0
    witness_free: int = 0
    min_slack: int | None = None
    counterexamples: list = field(default_factory=list)
    lemma_failures: list = field(default_factory=list)
    sc_odd: int = 0
    disk_sc_zero: int = 0
    sc_below_2chi: int = 0
    few_inconsistent: int = 0
    violations_with_witness: int = 0

    def to_json(self) -> dict:
        return {
            "word": word_to_json(self.word),
            "max_degree": self.max_degree,
            "surfaces": self.surfaces,
            "witness_free": self.witness_free,
            "min_slack": self.min_slack,
            "counterexamples": self.counterexamples,
            "lemma_failures": self.lemma_failures,
        }


def _sweep_one(args) -> dict:
    w, cert_json, boundaries, cap = args
    cert = StackingCertificate.from_json(cert_json)
    part = {"surfaces": 0, "witness_free": 0, "min_slack": None, "counterexamples": [], "lemma_failures": [],
            "sc_odd": 0, "disk_sc_zero": 0, "sc_below_2chi": 0, "few_inconsistent": 0,
            "violations_with_witness": 0}
    for s in enumerate_surfaces(w, boundaries, cap):
        rep = audit(s, cert)
        part["surfaces"] += 1
        if rep.verdict == "not_applicable":
            if rep.euler_neg < rep.degree:
                part["violations_with_witness"] += 1
            continue
        part["witness_free"] += 1
        slack = rep.slack
        if part["min_slack"] is None or slack < part["min_slack"]:
            part["min_slack"] = slack
        if rep.verdict == "violated":
            part["counterexamples"].append(s.to_json())
        for row in rep.pieces:
            part["sc_odd"] += row.sc % 2
            part["disk_sc_zero"] += row.kind == "disk" and row.sc == 0
            part["sc_below_2chi"] += row.sc < (2 if row.kind == "disk" else 0)
        part["few_inconsistent"] += rep.inconsistent < 2 * rep.degree
        for msg in rep.lemma_failures:
            part["lemma_failures"].append({"boundaries": list(boundaries), "failure": msg})
    return part


def sweep_audit(w: AlternatingWord, cert: StackingCertificate, max_total_degree: int, jobs: int = 1,
                cap: int = DEFAULT_CAP) -> SweepReport:
    """Audit every surface with total degree up to ``max_total_degree``."""
    if cert.word != w:
        raise InputError("certificate is for a different word")
    multisets = boundary_multisets(max_total_degree)
    for b in multisets:
        if count_junctures(w, b) > cap:
            raise CapExceeded(f"boundaries {list(b)} need {count_junctures(w, b)} junctures, cap is {cap}")
    tasks = [(w, cert.to_json(), b, cap) for b in multisets]
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1:
        parts = [_sweep_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_sweep_one, tasks))  # map keeps task order
    rep = SweepReport(w, max_total_degree)
    for part in parts:
        rep.surfaces += part["surfaces"]
        rep.witness_free += part["witness_free"]
        if part["min_slack"] is not None and (rep.min_slack is None or part["min_slack"] < rep.min_slack):
            rep.min_slack = part["min_slack"]
        rep.counterexamples += part["counterexamples"]
        rep.lemma_failures += part["lemma_failures"]
        for key in ("sc_odd", "disk_sc_zero", "sc_below_2chi", "few_inconsistent", "violations_with_witness"):
            setattr(rep, key, getattr(rep, key) + part[key])
    return rep


# ---------------------------------------------------------------------------
# equation search; A*B is treated as the free group on all generators

def _to_ints(word) -> tuple[int, ...]:
    """Signed integer letters: generator ``g`` of A is ``2g - 1``, of B is ``2g``."""
    out = []
    for x in as_letters(word):
        for g, s in x.steps():
            code = 2 * g - 1 if x.factor == "A" else 2 * g
            out.append(code * s)
    return tuple(out)


def _free(seq) -> tuple[int, ...]:
    out: list[int] = []
    for c in seq:
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def _inv(seq) -> tuple[int, ...]:
    return tuple(-c for c in reversed(seq))


def _from_ints(seq) -> tuple:
    """Back to a tuple of ``FactorElement`` letters (reduced)."""
    letters = []
    for c in seq:
        g, s = (abs(c) + 1) // 2, (1 if c > 0 else -1)
        letters.append(FactorElement("A" if abs(c) % 2 else "B", ((g, s),)))
    return tuple(reduce(tuple(letters)))


def reduced_words(alphabet: Sequence[int], max_len: int) -> list[tuple[int, ...]]:
    letters = sorted({c for a in alphabet for c in (a, -a)}, key=lambda c: (abs(c), c < 0))
    out = [()]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for u in frontier:
            for c in letters:
                if u and u[-1] == -c:
                    continue
                nxt.append(u + (c,))
        out += nxt
        frontier = nxt
    return out


@dataclass(frozen=True)
class EquationSolution:
    conjugators: tuple
    exponents: tuple[int, ...]

    def to_json(self, symbols=None) -> dict:
        return {"k": len(self.exponents),
                "conjugators": [word_to_json(c) for c in self.conjugators],
                "exponents": list(self.exponents)}


def search_equations(a: FactorElement, w, max_k: int, max_conj_len: int, max_exp: int,
                     budget: int = DEFAULT_BUDGET) -> list[EquationSolution]:
    """All ``a = prod_i g_i w^{n_i} g_i^-1`` within the bounds, for increasing ``k``.

    Conjugators ``g`` with ``g w^{+-1}`` shorter than ``g`` are skipped: they give
    the same conjugate as the shorter word.
    """
    target = _to_ints((a,))
    wi = _to_ints(w)
    if not wi:
        raise InputError("w must be nontrivial")
    gens = sorted({abs(c) for c in target + wi})
    conjs = reduced_words(gens, max_conj_len)
    winv = _inv(wi)
    conjs = [g for g in conjs
             if len(_free(g + wi)) >= len(g) and len(_free(g + winv)) >= len(g)]
    exps = [n for n in range(-max_exp, max_exp + 1) if n]
    branch = len(conjs) * len(exps)
    cost = sum(branch ** k for k in range(1, max_k + 1))
    if cost > budget:
        raise BudgetExceeded(f"search needs {cost} candidates, budget is {budget}")
    powers = {n: _free(wi * n if n > 0 else winv * (-n)) for n in exps}
    factors = [((g, n), _free(g + powers[n] + _inv(g))) for g in conjs for n in exps]
    tinv = _inv(target)
    sols = []
    for k in range(1, max_k + 1):
        for combo in itertools.product(factors, repeat=k):
            acc = tinv
            for _, f in combo:
                acc = _free(acc + f)
            if not acc:
                sols.append(EquationSolution(tuple(_from_ints(g) for (g, _), _ in combo),
                                             tuple(n for (_, n), _ in combo)))
    return sols
