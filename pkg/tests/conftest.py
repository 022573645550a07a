from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from stacklab.plline import PLHomeo
from stacklab.words import AlternatingWord, FactorElement, reduce

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def factor_elements(factor, max_gen=2, max_len=3, nontrivial=True):
    syll = st.tuples(st.integers(1, max_gen), st.sampled_from([-2, -1, 1, 2]))
    elems = st.lists(syll, max_size=max_len).map(lambda s: FactorElement(factor, tuple(s)))
    return elems.filter(lambda e: not e.is_identity) if nontrivial else elems


@st.composite
def general_words(draw, max_letters=6):
    n = draw(st.integers(0, max_letters))
    return tuple(draw(factor_elements(draw(st.sampled_from("AB")), nontrivial=False)) for _ in range(n))


@st.composite
def cyclic_words(draw, max_pairs=3, max_len=2):
    n = draw(st.integers(1, max_pairs))
    letters = []
    for _ in range(n):
        letters.append(draw(factor_elements("A", max_len=max_len)))
        letters.append(draw(factor_elements("B", max_len=max_len)))
    return AlternatingWord(tuple(letters))


rationals = st.fractions(min_value=-10, max_value=10, max_denominator=12)


@st.composite
def pl_homeos(draw, lo=-4, hi=4, max_points=4):
    """Random PL homeomorphisms supported in [lo, hi]."""
    k = draw(st.integers(0, max_points))
    grid = st.integers(1, 59).map(lambda i: Fraction(lo) + Fraction(hi - lo) * i / 60)
    xs = sorted(set(draw(st.lists(grid, min_size=k, max_size=k))))
    ys = sorted(set(draw(st.lists(grid, min_size=len(xs), max_size=len(xs)))))
    if len(ys) != len(xs):
        ys = xs
    return PLHomeo([(Fraction(lo), Fraction(lo)), *zip(xs, ys), (Fraction(hi), Fraction(hi))])


def gen(tag, i=1, e=1):
    return FactorElement.gen(tag, i, e)


def word(*letters):
    return reduce(letters)


def random_mover(rng, lo=-4, hi=4, max_pairs=3, den=8):
    """A random make_mover-style generator built from a seeded ``random.Random``."""
    grid = [Fraction(lo) + Fraction(i, den) for i in range(1, (hi - lo) * den)]
    k = rng.randint(0, max_pairs)
    xs = sorted(rng.sample(grid, k))
    ys = sorted(rng.sample(grid, k))
    return PLHomeo([(Fraction(lo), Fraction(lo)), *zip(xs, ys), (Fraction(hi), Fraction(hi))])


def random_action(rng, rank=2):
    from stacklab.actions import FactorAction, ProductAction
    return ProductAction(FactorAction("A", {g: random_mover(rng) for g in range(1, rank + 1)}),
                         FactorAction("B", {g: random_mover(rng) for g in range(1, rank + 1)}))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
