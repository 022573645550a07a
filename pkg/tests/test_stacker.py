import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gen, general_words, random_action, word
from stacklab.actions import act_point, check_stability, eval_word, verify_certificate
from stacklab.errors import (BadPattern, CapacityExceeded, EqualElements, InputError, NotCyclicallyReduced,
                             ProperPower, SystemMismatch)
from stacklab.plline import Interval, image
from stacklab.stacker import (EquationSystem, StackerConfig, SystemSolution, arrange, arrangement_pattern,
                              build_catenation, build_stacking, combine_systems, conjugate_system,
                              leftward_transport, localize, move_point, plan_transport, rightward_transport,
                              separated_pair, solve_simple, solves, stacking_systems, transfer_solution)
from stacklab.words import AlternatingWord, inverse_word, reduce

a, b = gen("A"), gen("B")
a1, b1, a2, b2 = gen("A", 1), gen("B", 1), gen("A", 2), gen("B", 2)
AB = word(a, b)
W4 = word(a1, b1, a2, b2)


def interval_ok(act, w, w1, iv):
    """I.w inside I and I.w1 disjoint from I, by exact endpoint images."""
    img = image(eval_word(act, w), iv)
    img1 = image(eval_word(act, w1), iv)
    return iv.lo <= img.lo and img.hi <= iv.hi and (img1.lo > iv.hi or img1.hi < iv.lo)


class TestCatenation:
    def test_alternating(self):
        cat = build_catenation(["I", "J", "I", "J"])
        assert [(blk.lo, blk.hi) for blk in cat.blocks] == [(0, 2), (1, 3), (2, 4), (3, 5)]

    def test_five_block_layout(self):
        cat = build_catenation(["I1", "J1", "K", "J1'", "I1'"])
        assert [(blk.lo, blk.hi) for blk in cat.blocks] == [(0, 2), (1, 3), (2, 4), (3, 5), (4, 6)]

    def test_single(self):
        assert build_catenation(["I"]).blocks[0] == Interval.open(0, 2)

    def test_origin(self):
        assert build_catenation(["J", "I"], origin=5).block("I") == Interval.open(6, 8)

    def test_overlap_conditions(self):
        cat = build_catenation(arrangement_pattern(2, 2))
        for u, v in zip(cat.blocks, cat.blocks[1:]):
            assert v.lo == u.midpoint and u.hi == v.midpoint and u.length == 2
        for u, v in zip(cat.blocks, cat.blocks[2:]):
            assert u.hi == v.lo

    def test_bad_patterns(self):
        for pat in [[], ["I", "I"], ["I", "Q"], ["J", "M"]]:
            with pytest.raises(BadPattern):
                build_catenation(pat)

    def test_arrangement_pattern(self):
        assert arrangement_pattern(1, 1) == ["I1", "J1", "L1", "J1'", "I1'"]
        assert arrangement_pattern(2, 2) == ["I1", "J1", "I2", "J2", "L1", "M1", "L2", "J2'", "I2'", "J1'", "I1'"]


class TestMovePoint:
    @given(st.sampled_from("AB"), st.data())
    def test_moves(self, tag, data):
        from conftest import factor_elements
        e = data.draw(factor_elements(tag, max_len=4))
        p, q = data.draw(st.tuples(*[st.fractions(F(1, 10), F(39, 10), max_denominator=10)] * 2))
        fa = move_point(e, Interval(0, 4), p, q)
        act = random_action(random.Random(0))
        act = type(act)(**{tag: fa})
        assert act_point(act, p, (e,)) == q
        assert fa.hull() is None or (0 <= fa.hull()[0] and fa.hull()[1] <= 4)


class TestTransport:
    def test_one_pair(self):
        cat = build_catenation(["I1", "J1"])
        gap = Interval(F(11, 4), 3)
        t = rightward_transport([a, b], cat, 1, gap)
        mid = act_point(t.actions, F(1), (a,))
        assert 1 < mid < 3
        assert act_point(t.actions, F(1), AB) == t.end and t.end in gap

    def test_empty(self):
        cat = build_catenation(["I"])
        assert rightward_transport((), cat, F(1, 2), Interval(0, 1)).end == F(1, 2)
        assert leftward_transport((), cat, F(1, 2), Interval(0, 1)).end == F(1, 2)

    def test_capacity(self):
        with pytest.raises(CapacityExceeded):
            plan_transport([a, b, a], build_catenation(["I", "J"]).blocks, 1, 3, +1)

    def test_half_offset_legs(self):
        # with eps = 1/2 the witness interval for w = ab, w1 = a is [5/2, 7/2]
        arr = arrange(AB, word(a), StackerConfig(z_offset=F(1, 2)))
        act = arr.solution.action
        assert arr.plan.case == 1
        assert arr.interval == Interval(F(5, 2), F(7, 2))
        p = act_point(act, F(1), (a,))
        assert p > F(3, 2) and act_point(act, p, (b,)) > F(5, 2)
        q = act_point(act, F(5), (a,))
        assert q < F(9, 2) and act_point(act, q, (b,)) < F(7, 2)
        assert interval_ok(act, AB, word(a), arr.interval)

    def test_leftward_mirror(self):
        cat = build_catenation(["I1", "J1"])
        t = leftward_transport([a, b], cat, 2, Interval(0, F(1, 4)))
        assert act_point(t.actions, F(2), AB) == t.end == F(1, 8)


class TestSeparatedPair:
    def check(self, f, g, x=F(1), y=F(2)):
        fa = separated_pair(Interval(0, 3), f, g, x, y)
        act = random_action(random.Random(0))
        act = type(act)(**{f.factor: fa})
        assert act_point(act, y, (g,)) < act_point(act, x, (f,))
        assert 0 <= fa.hull()[0] and fa.hull()[1] <= 3

    def test_square(self):
        self.check(gen("A", 1), gen("A", 1, 2))

    def test_distinct_generators(self):
        self.check(gen("B", 1), gen("B", 2))

    def test_inverse_pair(self):
        self.check(gen("A", 1, -1), gen("A", 1))

    def test_equal(self):
        with pytest.raises(EqualElements):
            separated_pair(Interval(0, 3), a, a, 1, 2)

    def test_order(self):
        with pytest.raises(InputError):
            separated_pair(Interval(0, 3), a, gen("A", 2), 2, 1)


class TestSolveSimple:
    def test_case2_direct(self):
        w1 = word(a1, b1)
        arr = arrange(W4, w1)
        assert arr.plan.case == 2 and not arr.plan.rotations
        sol = arr.solution
        assert solves(EquationSystem((W4,), (w1,)), sol)
        assert interval_ok(sol.action, W4, w1, arr.interval) and sol.point in arr.interval

    def test_rotation_loop(self):
        w = word(a1, b1, a2, b1)
        arr = arrange(w, word(a1, b1))
        assert arr.plan.rotations
        assert solves(EquationSystem((w,), (word(a1, b1),)), arr.solution)

    def test_proper_power(self):
        with pytest.raises(ProperPower):
            solve_simple(AlternatingWord((a, b) * 2), word(a, b))

    def test_not_a_prefix(self):
        with pytest.raises(InputError):
            solve_simple(AB, word(b))

    @pytest.mark.parametrize("letters", [(a, b), (a, b, a, b.inverse()), (a1, b1, a2, b2), (a, b, a, gen("B", 1, 2))])
    def test_every_prefix(self, letters):
        w = AlternatingWord(letters)
        for i in range(1, len(w)):
            w1 = w[:i]
            sol, iv = solve_simple(w, w1)
            assert solves(EquationSystem((w,), (w1,)), sol)
            assert interval_ok(sol.action, w, w1, iv)

    def test_b_first_word(self):
        w = word(b, a, b, a.inverse())
        sol, iv = solve_simple(w, word(b))
        assert solves(EquationSystem((w,), (word(b),)), sol)


class TestSystems:
    SYS = EquationSystem((W4,), (reduce((a1, b1, a2, b1.inverse(), a1.inverse())),))

    def test_identity_conjugation(self):
        assert conjugate_system(self.SYS, ()) == self.SYS

    def test_prefix_conjugation(self):
        w1, w2 = word(a1), word(b1, a2)
        sys = EquationSystem((W4,), (reduce(tuple(w1) + tuple(w2) + inverse_word(w1)),))
        conj = conjugate_system(sys, w1)
        assert conj.equations == (reduce(inverse_word(w1) + tuple(W4) + tuple(w1)),)
        assert conj.inequations == (w2,)

    @given(general_words(max_letters=3))
    def test_double_conjugation(self, h):
        assert conjugate_system(conjugate_system(self.SYS, h), inverse_word(h)) == self.SYS

    def test_empty_system(self):
        with pytest.raises(InputError):
            EquationSystem()

    def test_transfer_identity(self):
        sol = SystemSolution(random_action(random.Random(1)), F(1, 3))
        assert transfer_solution(sol, ()) == sol

    def test_transfer_roundtrip(self):
        (w1, w2), sys = stacking_systems(W4)[0]
        conj = conjugate_system(sys, w1)
        sol, _ = solve_simple(conj.equations[0], conj.inequations[0])
        assert solves(conj, sol)
        back = transfer_solution(sol, inverse_word(w1))
        assert solves(sys, back)
        assert transfer_solution(back, w1) == sol

    @settings(max_examples=40)
    @given(general_words(max_letters=3))
    def test_transfer_random(self, h):
        sys = EquationSystem((W4,), (word(a1, b1),))
        sol, _ = solve_simple(W4, word(a1, b1))
        assert solves(conjugate_system(sys, h), transfer_solution(sol, h))


class TestCombine:
    def solved(self, w):
        out = []
        for (w1, _), sys in stacking_systems(w):
            conj = conjugate_system(sys, w1)
            sol, _ = solve_simple(conj.equations[0], conj.inequations[0])
            out.append((sys, transfer_solution(sol, inverse_word(w1))))
        return out

    def test_single(self):
        pair = self.solved(AB)
        assert combine_systems(pair) == pair[0][1]

    def test_two_prefix_conjugates(self):
        pairs = self.solved(W4)[:2]
        merged = combine_systems(pairs)
        union = EquationSystem((W4,), tuple(s.inequations[0] for s, _ in pairs))
        assert solves(union, merged)

    def test_all_pairs(self):
        pairs = self.solved(W4)
        merged = combine_systems(pairs)
        for s, _ in pairs:
            assert solves(s, merged)

    def test_mismatch(self):
        p1, p2 = self.solved(AB)[0], self.solved(W4)[0]
        with pytest.raises(SystemMismatch):
            combine_systems([p1, p2])

    def test_localize_keeps_truth(self):
        sys, sol = self.solved(W4)[0]
        loc = localize(sol, sys.words())
        assert solves(sys, loc.solution) and loc.radius > 0
        # the word acts as the identity near the point
        h = eval_word(loc.solution.action, W4)
        x = sol.point
        assert h(x + loc.radius / 2) == x + loc.radius / 2


class TestBuildStacking:
    def test_ab(self):
        cert = build_stacking(AB)
        assert verify_certificate(cert).ok
        x = cert.base
        assert cert.lam[1] == act_point(cert.action, x, (a,)) and cert.lam[2] == x
        assert len(set(cert.lam.values())) == 2

    def test_proper_power(self):
        with pytest.raises(ProperPower, match=r"proper power"):
            build_stacking(AlternatingWord((a, b) * 2))

    def test_aba_binv(self):
        w = word(a, b, a, b.inverse())
        cert = build_stacking(w)
        assert verify_certificate(cert).ok and len(set(cert.lam.values())) == 4

    def test_not_cyclically_reduced(self):
        with pytest.raises(NotCyclicallyReduced):
            build_stacking(word(b, a))

    def test_config(self):
        cfg = StackerConfig.from_dict({"z_offset": "1/8", "retries": 2, "seed": 5, "unknown": 1})
        assert cfg.z_offset == F(1, 8) and cfg.rng_seed() == 5
        assert verify_certificate(build_stacking(W4, cfg)).ok
        with pytest.raises(InputError):
            StackerConfig(z_offset=2)

    def test_deterministic(self):
        assert build_stacking(W4).to_json() == build_stacking(W4).to_json()

    @settings(max_examples=15)
    @given(st.lists(st.tuples(st.integers(1, 2), st.sampled_from([-1, 1]),
                              st.integers(1, 2), st.sampled_from([-1, 1])), min_size=1, max_size=3))
    def test_random_words_verify(self, pairs):
        letters = []
        for ga, ea, gb, eb in pairs:
            letters += [gen("A", ga, ea), gen("B", gb, eb)]
        w = AlternatingWord(tuple(letters))
        from stacklab.words import is_proper_power
        if is_proper_power(w):
            with pytest.raises(ProperPower):
                build_stacking(w)
        else:
            cert = build_stacking(w)
            assert check_stability(cert.action, w, cert.base).stable
