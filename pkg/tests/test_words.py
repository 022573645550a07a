import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_power, flatten, free_reduce, same_element
from conftest import cyclic_words, gen, general_words, word
from stacklab.errors import FactorConjugate, InputError
from stacklab.words import (AlternatingWord, FactorElement, SymbolTable, cyclic_reduce, format_inline,
                            inverse_word, is_proper_power, parse_inline, parse_word, prefix_pairs, prefixes,
                            reduce, swap_factors, word_from_json, word_to_json)

x, y = gen("A"), gen("B")


class TestFactorElement:
    def test_free_reduction_on_construction(self):
        e = FactorElement("A", ((1, 2), (1, -2), (2, 1)))
        assert e.syllables == ((2, 1),)

    def test_identity(self):
        assert FactorElement("B").is_identity
        assert (x * x.inverse()).is_identity

    def test_bad_tag_and_index(self):
        with pytest.raises(InputError):
            FactorElement("C", ((1, 1),))
        with pytest.raises(InputError):
            FactorElement("A", ((0, 1),))

    def test_mixed_factor_product_rejected(self):
        with pytest.raises(InputError):
            x * y

    def test_steps(self):
        e = FactorElement("A", ((1, 2), (2, -1)))
        assert e.steps() == [(1, 1), (1, 1), (2, -1)]
        assert len(e) == 3


class TestReduce:
    def test_inverse_cancellation(self):
        assert reduce((x, x.inverse())).is_identity

    def test_forced_cancellation_then_merge(self):
        assert reduce((x, y, y.inverse(), x)) == AlternatingWord((gen("A", 1, 2),))

    def test_already_reduced(self):
        assert reduce((x, y)).letters == (x, y)

    @given(general_words())
    def test_idempotent(self, w):
        r = reduce(w)
        assert reduce(r) == r

    @given(general_words())
    def test_matches_free_group_oracle(self, w):
        assert free_reduce(flatten(reduce(w))) == free_reduce(flatten(w))

    @given(general_words())
    def test_normal_form_alternates(self, w):
        r = reduce(w)
        assert all(l.factor != m.factor for l, m in zip(r, r[1:]))
        assert all(not l.is_identity for l in r)


class TestCyclicReduce:
    def test_conjugate_of_a_letter(self):
        with pytest.raises(FactorConjugate) as err:
            cyclic_reduce(word(y.inverse(), x, y))
        assert err.value.element == x

    def test_rotation_to_a_first(self):
        core, conj = cyclic_reduce(word(y, x))
        assert core.letters == (x, y)
        assert same_element(conj.letters + core.letters + inverse_word(conj), (y, x))

    def test_already_in_convention(self):
        w = word(x, y, x, y.inverse())
        core, conj = cyclic_reduce(w)
        assert core == w and conj.is_identity

    def test_identity_is_factor_conjugate(self):
        with pytest.raises(FactorConjugate):
            cyclic_reduce(())

    @given(general_words(max_letters=8))
    def test_conjugator_identity(self, w):
        try:
            core, c = cyclic_reduce(w)
        except FactorConjugate as err:
            elem, c = err.element, err.conjugator
            assert same_element(tuple(c) + (elem,) + inverse_word(c), w)
            return
        assert core.is_cyclically_reduced
        assert same_element(tuple(c) + tuple(core) + inverse_word(c), w)


class TestProperPower:
    def test_cube(self):
        w = AlternatingWord((x, y) * 3)
        root, k = is_proper_power(w)
        assert root.letters == (x, y) and k == 3

    def test_not_a_power(self):
        assert is_proper_power(word(x, y, x, gen("B", 1, 2))) is None

    def test_length_two(self):
        assert is_proper_power(word(x, y)) is None

    @given(cyclic_words(), st.integers(2, 3))
    def test_powers_detected_with_primitive_root(self, u, k):
        res = is_proper_power(u ** k)
        assert res is not None
        root, kk = res
        assert root ** kk == u ** k
        assert is_proper_power(root) is None

    @given(cyclic_words(max_pairs=4, max_len=1))
    def test_matches_brute_force(self, w):
        expect = brute_power(w.letters)
        got = is_proper_power(w)
        if expect is None:
            assert got is None
        else:
            assert got is not None and got[0].letters == expect[0] and got[1] == expect[1]


class TestPrefixes:
    def test_ab(self):
        assert [p.letters for _, p in prefixes(word(x, y))] == [(x,), (x, y)]

    def test_counts(self):
        w4 = word(x, y, gen("A", 2), gen("B", 2))
        assert len(prefixes(w4)) == 4
        assert len(prefixes(AlternatingWord((x, y) * 3))) == 6
        assert len(prefix_pairs(w4)) == 6

    def test_ab_pairs(self):
        pairs = prefix_pairs(word(x, y))
        assert [(a.letters, b.letters) for a, b in pairs] == [((x,), (y,))]

    @given(cyclic_words(max_pairs=4))
    def test_pair_count_and_order(self, w):
        pairs = prefix_pairs(w)
        n = len(w)
        assert len(pairs) == n * (n - 1) // 2
        keys = [(len(a), len(b)) for a, b in pairs]
        assert keys == sorted(keys)
        for a, b in pairs:
            assert (tuple(a) + tuple(b)) == w.letters[:len(a) + len(b)]


class TestSerialization:
    @given(cyclic_words())
    def test_json_roundtrip(self, w):
        data = json.loads(json.dumps(word_to_json(w)))
        assert word_from_json(data) == w

    def test_json_layout(self):
        data = word_to_json(word(x, gen("B", 1, -2)))
        assert data == {"factors": {"A": 1, "B": 1}, "syllables": [["A", [[1, 1]]], ["B", [[1, -2]]]]}

    def test_rank_check(self):
        with pytest.raises(InputError):
            word_from_json({"factors": {"A": 1, "B": 1}, "syllables": [["A", [[2, 1]]]]})

    def test_inline(self):
        letters, syms = parse_inline("A:x B:y^-1 A:x^2*z")
        assert letters[2] == FactorElement("A", ((1, 2), (2, 1)))
        assert format_inline(letters, syms) == "A:x B:y^-1 A:x^2*z"

    def test_inline_identity(self):
        assert parse_inline("1")[0] == ()

    def test_inline_errors(self):
        for bad in ["C:x", "A:", "A:x^", "x"]:
            with pytest.raises(InputError):
                parse_inline(bad)

    def test_parse_word_accepts_json(self):
        text = json.dumps(word_to_json(word(x, y)))
        assert reduce(parse_word(text)[0]) == word(x, y)

    def test_symbol_table_shared(self):
        syms = SymbolTable()
        parse_inline("A:x B:y", syms)
        letters, _ = parse_inline("A:z A:x", syms)
        assert [l.syllables[0][0] for l in letters] == [2, 1]


def test_swap_factors_is_involution():
    w = word(x, y, gen("A", 2))
    assert swap_factors(swap_factors(w)) == w
    assert swap_factors(w)[0].factor == "B"
