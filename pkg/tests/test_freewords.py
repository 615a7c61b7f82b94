#!/usr/bin/env python

import numpy as np
import pytest

from torsiongrowth.core.freewords import (GroupRingElement,
                                          PermutationHomomorphism, PowerWord,
                                          Word, fox_derivative, free_reduce,
                                          magnus_image, magnus_vector, walk)


# C2 = <x> with y acting trivially, and C4 = <y> with x trivial
C2 = PermutationHomomorphism([1, 0], [0, 1])
C4 = PermutationHomomorphism([0, 1, 2, 3], [1, 2, 3, 0])
# Klein four group
V4 = PermutationHomomorphism([1, 0, 3, 2], [2, 3, 0, 1])


def test_free_reduce():
    assert free_reduce([1, 2, -2, -1, 2]) == (2,)
    assert Word((1, -1)).is_identity()

def test_parse():
    assert str(Word.parse("xyXY")) == "xyXY"
    assert Word.parse("x^3") == Word((1, 1, 1))
    assert Word.parse("(xY)^-2") == Word((2, -1, 2, -1))
    assert Word.parse("x * y") == Word((1, 2))
    assert Word.parse("1").is_identity()
    assert str(Word()) == "1"

@pytest.mark.parametrize("text", ["xz", "(xy", "x^", "xy)"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        Word.parse(text)

def test_word_group_operations():
    w = Word.parse("xyX")

    assert (w * w.inverse()).is_identity()
    assert w ** 2 == Word.parse("xyyX")
    assert w ** -1 == w.inverse()
    assert w.exponent_sum('x') == 0
    assert w.exponent_sum('y') == 1
    assert len(w) == 3
    with pytest.raises(ValueError):
        Word.generator('z')

def test_power_word_merges():
    x = Word.parse("x")
    w = PowerWord.power(x, 3) * PowerWord.power(x, 5)

    assert w.factors == ((x, 8),)
    assert (w * w.inverse()).is_identity()
    assert PowerWord.power(x, 2) * PowerWord.power(x.inverse(), 2) \
        == PowerWord()

def test_power_word_cascade():
    x, y = Word.parse("x"), Word.parse("y")
    w = PowerWord(((x, 2), (y, 1), (y, -1), (x, -2)))

    assert w.is_identity()

def test_power_word_expand():
    w = PowerWord.power(Word.parse("xy"), 2) * Word.parse("Y")

    assert w.expand() == Word.parse("xyx")
    assert w.expanded_length() == 5
    with pytest.raises(ValueError):
        PowerWord.power(Word.parse("x"), 2 ** 20).expand()

def test_power_word_json():
    w = PowerWord.power(Word.parse("xY"), 2 ** 40)

    assert w.to_json() == [["xY", 2 ** 40]]
    assert PowerWord.from_json(w.to_json()) == w
    assert str(w) == f"(xY)^{2 ** 40}"

def test_walk_uses_cycles():
    edges = list()
    end = walk(C2.act, 0, PowerWord.power(Word.parse("x"), 10 ** 9),
               lambda c, letter, d, weight: edges.append((c, weight)))

    assert end == 0
    assert sorted(edges) == [(0, 5 * 10 ** 8), (1, 5 * 10 ** 8)]

def test_walk_matches_expansion():
    w = PowerWord.power(Word.parse("xy"), 7)

    assert walk(V4.act, 0, w) == walk(V4.act, 0, w.expand())

def test_homomorphism():
    assert C4.order == 4
    assert C4.image(Word.parse("y^5")) == C4.image(Word.parse("y"))
    assert C4.in_kernel(Word.parse("y^4x"))
    assert C4.element_order(C4.image(Word.parse("y"))) == 4
    for a in range(4):
        assert C4.mul(a, C4.inverse(a)) == 0
        assert C4.image(C4.words[a]) == a

def test_homomorphism_rejects_non_regular():
    with pytest.raises(ValueError):
        PermutationHomomorphism([1, 0, 2], [0, 1, 2])
    with pytest.raises(ValueError):
        PermutationHomomorphism([0, 1], [0, 1, 2])

def test_group_ring():
    a = GroupRingElement.from_dict({0: 1, 1: 2})
    b = GroupRingElement.unit(1)

    assert (a - a).is_zero()
    assert a.augmentation() == 3
    assert a.multiply(b, C2) == GroupRingElement.from_dict({1: 1, 0: 2})
    assert a.to_vector(2) == [1, 2]
    assert a.scale(2).coefficient(1) == 4

def test_fox_derivative_power():
    # d(x^4)/dx = 1 + x + x^2 + x^3
    d = fox_derivative(PowerWord.power(Word.parse("x"), 4), 'x', C2)

    assert d == GroupRingElement.from_dict({0: 2, 1: 2})
    assert fox_derivative(Word.parse("x^4"), 'x', C2) == d

def test_fox_derivative_inverse():
    d = fox_derivative(Word.parse("X"), 'x', C2)

    assert d == GroupRingElement.from_dict({1: -1})

def test_magnus_vector():
    assert magnus_vector(Word.parse("xyXY"), C2) == (0, 0, -1, 1)
    with pytest.raises(ValueError):
        magnus_vector(Word.parse("x"), C2)

@pytest.mark.parametrize("text", ["xyXY", "x^2", "yxyXXYxY", "(xy)^2y^2"])
def test_fundamental_formula(text):
    # dw/dx·(x - 1) + dw/dy·(y - 1) = 0 for w in the kernel
    w = Word.parse(text)
    assert V4.in_kernel(w)

    dx, dy = magnus_image(w, V4)
    x = GroupRingElement.unit(V4.image(Word.parse("x")))
    y = GroupRingElement.unit(V4.image(Word.parse("y")))
    one = GroupRingElement.unit()
    total = dx.multiply(x - one, V4) + dy.multiply(y - one, V4)

    assert total.is_zero()

def test_magnus_is_additive():
    u, v = Word.parse("x^2"), Word.parse("yxyX")
    a, b = magnus_vector(u, V4), magnus_vector(v, V4)

    assert magnus_vector(u * v, V4) == tuple(s + t for s, t in zip(a, b))

def random_word(rng, max_length):
    n = int(rng.integers(0, max_length + 1))

    return tuple(int(a) for a in rng.choice([1, -1, 2, -2], size=n))

def cancel_randomly(letters, rng):
    letters = list(letters)
    while True:
        pairs = [i for i in range(len(letters) - 1)
                 if letters[i] == -letters[i + 1]]
        if len(pairs) <= 0:
            return tuple(letters)
        i = pairs[int(rng.integers(len(pairs)))]
        del letters[i:i + 2]

def test_free_reduction_is_confluent():
    rng = np.random.default_rng(7)
    for _ in range(200):
        letters = random_word(rng, 16)

        assert cancel_randomly(letters, rng) == free_reduce(letters)
        assert free_reduce(free_reduce(letters) + letters[::-1]) \
            == free_reduce(letters + letters[::-1])

def test_fox_derivative_augmentation():
    rng = np.random.default_rng(11)
    for _ in range(100):
        w = Word(random_word(rng, 12))
        for g in ('x', 'y'):
            assert fox_derivative(w, g, V4).augmentation() \
                == w.exponent_sum(g)

def test_fox_power_rule_matches_expansion():
    rng = np.random.default_rng(13)
    for _ in range(100):
        factors = tuple((Word(random_word(rng, 5)), int(rng.integers(-6, 7)))
                        for _ in range(int(rng.integers(1, 4))))
        w = PowerWord(factors)
        expanded = Word()
        for base, e in factors:
            expanded = expanded * base ** e

        assert w.expand() == expanded
        for g in ('x', 'y'):
            assert fox_derivative(w, g, C4) \
                == fox_derivative(expanded, g, C4)
            assert fox_derivative(w, g, V4) \
                == fox_derivative(expanded, g, V4)
