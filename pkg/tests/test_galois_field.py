import itertools

import pytest

from common.exceptions import BadRangeError, DivisionByZeroError, InputError, NotPrimePowerError
from percolator.core.galois_field import Field, find_modulus, is_prime_power, make_field

SMALL_ORDERS = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16]
LARGE_ORDERS = [25, 27, 32, 49, 64]


@pytest.mark.parametrize("q", SMALL_ORDERS + LARGE_ORDERS)
def test_pairwise_axioms(q):
    gf = make_field(q)
    assert gf.q == q
    for a in gf.elements():
        assert gf.add(a, 0) == a
        assert gf.mul(a, 1) == a
        assert gf.mul(a, 0) == 0
        assert gf.add(a, gf.neg(a)) == 0
        if a:
            assert gf.mul(a, gf.inv(a)) == 1
        for b in gf.elements():
            assert gf.add(a, b) == gf.add(b, a)
            assert gf.mul(a, b) == gf.mul(b, a)
            assert gf.sub(gf.add(a, b), b) == a
            if b:
                assert gf.mul(gf.div(a, b), b) == a


@pytest.mark.parametrize("q", SMALL_ORDERS)
def test_associativity_and_distributivity(q):
    gf = make_field(q)
    for a, b, c in itertools.product(gf.elements(), repeat=3):
        assert gf.add(gf.add(a, b), c) == gf.add(a, gf.add(b, c))
        assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))
        assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))


@pytest.mark.slow
@pytest.mark.parametrize("q", LARGE_ORDERS)
def test_associativity_and_distributivity_large(q):
    gf = make_field(q)
    for a, b, c in itertools.product(gf.elements(), repeat=3):
        assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))
        assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))


def test_gf4_encoding():
    gf = make_field(4)
    # 2 = x, 3 = x + 1, modulus x^2 + x + 1
    assert gf.modulus == (1, 1, 1)
    assert gf.mul(2, 2) == 3
    assert gf.mul(2, 3) == 1
    assert gf.add(2, 3) == 1


def test_modulus_selection():
    assert find_modulus(7, 1) == (0, 1)
    assert find_modulus(2, 2) == (1, 1, 1)
    assert find_modulus(3, 2) == (1, 0, 1)


def test_multiplicative_group_is_cyclic():
    gf = make_field(9)
    orders = []
    for a in range(1, 9):
        k = 1
        while gf.pow(a, k) != 1:
            k += 1
        orders.append(k)
    assert max(orders) == 8


def test_pow_and_negative_exponents():
    gf = make_field(13)
    assert gf.pow(0, 0) == 1
    assert gf.pow(2, 12) == 1
    assert gf.pow(5, -1) == gf.inv(5)
    assert gf.mul(gf.pow(3, -2), gf.pow(3, 2)) == 1


@pytest.mark.parametrize("q", [4, 8, 9, 27])
def test_frobenius_is_an_automorphism_fixing_the_prime_field(q):
    gf = make_field(q)
    for a, b in itertools.product(gf.elements(), repeat=2):
        assert gf.frobenius(gf.add(a, b)) == gf.add(gf.frobenius(a), gf.frobenius(b))
        assert gf.frobenius(gf.mul(a, b)) == gf.mul(gf.frobenius(a), gf.frobenius(b))
    fixed = [a for a in gf.elements() if gf.frobenius(a) == a]
    assert len(fixed) == gf.p


def test_untabled_field_computes_directly():
    gf = make_field(343)
    assert gf.q > 256
    for a in (1, 2, 50, 100, 342):
        assert gf.mul(a, gf.inv(a)) == 1
        assert gf.add(a, gf.neg(a)) == 0


@pytest.mark.parametrize("q", [0, 1, 6, 10, 12, 100])
def test_not_a_prime_power(q):
    with pytest.raises(NotPrimePowerError):
        make_field(q)
    assert not is_prime_power(q)


def test_prime_powers_recognized():
    assert all(is_prime_power(q) for q in (2, 4, 8, 9, 25, 101, 128))


def test_inverse_of_zero():
    gf = make_field(5)
    with pytest.raises(DivisionByZeroError) as excinfo:
        gf.inv(0)
    assert isinstance(excinfo.value, ZeroDivisionError)
    assert isinstance(excinfo.value, InputError)
    with pytest.raises(DivisionByZeroError):
        gf.div(3, 0)


def test_elements_out_of_range():
    gf = make_field(5)
    with pytest.raises(BadRangeError):
        gf.add(5, 1)
    with pytest.raises(BadRangeError):
        gf.mul(-1, 2)


def test_non_monic_modulus_rejected():
    with pytest.raises(BadRangeError):
        Field(p=2, k=2, modulus=(1, 1, 0))
