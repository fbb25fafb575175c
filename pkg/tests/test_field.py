import pytest
from hypothesis import given, strategies as st

from ffkoopman.errors import DivisionByZero, FieldMismatch, NotPrime
from ffkoopman.field import FieldSpec, inv, inv_mod, is_prime, power

SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 101, 65537, 2**31 - 1]


def _trial(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def test_is_prime_matches_trial_division():
    for n in range(-3, 3000):
        assert is_prime(n) == _trial(n), n


@pytest.mark.parametrize("p", [0, 1, 4, 9, 91, 561, 2**31])
def test_rejects_non_primes(p):
    with pytest.raises(NotPrime):
        FieldSpec(p)


@pytest.mark.parametrize("p", SMALL_PRIMES)
@given(a=st.integers(min_value=1, max_value=2**40))
def test_inverse(p, a):
    if a % p == 0:
        return
    F = FieldSpec(p)
    assert (F(a) * inv(F(a))).value == 1
    assert a * inv_mod(a, p) % p == 1


def test_inverse_of_zero():
    with pytest.raises(DivisionByZero):
        inv(FieldSpec(5)(0))


def test_power_conventions():
    F = FieldSpec(7)
    assert power(F(0), 0).value == 1
    assert power(F(3), 6).value == 1
    assert power(F(3), -1).value == inv(F(3)).value


def test_mixing_fields_fails():
    with pytest.raises(FieldMismatch):
        FieldSpec(3)(1) + FieldSpec(5)(1)


@given(a=st.integers(0, 12), b=st.integers(0, 12), c=st.integers(0, 12))
def test_field_axioms_f13(a, b, c):
    F = FieldSpec(13)
    x, y, z = F(a), F(b), F(c)
    assert x * (y + z) == x * y + x * z
    assert (x - y) + y == x
    if b:
        assert (x / y) * y == x
