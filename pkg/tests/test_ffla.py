import itertools
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ffkoopman.errors import ConstantTermZero, DimensionMismatch
from ffkoopman.ffla import (
    ElementaryDivisor,
    MatrixFp,
    UniPoly,
    characteristic_polynomial,
    divisors_to_invariant_factors,
    elementary_divisors,
    enumerate_span,
    factor_univariate,
    format_factored,
    inverse,
    invariant_factors,
    is_irreducible,
    kernel,
    matrix_power,
    minimal_polynomial,
    mod_matmul,
    poly_eval_matrix,
    poly_gcd,
    poly_order,
    rank,
    rref_solve,
)


def rand_matrix(rng, rows, cols, p, density=1.0):
    return MatrixFp([[rng.randrange(p) if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)], p)


def sympy_charpoly(A: MatrixFp) -> UniPoly:
    # Independent oracle: integer characteristic polynomial reduced mod p.
    coeffs = sympy.Matrix(A.tolist()).charpoly().all_coeffs()
    return UniPoly([int(c) % A.p for c in reversed(coeffs)], A.p)


def monic_polys(p, d):
    for tail in itertools.product(range(p), repeat=d):
        yield UniPoly(list(tail) + [1], p)


def brute_irreducible(f):
    d = f.degree
    return d >= 1 and not any(g.divides(f) for k in range(1, d // 2 + 1) for g in monic_polys(f.p, k))


# ------------------------------------------------------------------ matrices


@pytest.mark.parametrize("p", [2, 3, 7, 65521, 2**31 - 1])
def test_mod_matmul_exact(p):
    rng = np.random.default_rng(p % 1000)
    a = rng.integers(0, p, size=(7, 40), dtype=np.int64)
    b = rng.integers(0, p, size=(40, 5), dtype=np.int64)
    expect = (a.astype(object) @ b.astype(object)) % p
    assert (mod_matmul(a, b, p) == expect.astype(np.int64)).all()


@pytest.mark.parametrize("seed", range(20))
def test_rank_kernel_inverse(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5, 7])
    r, c = rng.randint(1, 7), rng.randint(1, 7)
    A = rand_matrix(rng, r, c, p, density=0.5)
    K = kernel(A)
    assert K.shape[0] == c - rank(A)
    assert not mod_matmul(A.a, K.T, p).any()
    if r == c and rank(A) == r:
        assert inverse(A) @ A == MatrixFp.identity(r, p)


@pytest.mark.parametrize("seed", range(20))
def test_rref_solve(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    A = rand_matrix(rng, rng.randint(1, 6), rng.randint(1, 6), p, density=0.6)
    x = np.array([rng.randrange(p) for _ in range(A.cols)])
    b = A @ x
    sol = rref_solve(A, b)
    assert sol.consistent
    assert ((A @ sol.particular) == b).all()
    # every vector with A v = b appears in the enumerated coset
    coset = {tuple(v) for v in enumerate_span(sol.kernel, p, offset=sol.particular)}
    assert tuple(int(v) for v in x) in coset
    assert len(coset) == p ** sol.kernel.shape[0]


def test_inconsistent_system():
    A = MatrixFp([[1, 1], [1, 1]], 2)
    assert not rref_solve(A, [0, 1]).consistent


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        MatrixFp([[1, 2]], 3) @ MatrixFp([[1, 2]], 3)
    with pytest.raises(DimensionMismatch):
        minimal_polynomial(MatrixFp([[1, 2]], 3))


def test_matrix_power():
    A = MatrixFp([[2, 1], [1, 1]], 3)
    assert matrix_power(A, 4) == MatrixFp.identity(2, 3)
    assert matrix_power(A, 2) != MatrixFp.identity(2, 3)
    assert matrix_power(A, 0) == MatrixFp.identity(2, 3)


# ------------------------------------------------------------------ polynomials


@st.composite
def unipolys(draw, p=5, max_deg=8):
    return UniPoly(draw(st.lists(st.integers(0, p - 1), max_size=max_deg + 1)), p)


@settings(max_examples=200)
@given(unipolys(), unipolys())
def test_division_identity(a, b):
    if b.is_zero():
        return
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.is_zero() or r.degree < b.degree


@settings(max_examples=100)
@given(unipolys(), unipolys())
def test_gcd_divides(a, b):
    if a.is_zero() and b.is_zero():
        return
    g = poly_gcd(a, b)
    assert g.divides(a) and g.divides(b)


def test_string_forms():
    p = UniPoly([2, 0, 0, 0, 1], 3)
    assert str(p) == "x^4 + 2"
    f = UniPoly([1, 1, 1, 1, 1], 2)
    x = UniPoly.x(2)
    assert format_factored([(x, 4), (x + 1, 2), (f, 2)]) == "x^4 (x+1)^2 (x^4+x^3+x^2+x+1)^2"


@pytest.mark.parametrize("p,d", [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 1), (3, 2), (3, 3), (5, 2)])
def test_irreducibility_exhaustive(p, d):
    for f in monic_polys(p, d):
        assert is_irreducible(f) == brute_irreducible(f), f


@pytest.mark.parametrize("seed", range(30))
def test_factorization_recombines(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5, 7])
    f = UniPoly.const(1, p)
    for _ in range(rng.randint(1, 4)):
        g = UniPoly([rng.randrange(p) for _ in range(rng.randint(1, 4))] + [1], p)
        f = f * g ** rng.randint(1, 3)
    factors = factor_univariate(f, seed=seed)
    prod = UniPoly.const(1, p)
    for g, m in factors:
        assert is_irreducible(g) and g.lead == 1
        prod = prod * g**m
    assert prod == f.monic()


def test_factor_with_pth_powers():
    x = UniPoly.x(3)
    f = (x**3 + 1) ** 3 * (x**2 + 1)
    assert factor_univariate(f) == [(x + 1, 9), (x**2 + 1, 1)]


@pytest.mark.parametrize("p,d", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2)])
def test_poly_order_brute_force(p, d):
    x = UniPoly.x(p)
    for f in monic_polys(p, d):
        if f.coeffs[0] == 0 or not is_irreducible(f):
            continue
        e = next(e for e in range(1, p**d) if f.divides(x**e - 1))
        assert poly_order(f) == e


def test_poly_order_examples():
    assert poly_order(UniPoly([1, 1, 1, 1, 1], 2)) == 5
    assert poly_order(UniPoly([1, 0, 1], 3)) == 4
    with pytest.raises(ConstantTermZero):
        poly_order(UniPoly([0, 1], 2))


# ------------------------------------------------------------------ matrix invariants


@pytest.mark.parametrize("seed", range(40))
def test_invariants_against_sympy(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    n = rng.randint(1, 6)
    A = rand_matrix(rng, n, n, p, density=rng.choice([0.3, 0.7]))
    chi = sympy_charpoly(A)
    assert characteristic_polynomial(A) == chi
    mp = minimal_polynomial(A)
    assert poly_eval_matrix(mp, A).is_zero()
    assert mp.divides(chi)
    # no proper divisor of mp annihilates A
    for g, _ in factor_univariate(mp):
        assert not poly_eval_matrix(mp // g, A).is_zero()
    inv_f = invariant_factors(A)
    assert inv_f[-1] == mp
    for a, b in zip(inv_f, inv_f[1:]):
        assert a.divides(b)
    eds = elementary_divisors(A)
    assert sum(d.poly.degree for d in eds) == n
    assert [f for f in divisors_to_invariant_factors(eds, p) if f.degree > 0] == inv_f


def test_companion_matrix_has_one_invariant_factor():
    f = UniPoly([1, 2, 0, 1, 1], 3)
    n = f.degree
    C = np.zeros((n, n), dtype=np.int64)
    C[1:, :-1] = np.eye(n - 1, dtype=np.int64)
    C[:, -1] = [(-c) % 3 for c in f.coeffs[:-1]]
    assert invariant_factors(MatrixFp(C, 3)) == [f]


def test_zero_and_identity():
    assert [str(f) for f in invariant_factors(MatrixFp.zeros(2, 2, 5))] == ["x", "x"]
    eds = elementary_divisors(MatrixFp.identity(3, 2))
    assert eds == [ElementaryDivisor(UniPoly([1, 1], 2), 1)] * 3


def test_reference_k1_minimal_polynomial(reference_pair):
    K1, Gamma, _, L = reference_pair
    mp = minimal_polynomial(K1)
    assert str(mp) == "x^4 + 2"
    assert format_factored(factor_univariate(mp)) == "(x+1) (x+2) (x^2+1)"
    assert str(minimal_polynomial(K1 - L @ Gamma)) == "x^4"
