import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffkoopman.errors import DimensionMismatch, FieldMismatch, IndexOutOfRange
from ffkoopman.field import FieldSpec
from ffkoopman.polyfunc import (
    Substitution,
    all_monomials,
    constant,
    coordinate,
    eval_many,
    eval_many_funcs,
    koopman_apply,
    reduce,
    reduce_exponent,
    render_poly,
)
from ffkoopman.oracle import interpolate

from sysgen import random_poly


def points(n, p):
    return list(itertools.product(range(p), repeat=n))


@st.composite
def poly_and_field(draw, n=2):
    p = draw(st.sampled_from([2, 3, 5, 7]))
    fs = FieldSpec(p)
    raw = draw(st.lists(st.tuples(st.tuples(*[st.integers(0, 9)] * n), st.integers(-20, 20)), max_size=6))
    return fs, reduce(raw, n, fs)


def test_exponent_reduction():
    assert reduce_exponent(0, 5) == 0
    assert [reduce_exponent(e, 3) for e in range(1, 7)] == [1, 2, 1, 2, 1, 2]
    assert reduce_exponent(10**30, 2) == 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_power_of_variable_wraps(p):
    fs = FieldSpec(p)
    x = coordinate(1, 1, fs)
    assert x**p == x
    assert x ** (2 * p - 1) == x ** (p - 1) * x ** (p - 1) * x


def test_rendering():
    fs = FieldSpec(3)
    x1, x2 = coordinate(1, 2, fs), coordinate(2, 2, fs)
    assert render_poly(x1 * x1 + x1 * x2 + 2) == "x1^2 + x1*x2 + 2"
    assert render_poly(x1 * 2) == "2*x1"
    assert render_poly(x1 - x1) == "0"
    assert render_poly(x1 * x2 + x2, ["a", "b"]) == "a*b + b"


def test_coordinate_bounds():
    fs = FieldSpec(2)
    with pytest.raises(IndexOutOfRange):
        coordinate(0, 3, fs)
    with pytest.raises(IndexOutOfRange):
        coordinate(4, 3, fs)


def test_mismatches():
    a = coordinate(1, 2, FieldSpec(3))
    with pytest.raises(FieldMismatch):
        a + coordinate(1, 2, FieldSpec(5))
    with pytest.raises(DimensionMismatch):
        a * coordinate(1, 3, FieldSpec(3))


@settings(max_examples=150)
@given(poly_and_field(), poly_and_field())
def test_arithmetic_is_pointwise(fa, fb):
    fs, f = fa
    g = reduce([(m, c) for m, c in fb[1].items()], 2, fs)
    p = fs.p
    for x in points(2, p):
        assert (f + g)(x) == (f(x) + g(x)) % p
        assert (f - g)(x) == (f(x) - g(x)) % p
        assert (f * g)(x) == f(x) * g(x) % p
        assert (f**3)(x) == pow(f(x), 3, p)


@settings(max_examples=100)
@given(poly_and_field(n=3))
def test_reduced_form_is_canonical(fa):
    # Interpolating the truth table must give back the same reduced polynomial.
    fs, f = fa
    values = [f(x) for x in points(3, fs.p)]
    assert interpolate(values, fs, 3) == f


def test_functions_are_distinct_for_distinct_reduced_polys():
    fs = FieldSpec(3)
    seen = {}
    for m in all_monomials(2, 3):
        f = reduce([(m, 1)], 2, fs)
        table = tuple(f(x) for x in points(2, 3))
        assert table not in seen
        seen[table] = f
    assert len(seen) == 9


def test_all_monomials_order():
    monos = all_monomials(2, 3)
    assert len(monos) == 9
    assert monos[0] == (0, 0)
    assert monos[-1] == (2, 2)
    assert monos[1:3] == [(0, 1), (1, 0)]


@pytest.mark.parametrize("seed", range(10))
def test_substitution_matches_composition(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    n = rng.randint(1, 3)
    fs = FieldSpec(p)
    F = [random_poly(rng, fs, n) for _ in range(n)]
    f = random_poly(rng, fs, n, max_terms=4)
    g = koopman_apply(f, F)
    for x in points(n, p):
        assert g(x) == f([Fi(x) for Fi in F])


def test_substitution_rejects_bad_input():
    fs = FieldSpec(2)
    F = Substitution([coordinate(2, 2, fs), coordinate(1, 2, fs)])
    with pytest.raises(DimensionMismatch):
        F(coordinate(1, 3, fs))
    with pytest.raises(FieldMismatch):
        F(coordinate(1, 2, FieldSpec(3)))


@pytest.mark.parametrize("seed", range(5))
def test_vectorized_evaluation(seed):
    rng = random.Random(seed)
    p, n = rng.choice([(2, 5), (3, 3), (7, 2)])
    fs = FieldSpec(p)
    fs_list = [random_poly(rng, fs, n, max_terms=5) for _ in range(4)] + [constant(0, n, fs)]
    X = np.array(points(n, p))
    M = eval_many_funcs(fs_list, X, chunk_cells=7)
    for j, f in enumerate(fs_list):
        expect = [f(x) for x in points(n, p)]
        assert M[:, j].tolist() == expect
        assert eval_many(f, X).tolist() == expect
