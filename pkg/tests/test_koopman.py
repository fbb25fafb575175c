import random

import numpy as np
import pytest

from ffkoopman.errors import NoOutputs, ReductionTooLarge, StateSpaceTooLarge
from ffkoopman.ffla import MatrixFp, mod_matmul, rank
from ffkoopman.koopman import build_reduction, full_koopman_matrix, poly_to_vector, psi_hat, psi_hat_many
from ffkoopman.oracle import all_states, full_koopman_by_interpolation
from ffkoopman.polyfunc import all_monomials, koopman_apply

from sysgen import random_system


def assert_representation(red):
    sys, p = red.sys, red.p
    X = all_states(sys.n, p)
    Psi = psi_hat_many(red, X)
    assert np.array_equal(psi_hat_many(red, sys.step_many(X)), mod_matmul(Psi, red.K1.a.T, p))
    assert np.array_equal(X, mod_matmul(Psi, red.C.a.T, p))
    if red.Gamma is not None:
        assert np.array_equal(sys.output_many(X), mod_matmul(Psi, red.Gamma.a.T, p))


def test_biochem_dimension(biochem_red):
    assert biochem_red.N == 18
    assert_representation(biochem_red)


def test_obs3_reduction(obs3_red):
    assert obs3_red.N == 4
    assert obs3_red.basis_strings() == ["x1", "2*x1 + x2", "x1^2 + x2", "x1^2 + x1*x2 + x2^2 + x1 + x2"]
    assert obs3_red.K1.tolist() == [[0, 1, 0, 0], [2, 0, 0, 0], [0, 0, 0, 1], [1, 1, 1, 0]]
    assert obs3_red.Gamma.tolist() == [[0, 0, 1, 0]]
    assert_representation(obs3_red)


def test_d1_reduction(d1):
    red = build_reduction(d1)
    assert red.K1.tolist() == [[0, 1, 0], [0, 0, 1], [0, 0, 1]]
    assert_representation(red)


def test_basis_is_independent_and_invariant(biochem_red):
    monos = all_monomials(biochem_red.sys.n, 2)
    B = np.array([poly_to_vector(f, monos) for f in biochem_red.basis])
    assert rank(MatrixFp(B, 2)) == biochem_red.N
    for f in biochem_red.basis:
        g = koopman_apply(f, biochem_red.sys.updates)
        assert rank(MatrixFp(np.vstack([B, poly_to_vector(g, monos)]), 2)) == biochem_red.N


def test_dimension_independent_of_generator_order(biochem):
    assert build_reduction(biochem, reverse=True).N == 18


def test_output_handling(d1, obs3):
    with pytest.raises(NoOutputs):
        build_reduction(d1, include_outputs=True)
    red = build_reduction(obs3, include_outputs=False)
    assert red.Gamma is None
    assert red.N == 2


def test_cap(biochem):
    with pytest.raises(ReductionTooLarge):
        build_reduction(biochem, cap=10)


def test_psi_hat_single_point(obs3_red):
    assert psi_hat(obs3_red, (2, 0)).tolist() == [2, 1, 1, 0]


@pytest.mark.parametrize("seed", range(25))
def test_random_representations(seed):
    rng = random.Random(seed)
    p, n = rng.choice([(2, 3), (2, 5), (3, 3), (5, 2)])
    assert_representation(build_reduction(random_system(rng, p, n, m=rng.randint(0, 2))))


@pytest.mark.parametrize("name", ["d1", "obs3", "biochem", "hidden"])
def test_full_matrix_agrees_with_interpolation(name, request):
    sys = request.getfixturevalue(name)
    assert full_koopman_matrix(sys) == full_koopman_by_interpolation(sys)


def test_full_matrix_examples(d1, obs3):
    assert rank(full_koopman_matrix(d1)) == 3
    assert full_koopman_matrix(obs3).shape == (9, 9)
    with pytest.raises(StateSpaceTooLarge):
        full_koopman_matrix(d1, cap=3)
