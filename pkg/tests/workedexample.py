"""The F_3 observer example: hand-written RO-KLS matrices and its trace table."""

from ffkoopman.ffla import MatrixFp
from ffkoopman.koopman import KoopmanReduction
from ffkoopman.polyfunc import coordinate


def reference_matrices():
    """K1, Gamma, C and L in the basis x1, x2, x1^2, x1^2+x1*x2+x2^2."""
    K1 = MatrixFp([[2, 1, 0, 0], [1, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], 3)
    Gamma = MatrixFp([[0, 1, 1, 0]], 3)
    C = MatrixFp([[1, 0, 0, 0], [0, 1, 0, 0]], 3)
    L = MatrixFp([[1], [0], [0], [2]], 3)
    return K1, Gamma, C, L


def reference_reduction(obs3) -> KoopmanReduction:
    K1, Gamma, C, _ = reference_matrices()
    fs = obs3.field
    x1, x2 = coordinate(1, 2, fs), coordinate(2, 2, fs)
    basis = (x1, x2, x1 * x1, x1 * x1 + x2 * x2 + x1 * x2)
    return KoopmanReduction(obs3, basis, K1, C, Gamma, True)


# (k, z(k), x(k), x_obs(k)) from x(0) = (2, 0) and zero initial estimate
TABLE = [
    (0, 1, (2, 0), (0, 0)),
    (1, 0, (1, 2), (1, 0)),
    (2, 1, (1, 0), (2, 1)),
    (3, 2, (2, 1), (0, 0)),
    (4, 1, (2, 0), (2, 0)),
    (5, 0, (1, 2), (1, 2)),
    (6, 1, (1, 0), (1, 0)),
    (7, 2, (2, 1), (2, 1)),
    (8, 1, (2, 0), (2, 0)),
    (9, 0, (1, 2), (1, 2)),
]
