"""Structure of solutions read off the reduced Koopman system.

Orbit lengths and the chain bound come from the elementary divisors of K1.
Fixed and periodic points are exact: a candidate y from the relevant kernel
of K1 corresponds to a state iff y == psi_hat(C y), and then x = C y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import EnumerationCapExceeded
from .ffla import (
    ElementaryDivisor,
    MatrixFp,
    UniPoly,
    elementary_divisors,
    enumerate_span,
    format_factored,
    factor_univariate,
    rref_solve,
    matrix_power,
    minimal_polynomial,
    mod_matmul,
    poly_order,
    prime_power_ceiling,
)
from .koopman import KoopmanReduction, psi_hat_many
from .sysdef import FssSystem

DEFAULT_ENUM_CAP = 65536
_CHUNK = 8192


def _is_x(f: UniPoly) -> bool:
    return f.coeffs == (0, 1)


def predicted_orbit_lengths(eds: Iterable[ElementaryDivisor], p: int) -> set[int]:
    """Every cycle length the linear system x -> K1 x can exhibit.

    A block f^m (f != x) contributes ord(f) * p^ceil(log_p k) for k <= m;
    lengths across blocks combine by lcm.
    """
    lengths = {1}
    for d in eds:
        if _is_x(d.base):
            continue
        order = poly_order(d.base)
        block = {1} | {order * prime_power_ceiling(k, p) for k in range(1, d.multiplicity + 1)}
        lengths = {lcm(a, b) for a in lengths for b in block}
    return lengths


def nilpotency_index(eds: Iterable[ElementaryDivisor]) -> int:
    """Largest power of x among the divisors (0 if x is not a divisor)."""
    return max((d.multiplicity for d in eds if _is_x(d.base)), default=0)


def _state_block(start: int, stop: int, n: int, p: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    X = np.empty((idx.size, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        X[:, i] = idx % p
        idx //= p
    return X


def consistent_states(red: KoopmanReduction, Y: np.ndarray) -> np.ndarray:
    """States x = C y for the rows y of Y satisfying y == psi_hat(C y)."""
    Y = np.asarray(Y, dtype=np.int64).reshape(-1, red.N)
    X = mod_matmul(Y, red.C.a.T, red.p)
    ok = np.all(psi_hat_many(red, X) == Y, axis=1)
    return X[ok]


def states_solving(red: KoopmanReduction, A: MatrixFp, b, enum_cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Every state x with A psi_hat(x) = b.

    Solutions y of A y = b form an affine coset; those of the form psi_hat(x)
    are exactly the coset members with y == psi_hat(C y).  The coset is
    enumerated when it is no larger than the state space, otherwise the
    states are scanned directly.  ``enum_cap`` bounds whichever is used.
    """
    p, n = red.p, red.sys.n
    b = np.asarray(b, dtype=np.int64) % p
    sol = rref_solve(A, b)
    if not sol.consistent:
        return np.zeros((0, n), dtype=np.int64)
    d = sol.kernel.shape[0]
    if d <= n:
        if p**d > enum_cap:
            raise EnumerationCapExceeded(d, p, enum_cap)
        return consistent_states(red, enumerate_span(sol.kernel, p, offset=sol.particular))
    if p**n > enum_cap:
        raise EnumerationCapExceeded(n, p, enum_cap)
    found = []
    for start in range(0, p**n, _CHUNK):
        X = _state_block(start, min(start + _CHUNK, p**n), n, p)
        ok = np.all(mod_matmul(psi_hat_many(red, X), A.a.T, p) == b, axis=1)
        found.append(X[ok])
    return np.concatenate(found)


def _distinct(X: np.ndarray) -> list[tuple]:
    return sorted({tuple(int(v) for v in row) for row in X})


def fixed_points(red: KoopmanReduction, enum_cap: int = DEFAULT_ENUM_CAP) -> list[tuple]:
    """All fixed points of the system, from the eigenvectors of K1 for eigenvalue 1."""
    shifted = red.K1 - MatrixFp.identity(red.N, red.p)
    return _distinct(states_solving(red, shifted, np.zeros(red.N, dtype=np.int64), enum_cap))


def periodic_points(red: KoopmanReduction, L: int, enum_cap: int = DEFAULT_ENUM_CAP) -> list[tuple[tuple, int]]:
    """States x with F^L(x) = x, each paired with its exact period."""
    if L < 1:
        raise ValueError("L must be positive")
    shifted = matrix_power(red.K1, L) - MatrixFp.identity(red.N, red.p)
    out = []
    for x in _distinct(states_solving(red, shifted, np.zeros(red.N, dtype=np.int64), enum_cap)):
        period = exact_period(red.sys, x, L)
        if period is not None and L % period == 0:
            out.append((x, period))
    return out


def exact_period(sys: FssSystem, x: Sequence[int], bound: int) -> int | None:
    """Least k <= bound with F^k(x) = x, or None."""
    start = tuple(int(v) for v in x)
    y = start
    for k in range(1, bound + 1):
        y = sys.step(y)
        if y == start:
            return k
    return None


def classify_state(sys: FssSystem, x0: Sequence[int]) -> tuple[int, int]:
    """(chain length, orbit length) of the trajectory from x0, by Brent's method."""
    x0 = tuple(int(v) for v in x0)
    sys.check_state(x0)
    step = sys.step
    power = lam = 1
    tortoise, hare = x0, step(x0)
    while tortoise != hare:
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = step(hare)
        lam += 1
    tortoise = hare = x0
    for _ in range(lam):
        hare = step(hare)
    mu = 0
    while tortoise != hare:
        tortoise, hare = step(tortoise), step(hare)
        mu += 1
    return mu, lam


@dataclass
class StructureReport:
    N: int
    min_poly: UniPoly
    min_poly_factors: list
    elementary_divisors: list
    predicted_orbit_lengths: set
    nilpotency_index: int
    fixed_points: list | None
    is_nonsingular_fss: bool | None = None
    periodic: dict = field(default_factory=dict)

    def min_poly_string(self) -> str:
        return format_factored(self.min_poly_factors)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "min_poly": str(self.min_poly),
            "min_poly_factored": self.min_poly_string(),
            "elementary_divisors": [
                {"base": str(d.base), "multiplicity": d.multiplicity} for d in self.elementary_divisors
            ],
            "predicted_orbit_lengths": sorted(self.predicted_orbit_lengths),
            "nilpotency_index": self.nilpotency_index,
            "fixed_points": [list(x) for x in self.fixed_points] if self.fixed_points is not None else None,
            "periodic_points": {
                str(L): [{"x": list(x), "period": k} for x, k in pts] for L, pts in sorted(self.periodic.items())
            },
        }


def analyze_structure(
    red: KoopmanReduction,
    enum_cap: int = DEFAULT_ENUM_CAP,
    with_fixed_points: bool = True,
    orbit_lengths: Sequence[int] = (),
    seed: int = 0,
) -> StructureReport:
    mp = minimal_polynomial(red.K1)
    eds = elementary_divisors(red.K1, seed=seed)
    report = StructureReport(
        N=red.N,
        min_poly=mp,
        min_poly_factors=factor_univariate(mp, seed=seed),
        elementary_divisors=eds,
        predicted_orbit_lengths=predicted_orbit_lengths(eds, red.p),
        nilpotency_index=nilpotency_index(eds),
        fixed_points=fixed_points(red, enum_cap) if with_fixed_points else None,
    )
    for L in orbit_lengths:
        report.periodic[L] = periodic_points(red, L, enum_cap)
    return report
