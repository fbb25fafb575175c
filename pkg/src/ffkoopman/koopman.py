"""Smallest Koopman-invariant function space containing the coordinates.

The generators (coordinate functions, then optionally the outputs) are
iterated under f -> f o F until each new iterate falls into the span of
what has been collected.  The collected functions form the basis B and
``K1`` is written in the row convention, so that

    psi_hat(F(x)) = K1 @ psi_hat(x),   x = C @ psi_hat(x),   g(x) = Gamma @ psi_hat(x).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NoOutputs, ReductionTooLarge, StateSpaceTooLarge
from .ffla import MatrixFp
from .field import inv_mod
from .polyfunc import PolyFunc, Substitution, all_monomials, coordinate, eval_many_funcs, monomial_key
from .sysdef import FssSystem

DEFAULT_BASIS_CAP = 20000
DEFAULT_FULL_CAP = 1024


class SpanTracker:
    """Row echelon form of polynomial coefficient vectors, keyed by monomial.

    Each stored row also remembers how it is written in terms of the basis
    functions that were added, so membership tests double as coordinate
    extraction.
    """

    def __init__(self, p: int):
        self.p = p
        self._rows: list[tuple] = []  # (pivot monomial, vector dict, coords dict)
        self.size = 0

    def _reduce(self, vec: dict) -> tuple[dict, dict]:
        # Each row is zero at the pivots of earlier rows, so one ordered pass suffices.
        p = self.p
        vec = dict(vec)
        coords: dict = {}
        for piv, row, rc in self._rows:
            c = vec.get(piv)
            if not c:
                continue
            for m, v in row.items():
                w = (vec.get(m, 0) - c * v) % p
                if w:
                    vec[m] = w
                else:
                    vec.pop(m, None)
            for k, v in rc.items():
                coords[k] = (coords.get(k, 0) + c * v) % p
        return vec, coords

    def coordinates(self, f: PolyFunc) -> dict | None:
        """Coordinates of f in the basis, or None when f is outside the span."""
        residual, coords = self._reduce(f._terms)
        if residual:
            return None
        return {k: v for k, v in coords.items() if v}

    def add(self, f: PolyFunc) -> bool:
        """Append f as basis element number ``size``; False if already spanned."""
        residual, coords = self._reduce(f._terms)
        if not residual:
            return False
        p = self.p
        piv = max(residual, key=monomial_key)
        s = inv_mod(residual[piv], p)
        rc = {k: (-v) % p for k, v in coords.items() if v}
        rc[self.size] = 1
        self._rows.append((piv, {m: v * s % p for m, v in residual.items()}, {k: v * s % p for k, v in rc.items()}))
        self.size += 1
        return True


@dataclass(frozen=True)
class KoopmanReduction:
    sys: FssSystem
    basis: tuple
    K1: MatrixFp
    C: MatrixFp
    Gamma: MatrixFp | None
    includes_outputs: bool

    @property
    def N(self) -> int:
        return len(self.basis)

    @property
    def p(self) -> int:
        return self.sys.p

    def basis_strings(self) -> list[str]:
        return [f.to_string(self.sys.vars) for f in self.basis]

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "basis": self.basis_strings(),
            "K1": self.K1.tolist(),
            "C": self.C.tolist(),
            "Gamma": self.Gamma.tolist() if self.Gamma is not None else None,
        }


def _dense(coords: dict, N: int) -> list[int]:
    row = [0] * N
    for k, v in coords.items():
        row[k] = v
    return row


def build_reduction(
    sys: FssSystem,
    include_outputs: bool | None = None,
    cap: int = DEFAULT_BASIS_CAP,
    reverse: bool = False,
) -> KoopmanReduction:
    """Construct the reduced Koopman linear system of ``sys``.

    Parameters
    ----------
    include_outputs : bool, optional
        Grow the space from the outputs as well (required for Gamma).
        Defaults to True when the system has outputs.
    cap : int
        Largest admissible dimension N.
    reverse : bool
        Process generators in reverse order.  The invariant subspace does not
        depend on the order; only the basis does.
    """
    if include_outputs is None:
        include_outputs = sys.m > 0
    if include_outputs and sys.m == 0:
        raise NoOutputs("system has no outputs")
    n, p, fs = sys.n, sys.p, sys.field
    phi = Substitution(sys.updates)
    coords_fn = [coordinate(i, n, fs) for i in range(1, n + 1)]
    generators = coords_fn + (list(sys.outputs) if include_outputs else [])
    if reverse:
        generators = generators[::-1]
    tracker = SpanTracker(p)
    basis: list[PolyFunc] = []
    images: list[dict] = []  # coordinates of phi(basis[i]) in the basis

    def append(f):
        basis.append(f)
        if len(basis) > cap:
            raise ReductionTooLarge(f"reduction dimension exceeds cap {cap}")

    for gen in generators:
        if not tracker.add(gen):
            continue
        append(gen)
        while True:
            nxt = phi(basis[-1])
            c = tracker.coordinates(nxt)
            if c is not None:
                images.append(c)
                break
            tracker.add(nxt)
            images.append({len(basis): 1})
            append(nxt)

    N = len(basis)
    K1 = MatrixFp([_dense(c, N) for c in images] if N else np.zeros((0, 0)), p)
    C = MatrixFp([_dense(tracker.coordinates(f), N) for f in coords_fn], p)
    Gamma = None
    if sys.m and include_outputs:
        Gamma = MatrixFp([_dense(tracker.coordinates(g), N) for g in sys.outputs], p)
    return KoopmanReduction(sys, tuple(basis), K1, C, Gamma, include_outputs)


def psi_hat(red: KoopmanReduction, x: Sequence[int]) -> np.ndarray:
    """Evaluations of the basis functions at the point x."""
    if len(x) != red.sys.n:
        raise DimensionMismatch(f"point has {len(x)} coordinates, expected {red.sys.n}")
    return psi_hat_many(red, np.asarray([x], dtype=np.int64))[0]


def psi_hat_many(red: KoopmanReduction, X) -> np.ndarray:
    """Row k holds psi_hat(X[k])."""
    X = np.asarray(X, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != red.sys.n:
        raise DimensionMismatch(f"expected points with {red.sys.n} coordinates")
    if not red.basis:
        return np.zeros((X.shape[0], 0), dtype=np.int64)
    return eval_many_funcs(red.basis, X)


def full_koopman_matrix(sys: FssSystem, cap: int = DEFAULT_FULL_CAP) -> MatrixFp:
    """Matrix of the Koopman operator on all p^n reduced monomials.

    Monomials are listed by ``all_monomials`` (ascending graded-lex); row i
    holds the coefficients of (monomial_i o F).  A function with coefficient
    row vector c is mapped to c @ M.
    """
    size = sys.p**sys.n
    if size > cap:
        raise StateSpaceTooLarge(f"full Koopman matrix would be {size} x {size} (cap {cap})")
    monos = all_monomials(sys.n, sys.p)
    index = {m: i for i, m in enumerate(monos)}
    phi = Substitution(sys.updates)
    M = np.zeros((size, size), dtype=np.int64)
    for i, m in enumerate(monos):
        for mm, v in phi.monomial_image(m).items():
            M[i, index[mm]] = v
    return MatrixFp(M, sys.p)


def poly_to_vector(f: PolyFunc, monos: list) -> np.ndarray:
    index = {m: i for i, m in enumerate(monos)}
    v = np.zeros(len(monos), dtype=np.int64)
    for m, c in f.items():
        v[index[m]] = c
    return v
