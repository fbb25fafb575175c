"""Observability, initial-state recovery and deadbeat observers.

Everything here works on the linear pair (K1, Gamma) of a reduction built
with outputs; the state of the original system is read back through C.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import DEFAULT_ENUM_CAP, states_solving
from .errors import (
    DimensionMismatch,
    GainSearchExhausted,
    InvariantViolation,
    NoOutputs,
    NotDetectable,
)
from .ffla import Echelon, MatrixFp, inverse, kernel, matrix_power, mod_matmul, rank, rref_solve
from .koopman import KoopmanReduction, psi_hat


@dataclass
class ObservabilityResult:
    O: MatrixFp
    rank: int
    N: int

    @property
    def observable(self) -> bool:
        return self.rank == self.N

    def verdict(self) -> str:
        word = "observable" if self.observable else "not observable"
        return f"{word} (rank {self.rank} of {self.N})"


def _require_outputs(red: KoopmanReduction):
    if red.Gamma is None or red.Gamma.rows == 0:
        raise NoOutputs("reduction has no output map; build it with include_outputs=True")


def observability_matrix(K1: MatrixFp, Gamma: MatrixFp, blocks: int | None = None) -> MatrixFp:
    """Stack Gamma, Gamma K1, ..., Gamma K1^(blocks-1)."""
    N = K1.rows
    blocks = N if blocks is None else blocks
    rows = []
    cur = Gamma.a
    for _ in range(blocks):
        rows.append(cur)
        cur = mod_matmul(cur, K1.a, K1.p)
    if not rows:
        return MatrixFp.zeros(0, N, K1.p)
    return MatrixFp(np.vstack(rows), K1.p)


def observability(red: KoopmanReduction) -> ObservabilityResult:
    _require_outputs(red)
    O = observability_matrix(red.K1, red.Gamma)
    return ObservabilityResult(O, rank(O) if O.rows else 0, red.N)


def _as_output_rows(outputs, m: int) -> np.ndarray:
    Z = np.asarray(outputs, dtype=np.int64)
    if Z.ndim == 1 and m == 1:
        Z = Z[:, None]
    if Z.ndim != 2 or Z.shape[1] != m:
        raise DimensionMismatch(f"expected a sequence of {m}-vectors")
    return Z


def recover_initial(red: KoopmanReduction, outputs, enum_cap: int = DEFAULT_ENUM_CAP) -> list[tuple]:
    """Every initial state whose output sequence starts with ``outputs``.

    The stacked linear system in y(0) is solved first; candidate solutions
    are kept only if y == psi_hat(C y) and the state x = C y re-simulates to
    the given outputs.  An empty list means no trajectory fits.  When the
    solution coset is larger than the state space the states are scanned
    instead, which gives the same answer.
    """
    _require_outputs(red)
    sys = red.sys
    Z = _as_output_rows(outputs, sys.m) % red.p
    T = Z.shape[0]
    if T < 1:
        raise ValueError("at least one output sample is required")
    O = observability_matrix(red.K1, red.Gamma, T)
    X = states_solving(red, O, Z.reshape(-1), enum_cap)
    keep = np.ones(X.shape[0], dtype=bool)
    cur = X
    for k in range(T):
        keep &= np.all(sys.output_many(cur) == Z[k], axis=1)
        if k + 1 < T:
            cur = sys.step_many(cur)
    found = [tuple(int(v) for v in row) for row in X[keep]]
    return sorted(set(found))


@dataclass
class Decomposition:
    """Similarity P splitting (K1, Gamma) into observable and unobservable parts.

    In coordinates y_bar = P^-1 y the matrices are block lower triangular,
    ``K_bar = [[K11, 0], [K21, K22]]`` and ``Gamma_bar = [Gamma1, 0]``.
    """

    P: MatrixFp
    P_inv: MatrixFp
    K_bar: MatrixFp
    Gamma_bar: MatrixFp
    n_obs: int

    @property
    def K11(self) -> MatrixFp:
        return self.K_bar[: self.n_obs, : self.n_obs]

    @property
    def K21(self) -> MatrixFp:
        return self.K_bar[self.n_obs:, : self.n_obs]

    @property
    def K22(self) -> MatrixFp:
        return self.K_bar[self.n_obs:, self.n_obs:]

    @property
    def Gamma1(self) -> MatrixFp:
        return self.Gamma_bar[:, : self.n_obs]

    @property
    def detectable(self) -> bool:
        K22 = self.K22
        return K22.rows == 0 or matrix_power(K22, K22.rows).is_zero()


def decompose_pair(K1: MatrixFp, Gamma: MatrixFp) -> Decomposition:
    N, p = K1.rows, K1.p
    U = kernel(observability_matrix(K1, Gamma)) if N else np.zeros((0, 0), dtype=np.int64)
    span = Echelon(N, p)
    for u in U:
        span.insert(u)
    complement = []
    for j in range(N):
        e = np.zeros(N, dtype=np.int64)
        e[j] = 1
        if span.insert(e):
            complement.append(e)
    cols = complement + list(U)
    P = MatrixFp(np.column_stack(cols) if cols else np.zeros((0, 0)), p)
    P_inv = inverse(P) if N else P
    K_bar = P_inv @ K1 @ P
    Gamma_bar = Gamma @ P
    r = len(complement)
    if K_bar.a[:r, r:].any() or Gamma_bar.a[:, r:].any():
        raise InvariantViolation("unobservable subspace is not invariant")
    return Decomposition(P, P_inv, K_bar, Gamma_bar, r)


def decompose_observable(red: KoopmanReduction) -> Decomposition:
    _require_outputs(red)
    return decompose_pair(red.K1, red.Gamma)


def nilpotency_index_of(M: MatrixFp) -> int | None:
    """Least r with M^r = 0, or None if M is not nilpotent."""
    n = M.rows
    if n == 0:
        return 0
    if not matrix_power(M, n).is_zero():
        return None
    P = MatrixFp.identity(n, M.p)
    for r in range(n + 1):
        if P.is_zero():
            return r
        P = P @ M
    return None


def ackermann_deadbeat(K: MatrixFp, gamma: MatrixFp) -> MatrixFp:
    """Single-output gain l with K - l gamma nilpotent: l = K^N O^-1 e_N."""
    N = K.rows
    O = observability_matrix(K, gamma)
    e = np.zeros(N, dtype=np.int64)
    e[-1] = 1
    sol = rref_solve(O, e)
    if not sol.unique:
        raise ValueError("pair is not observable")
    l = matrix_power(K, N) @ sol.particular
    return MatrixFp(l[:, None], K.p)


def _combination_rows(m: int, p: int, seed: int, budget: int):
    """Deterministic low-weight sweep, then seeded random rows; at most budget rows."""
    count = 0
    for w in range(1, m + 1):
        for support in itertools.combinations(range(m), w):
            for tail in itertools.product(range(1, p), repeat=w - 1):
                if count >= budget:
                    return
                v = np.zeros(m, dtype=np.int64)
                v[list(support)] = (1,) + tail
                count += 1
                yield v
    rng = random.Random(seed)
    while count < budget:
        v = np.array([rng.randrange(p) for _ in range(m)], dtype=np.int64)
        count += 1
        if v.any():
            yield v


@dataclass
class ObserverDesign:
    L: MatrixFp
    closed: MatrixFp
    nilpotency_index: int
    decomposition: Decomposition | None
    detectable: bool

    def to_json(self) -> dict:
        return {"L": self.L.tolist(), "nilpotency_index": self.nilpotency_index}


def deadbeat_gain(K1: MatrixFp, Gamma: MatrixFp, seed: int = 0, budget: int = 256) -> ObserverDesign:
    """Gain L making K1 - L Gamma nilpotent (works on bare matrices)."""
    N, m, p = K1.rows, Gamma.rows, K1.p
    if nilpotency_index_of(K1) is not None:
        L = MatrixFp.zeros(N, m, p)
        dec = None
    else:
        dec = decompose_pair(K1, Gamma)
        if not dec.detectable:
            raise NotDetectable("unobservable block is not nilpotent")
        r = dec.n_obs
        K11, G1 = dec.K11, dec.Gamma1
        L_bar_top = None
        for v in _combination_rows(m, p, seed, budget):
            row = MatrixFp(v[None, :], p) @ G1
            if rank(observability_matrix(K11, row)) == r:
                L_bar_top = ackermann_deadbeat(K11, row) @ MatrixFp(v[None, :], p)
                break
        if L_bar_top is None:
            raise GainSearchExhausted(budget)
        L_bar = np.zeros((N, m), dtype=np.int64)
        L_bar[:r] = L_bar_top.a
        L = dec.P @ MatrixFp(L_bar, p)
    closed = K1 - L @ Gamma
    index = nilpotency_index_of(closed)
    if index is None:
        raise InvariantViolation("synthesized gain does not make K1 - L Gamma nilpotent")
    return ObserverDesign(L, closed, index, dec, True)


def synthesize_deadbeat_gain(red: KoopmanReduction, seed: int = 0, budget: int = 256) -> ObserverDesign:
    _require_outputs(red)
    return deadbeat_gain(red.K1, red.Gamma, seed=seed, budget=budget)


@dataclass
class ObserverRow:
    k: int
    z: tuple
    x: tuple | None
    x_obs: tuple
    converged: bool


def run_observer(
    red: KoopmanReduction,
    L: MatrixFp,
    *,
    outputs=None,
    x0: Sequence[int] | None = None,
    steps: int | None = None,
    y_hat0=None,
) -> list[ObserverRow]:
    """Simulate y_hat(k+1) = K1 y_hat(k) + L (z(k) - Gamma y_hat(k)).

    Either pass measured ``outputs`` or a true initial state ``x0`` with a
    number of ``steps`` (rows of the trace).  When the true state is known a
    row counts as converged once y_hat equals psi_hat(x); otherwise once k
    reaches the nilpotency index of K1 - L Gamma.
    """
    _require_outputs(red)
    sys, p, N = red.sys, red.p, red.N
    if L.shape != (N, sys.m):
        raise DimensionMismatch(f"L must be {N} x {sys.m}, got {L.shape}")
    states = None
    if x0 is not None:
        if steps is None or steps < 1:
            raise ValueError("steps must be positive when simulating from x0")
        states, outs = sys.simulate(x0, steps - 1)
        Z = np.asarray(outs, dtype=np.int64).reshape(steps, sys.m)
    elif outputs is not None:
        Z = _as_output_rows(outputs, sys.m) % p
    else:
        raise ValueError("give either outputs or x0")
    y = np.zeros(N, dtype=np.int64) if y_hat0 is None else np.asarray(y_hat0, dtype=np.int64) % p
    if y.shape != (N,):
        raise DimensionMismatch(f"observer state must have length {N}")
    settle = None
    if states is None:
        settle = nilpotency_index_of(red.K1 - L @ red.Gamma)
    rows = []
    for k in range(Z.shape[0]):
        x_obs = tuple(int(v) for v in red.C @ y)
        if states is not None:
            converged = bool(np.array_equal(y, psi_hat(red, states[k])))
        else:
            converged = settle is not None and k >= settle
        rows.append(ObserverRow(k, tuple(int(v) for v in Z[k]), states[k] if states else None, x_obs, converged))
        innovation = (Z[k] - red.Gamma @ y) % p
        y = (red.K1 @ y + L @ innovation) % p
    return rows


def _fmt_vec(v) -> str:
    return "[" + ",".join(str(int(t)) for t in v) + "]"


def render_observer_table(rows: list[ObserverRow]) -> str:
    """Aligned text table with columns k, z(k), x(k), x_obs(k)."""
    header = ("k", "z(k)", "x(k)", "x_obs(k)")
    body = []
    for r in rows:
        z = str(r.z[0]) if len(r.z) == 1 else _fmt_vec(r.z)
        body.append((str(r.k), z, _fmt_vec(r.x) if r.x is not None else "?", _fmt_vec(r.x_obs)))
    widths = [max(len(row[i]) for row in [header] + body) for i in range(4)]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip() for row in [header] + body]
    return "\n".join(lines)


def observer_rows_json(rows: list[ObserverRow]) -> list[dict]:
    return [
        {"k": r.k, "z": list(r.z), "x": list(r.x) if r.x is not None else None, "x_obs": list(r.x_obs),
         "converged": r.converged}
        for r in rows
    ]
