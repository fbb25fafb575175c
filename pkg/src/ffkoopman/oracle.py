"""Brute-force ground truth by enumerating the whole state space.

Nothing here looks at a KoopmanReduction.  States are indexed in
lexicographic order (x1 most significant), the state graph is a successor
array, and polynomial indicators are obtained by interpolating truth tables
with the pointwise basis prod_i (1 - (x_i - a_i)^(p-1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, lcm
from typing import Sequence

import numpy as np
from sympy import primefactors

from .errors import NotAChainRoot, NotPeriodic, StateSpaceTooLarge
from .ffla import MatrixFp, matrix_power, mod_matmul, rank
from .polyfunc import PolyFunc, all_monomials
from .sysdef import FssSystem

DEFAULT_ORACLE_CAP = 2**20
DEFAULT_LEMMA_CAP = 1024


def _check_size(sys: FssSystem, cap: int) -> int:
    size = sys.p**sys.n
    if size > cap:
        raise StateSpaceTooLarge(f"{size} states exceed the oracle cap {cap}")
    return size


def all_states(n: int, p: int) -> np.ndarray:
    """Every point of F_p^n, one per row, in lexicographic order."""
    idx = np.arange(p**n, dtype=np.int64)
    X = np.empty((p**n, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        X[:, i] = idx % p
        idx //= p
    return X


def state_index(X, p: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    out = np.zeros(X.shape[:-1], dtype=np.int64)
    for i in range(X.shape[-1]):
        out = out * p + X[..., i]
    return out


def successor_array(sys: FssSystem) -> np.ndarray:
    X = all_states(sys.n, sys.p)
    return state_index(sys.step_many(X), sys.p)


# ---------------------------------------------------------------- state graph


@dataclass
class OracleReport:
    p: int
    n: int
    succ: np.ndarray
    periodic: np.ndarray
    chain: np.ndarray  # steps from each state to its cycle
    fixed_points: list
    orbit_lengths: list  # one entry per cycle, ascending
    cycle_reps: list  # smallest state on each cycle, aligned with orbit_lengths
    roots: list
    max_chain: int
    nonsingular: bool
    fss_period: int | None

    def chain_length(self, x: Sequence[int]) -> int:
        return int(self.chain[state_index(np.asarray(x), self.p)])

    def chain_length_per_state(self) -> dict:
        return {_decode(i, self.n, self.p): int(c) for i, c in enumerate(self.chain)}

    @property
    def distinct_orbit_lengths(self) -> set:
        return set(self.orbit_lengths)

    def to_json(self) -> dict:
        return {
            "states": self.p**self.n,
            "fixed_points": [list(x) for x in self.fixed_points],
            "orbit_lengths": self.orbit_lengths,
            "max_chain": self.max_chain,
            "roots": len(self.roots),
            "nonsingular": self.nonsingular,
            "fss_period": self.fss_period,
        }


def _decode(i: int, n: int, p: int) -> tuple:
    out = [0] * n
    for k in range(n - 1, -1, -1):
        i, out[k] = divmod(i, p)
    return tuple(out)


def brute_force_structure(sys: FssSystem, cap: int = DEFAULT_ORACLE_CAP) -> OracleReport:
    """Cycles, chains, roots and fixed points of F by full enumeration."""
    size = _check_size(sys, cap)
    p, n = sys.p, sys.n
    succ = successor_array(sys)
    indeg = np.bincount(succ, minlength=size)
    roots = np.flatnonzero(indeg == 0)

    # Peel states of indegree zero layer by layer; what survives is periodic.
    alive = np.ones(size, dtype=bool)
    deg = indeg.copy()
    layers = []
    frontier = roots
    while frontier.size:
        layers.append(frontier)
        alive[frontier] = False
        tgt = succ[frontier]
        np.subtract.at(deg, tgt, 1)
        tgt = np.unique(tgt)
        frontier = tgt[(deg[tgt] == 0) & alive[tgt]]
    periodic = alive

    chain = np.zeros(size, dtype=np.int64)
    for layer in reversed(layers):
        chain[layer] = chain[succ[layer]] + 1

    seen = np.zeros(size, dtype=bool)
    cycles = []
    for s in np.flatnonzero(periodic):
        if seen[s]:
            continue
        length, t = 0, s
        while not seen[t]:
            seen[t] = True
            t = succ[t]
            length += 1
        cycles.append((length, int(s)))
    cycles.sort()
    orbit_lengths = [c[0] for c in cycles]
    fixed = [_decode(int(i), n, p) for i in np.flatnonzero(succ == np.arange(size))]
    nonsingular = bool(periodic.all())
    return OracleReport(
        p=p,
        n=n,
        succ=succ,
        periodic=periodic,
        chain=chain,
        fixed_points=fixed,
        orbit_lengths=orbit_lengths,
        cycle_reps=[_decode(c[1], n, p) for c in cycles],
        roots=[_decode(int(i), n, p) for i in roots],
        max_chain=int(chain.max()) if size else 0,
        nonsingular=nonsingular,
        fss_period=lcm(*orbit_lengths) if nonsingular else None,
    )


def brute_force_observability(
    sys: FssSystem, horizon: int | None = None, cap: int = DEFAULT_ORACLE_CAP
) -> tuple[bool, tuple | None]:
    """Is x(0) -> (z(0), ..., z(horizon-1)) injective?

    States are split by output, then refined by the class of their successor,
    once per extra time step (horizon None means until the split stabilises).
    Returns the verdict and, if not injective, the lexicographically first
    colliding pair.
    """
    size = _check_size(sys, cap)
    succ = successor_array(sys)
    Z = sys.output_many(all_states(sys.n, sys.p))
    _, cls = np.unique(Z, axis=0, return_inverse=True) if Z.shape[1] else (None, np.zeros(size, dtype=np.int64))
    cls = np.asarray(cls).reshape(-1)
    count = int(cls.max()) + 1 if size else 0
    steps = 1
    while horizon is None or steps < horizon:
        pair = np.stack([cls, cls[succ]], axis=1)
        _, new = np.unique(pair, axis=0, return_inverse=True)
        new = np.asarray(new).reshape(-1)
        new_count = int(new.max()) + 1
        cls = new
        steps += 1
        if new_count == count:
            break
        count = new_count
    if count == size:
        return True, None
    counts = np.bincount(cls)
    x = int(np.flatnonzero(counts[cls] > 1)[0])
    twins = np.flatnonzero(cls == cls[x])
    y = int(twins[twins > x][0])
    return False, (_decode(x, sys.n, sys.p), _decode(y, sys.n, sys.p))


# ---------------------------------------------------------------- interpolation


def _univariate_basis(p: int) -> np.ndarray:
    """T[e, a] = coefficient of t^e in 1 - (t - a)^(p-1)."""
    T = np.zeros((p, p), dtype=np.int64)
    for a in range(p):
        for e in range(p):
            c = comb(p - 1, e) * pow(-a, p - 1 - e, p) % p
            T[e, a] = -c % p
        T[0, a] = (T[0, a] + 1) % p
    return T


def interpolation_coefficients(values, n: int, p: int) -> np.ndarray:
    """Reduced-polynomial coefficients of the functions in ``values``.

    ``values`` has shape (..., p^n) indexed by state; the result has the same
    shape, indexed by exponent tuple (e1, ..., en) in lexicographic order.
    """
    V = np.asarray(values, dtype=np.int64) % p
    lead = V.shape[:-1]
    T = _univariate_basis(p)
    A = V.reshape(lead + (p,) * n)
    k = len(lead)
    for axis in range(n):
        A = np.moveaxis(np.tensordot(A, T, axes=([k + axis], [1])), -1, k + axis) % p
    return A.reshape(lead + (p**n,))


def interpolate(values, field_spec, n: int) -> PolyFunc:
    """The unique reduced polynomial taking ``values`` (in state order)."""
    p = field_spec.p
    coeffs = interpolation_coefficients(values, n, p)
    exps = all_states(n, p)
    terms = {tuple(int(v) for v in exps[i]): int(coeffs[i]) for i in np.flatnonzero(coeffs)}
    return PolyFunc(field_spec, n, terms)


def interpolate_indicator(sys: FssSystem, mask) -> PolyFunc:
    return interpolate(np.asarray(mask, dtype=np.int64), sys.field, sys.n)


def _orbit_set(succ: np.ndarray, x0: int, period: int) -> np.ndarray:
    G = np.arange(succ.size)
    for _ in range(period):
        G = succ[G]
    reach = np.zeros(succ.size, dtype=bool)
    reach[x0] = True
    while True:
        nxt = reach | reach[G]
        if (nxt == reach).all():
            return reach
        reach = nxt


def orbit_indicator(sys: FssSystem, x0: Sequence[int], cap: int = DEFAULT_ORACLE_CAP) -> PolyFunc:
    """Indicator of {x : F^(k l)(x) = x0 for some k >= 0}, l the period of x0."""
    _check_size(sys, cap)
    sys.check_state(x0)
    succ = successor_array(sys)
    s = int(state_index(np.asarray(x0), sys.p))
    t, period = succ[s], 1
    while t != s and period <= succ.size:
        t, period = succ[t], period + 1
    if t != s:
        raise NotPeriodic(f"{tuple(x0)} does not lie on a cycle")
    return interpolate_indicator(sys, _orbit_set(succ, s, period))


def chain_indicator(sys: FssSystem, x0: Sequence[int], cap: int = DEFAULT_ORACLE_CAP) -> PolyFunc:
    """Indicator of the pre-periodic states on the chain starting at the root x0."""
    report = brute_force_structure(sys, cap)
    sys.check_state(x0)
    s = int(state_index(np.asarray(x0), sys.p))
    if report.periodic[s] or tuple(int(v) for v in x0) not in set(report.roots):
        raise NotAChainRoot(f"{tuple(x0)} is not the root of a chain")
    mask = np.zeros(report.succ.size, dtype=np.int64)
    while not report.periodic[s]:
        mask[s] = 1
        s = report.succ[s]
    return interpolate_indicator(sys, mask)


def full_koopman_by_interpolation(sys: FssSystem, cap: int = DEFAULT_LEMMA_CAP) -> MatrixFp:
    """Full Koopman matrix built from truth tables, rows and columns in
    ascending graded-lex monomial order (row i holds monomial_i o F)."""
    size = _check_size(sys, cap)
    p, n = sys.p, sys.n
    monos = all_monomials(n, p)
    FX = sys.step_many(all_states(n, p))
    E = np.asarray(monos, dtype=np.int64)
    # values[i, x] = monomial_i(F(x)); 0^0 counts as 1
    values = np.ones((size, size), dtype=np.int64)
    for j in range(n):
        powers = np.ones((p, size), dtype=np.int64)
        for e in range(1, p):
            powers[e] = powers[e - 1] * FX[:, j] % p
        values = values * powers[E[:, j]] % p
    coeffs = interpolation_coefficients(values, n, p)
    lex_index = state_index(E, p)  # column of each monomial in lex exponent order
    return MatrixFp(coeffs[:, lex_index], p)


# ---------------------------------------------------------------- lemma checks


@dataclass
class LemmaCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class LemmaReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail):
        self.checks.append(LemmaCheck(name, bool(passed), detail))

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]


def _vector(f: PolyFunc, monos) -> np.ndarray:
    index = {m: i for i, m in enumerate(monos)}
    v = np.zeros(len(monos), dtype=np.int64)
    for m, c in f.items():
        v[index[m]] = c
    return v


def _exact_period(c: np.ndarray, M: MatrixFp, bound: int) -> int | None:
    v = c
    for t in range(1, bound + 1):
        v = mod_matmul(v[None, :], M.a, M.p)[0]
        if np.array_equal(v, c):
            return t
    return None


def _height(c: np.ndarray, M: MatrixFp, bound: int) -> int | None:
    """Least t with c M^t = 0."""
    v = c
    for t in range(bound + 1):
        if not v.any():
            return t
        v = mod_matmul(v[None, :], M.a, M.p)[0]
    return None


def _eventual_period(M: MatrixFp, candidate: int) -> int | None:
    """Least d with M^s M^d = M^s for s = size, searched among divisors of candidate."""
    base = matrix_power(M, M.rows)
    if not (base @ matrix_power(M, candidate)) == base:
        return None
    d = candidate
    for q in primefactors(candidate):
        while d % q == 0 and base @ matrix_power(M, d // q) == base:
            d //= q
    return d


def lemma_suite(sys: FssSystem, cap: int = DEFAULT_LEMMA_CAP) -> LemmaReport:
    """Check the transfer of orbits, chains, non-singularity and periods to
    the full Koopman matrix M, using explicit indicator functions."""
    _check_size(sys, cap)
    report = LemmaReport()
    orc = brute_force_structure(sys, cap)
    M = full_koopman_by_interpolation(sys, cap)
    monos = all_monomials(sys.n, sys.p)
    size = M.rows

    # (a) orbit transfer
    reps = {}
    for length, rep in zip(orc.orbit_lengths, orc.cycle_reps):
        reps.setdefault(length, rep)
    bad = []
    for length, rep in sorted(reps.items()):
        got = _exact_period(_vector(orbit_indicator(sys, rep, cap), monos), M, length)
        if got != length:
            bad.append((length, got))
    report.add("orbit indicators", not bad, f"lengths {sorted(reps)}" + (f", mismatches {bad}" if bad else ""))

    # (b) non-singularity transfer
    invertible = rank(M) == size
    report.add("non-singularity", invertible == orc.nonsingular,
               f"M invertible={invertible}, F bijective={orc.nonsingular}")

    # (c) chain transfer; a chain that merges into a longer one is replaced by
    # the image of the longest chain indicator under the right power of M
    roots_by_len: dict = {}
    for r in orc.roots:
        roots_by_len.setdefault(orc.chain_length(r), []).append(r)
    bad = []
    longest = None
    if roots_by_len:
        top = max(roots_by_len)
        longest = _vector(chain_indicator(sys, roots_by_len[top][0], cap), monos)
    for length, roots in sorted(roots_by_len.items()):
        ok = False
        for r in roots[:4]:
            if _height(_vector(chain_indicator(sys, r, cap), monos), M, length) == length:
                ok = True
                break
        if not ok:
            c = mod_matmul(longest[None, :], matrix_power(M, max(roots_by_len) - length).a, M.p)[0]
            ok = _height(c, M, length) == length
        if not ok:
            bad.append(length)
    report.add("chain indicators", not bad, f"lengths {sorted(roots_by_len)}" + (f", failures {bad}" if bad else ""))

    # (d) period equality, nonsingular systems only
    if orc.nonsingular:
        nu = orc.fss_period
        least = _eventual_period(M, nu)
        ok = least == nu and matrix_power(M, nu) == MatrixFp.identity(size, M.p)
        report.add("period equality", ok, f"FSS period {nu}, least M^v = I at v={least}")
    else:
        report.add("period equality", True, "not applicable (F is not a bijection)")

    # (e) prime divisors of the orbit lengths against the eventual period of M
    L = lcm(*orc.orbit_lengths)
    d = _eventual_period(M, L)
    ok = d is not None and set(primefactors(L)) == set(primefactors(d))
    report.add("prime divisors", ok, f"lcm of orbit lengths {L}, eventual period of M {d}")
    return report
