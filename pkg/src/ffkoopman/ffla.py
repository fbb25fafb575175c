"""Dense exact linear algebra and univariate polynomials over F_p.

Matrices are ``numpy.int64`` arrays with entries in [0, p).  With p below
2^31 every product of two entries fits in 63 bits; dot products are split
into chunks small enough that the accumulated sum cannot overflow.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import reduce as _fold
from typing import Sequence

import numpy as np
from sympy import factorint

from .errors import ConstantTermZero, DimensionMismatch, FieldMismatch
from .field import inv_mod

_FLOAT_EXACT = 2**53
_INT_SAFE = 2**63 - 1


def mod_matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p without overflow."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    k = a.shape[-1]
    if k == 0:
        shape = a.shape[:-1] + b.shape[1:]
        return np.zeros(shape, dtype=np.int64)
    bound = (p - 1) ** 2
    if k * bound < _FLOAT_EXACT:
        out = np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        return out % p
    if k * bound <= _INT_SAFE:
        return (a @ b) % p
    chunk = max(1, _INT_SAFE // bound)
    out = None
    for s in range(0, k, chunk):
        part = (a[..., s:s + chunk] @ b[s:s + chunk]) % p
        out = part if out is None else (out + part) % p
    return out


class MatrixFp:
    """A dense matrix over F_p."""

    __slots__ = ("a", "p")

    def __init__(self, data, p: int):
        a = np.array(data, dtype=np.int64)
        if a.ndim == 1 and a.size == 0:
            a = a.reshape(0, 0)
        if a.ndim != 2:
            raise DimensionMismatch("matrix data must be two-dimensional")
        self.a = a % p
        self.p = p

    @classmethod
    def identity(cls, n: int, p: int) -> MatrixFp:
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> MatrixFp:
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    def _same_field(self, other: MatrixFp):
        if other.p != self.p:
            raise FieldMismatch(f"F_{self.p} vs F_{other.p}")

    def __matmul__(self, other):
        if isinstance(other, MatrixFp):
            self._same_field(other)
            if self.cols != other.rows:
                raise DimensionMismatch(f"{self.shape} @ {other.shape}")
            return MatrixFp(mod_matmul(self.a, other.a, self.p), self.p)
        v = np.asarray(other, dtype=np.int64)
        if v.shape[0] != self.cols:
            raise DimensionMismatch(f"{self.shape} @ vector of length {v.shape[0]}")
        return mod_matmul(self.a, v % self.p, self.p)

    def __add__(self, other: MatrixFp) -> MatrixFp:
        self._same_field(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return MatrixFp(self.a + other.a, self.p)

    def __sub__(self, other: MatrixFp) -> MatrixFp:
        self._same_field(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return MatrixFp(self.a - other.a, self.p)

    def __neg__(self) -> MatrixFp:
        return MatrixFp(-self.a, self.p)

    def scale(self, c: int) -> MatrixFp:
        return MatrixFp(self.a * (int(c) % self.p), self.p)

    @property
    def T(self) -> MatrixFp:
        return MatrixFp(self.a.T, self.p)

    def __eq__(self, other):
        if not isinstance(other, MatrixFp):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(np.array_equal(self.a, other.a))

    def __hash__(self):
        return hash((self.p, self.shape, self.a.tobytes()))

    def __getitem__(self, idx):
        out = self.a[idx]
        if np.ndim(out) == 0:
            return int(out)
        if np.ndim(out) == 2:
            return MatrixFp(out, self.p)
        return out

    def is_zero(self) -> bool:
        return not self.a.any()

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    def __repr__(self):
        return f"MatrixFp({self.a.tolist()}, p={self.p})"

    def __pow__(self, e: int) -> MatrixFp:
        return matrix_power(self, e)


def as_matrix(A, p: int | None = None) -> MatrixFp:
    if isinstance(A, MatrixFp):
        return A
    if p is None:
        raise ValueError("modulus required")
    return MatrixFp(A, p)


def matrix_power(A: MatrixFp, e: int) -> MatrixFp:
    if A.rows != A.cols:
        raise DimensionMismatch("matrix_power needs a square matrix")
    if e < 0:
        raise ValueError("negative exponent")
    result = np.eye(A.rows, dtype=np.int64)
    base = A.a
    while e:
        if e & 1:
            result = mod_matmul(result, base, A.p)
        e >>= 1
        if e:
            base = mod_matmul(base, base, A.p)
    return MatrixFp(result, A.p)


# ---------------------------------------------------------------- elimination


def _rref(a: np.ndarray, p: int, pivot_cols: int | None = None):
    """Reduced row echelon form; pivots only among the first pivot_cols columns."""
    a = np.array(a, dtype=np.int64) % p
    rows, cols = a.shape
    limit = cols if pivot_cols is None else pivot_cols
    r = 0
    pivots = []
    for j in range(limit):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, j])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = a[r] * inv_mod(int(a[r, j]), p) % p
        col = a[:, j].copy()
        col[r] = 0
        idx = np.flatnonzero(col)
        if idx.size:
            a[idx] = (a[idx] - np.outer(col[idx], a[r])) % p
        pivots.append(j)
        r += 1
    return a, pivots


class Echelon:
    """Incrementally grown reduced row echelon basis of a subspace of F_p^width.

    ``pivot_limit`` restricts pivots to a prefix of the columns so that extra
    trailing columns can carry bookkeeping (e.g. combination coefficients).
    """

    def __init__(self, width: int, p: int, pivot_limit: int | None = None):
        self.width = width
        self.p = p
        self.limit = width if pivot_limit is None else pivot_limit
        self.rows = np.zeros((0, width), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64) % self.p
        if self.pivots:
            c = v[self.pivots]
            if c.any():
                v = (v - mod_matmul(c[None, :], self.rows, self.p)[0]) % self.p
        return v

    def contains(self, v) -> bool:
        return not self.reduce(v)[: self.limit].any()

    def insert(self, v, reduced: bool = False) -> bool:
        """Add v to the span; False if it was already there."""
        if not reduced:
            v = self.reduce(v)
        nz = np.flatnonzero(v[: self.limit])
        if nz.size == 0:
            return False
        j = int(nz[0])
        v = v * inv_mod(int(v[j]), self.p) % self.p
        if self.pivots:
            col = self.rows[:, j]
            idx = np.flatnonzero(col)
            if idx.size:
                self.rows[idx] = (self.rows[idx] - np.outer(col[idx], v)) % self.p
        self.rows = np.vstack([self.rows, v[None, :]])
        self.pivots.append(j)
        return True


@dataclass
class LinearSolution:
    """Result of solving A x = B.

    ``particular`` is None when the system is inconsistent; ``kernel`` holds
    a basis of the null space of A as rows.
    """

    rank: int
    particular: np.ndarray | None
    kernel: np.ndarray
    pivots: list

    @property
    def consistent(self) -> bool:
        return self.particular is not None

    @property
    def unique(self) -> bool:
        return self.consistent and self.kernel.shape[0] == 0


def rref_solve(A: MatrixFp, B) -> LinearSolution:
    p = A.p
    b = B.a if isinstance(B, MatrixFp) else np.asarray(B, dtype=np.int64)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    if b.shape[0] != A.rows:
        raise DimensionMismatch(f"A has {A.rows} rows, right-hand side has {b.shape[0]}")
    n = A.cols
    R, pivots = _rref(np.hstack([A.a, b % p]), p, pivot_cols=n)
    rank = len(pivots)
    consistent = not R[rank:, n:].any()
    particular = None
    if consistent:
        x = np.zeros((n, b.shape[1]), dtype=np.int64)
        for i, j in enumerate(pivots):
            x[j] = R[i, n:]
        particular = x[:, 0] if vector else x
    free = [j for j in range(n) if j not in set(pivots)]
    kernel = np.zeros((len(free), n), dtype=np.int64)
    for t, f in enumerate(free):
        kernel[t, f] = 1
        for i, j in enumerate(pivots):
            kernel[t, j] = (-R[i, f]) % p
    return LinearSolution(rank, particular, kernel, pivots)


def rank(A: MatrixFp) -> int:
    return len(_rref(A.a, A.p)[1])


def kernel(A: MatrixFp) -> np.ndarray:
    """Basis of {x : A x = 0} as rows."""
    return rref_solve(A, np.zeros(A.rows, dtype=np.int64)).kernel


def inverse(A: MatrixFp) -> MatrixFp:
    if A.rows != A.cols:
        raise DimensionMismatch("inverse needs a square matrix")
    sol = rref_solve(A, MatrixFp.identity(A.rows, A.p))
    if sol.rank != A.rows:
        raise ZeroDivisionError("matrix is singular")
    return MatrixFp(sol.particular, A.p)


def enumerate_span(basis: np.ndarray, p: int, offset=None) -> np.ndarray:
    """All vectors offset + sum c_i basis_i, one per row (p^d rows)."""
    basis = np.asarray(basis, dtype=np.int64)
    d, width = basis.shape if basis.ndim == 2 else (0, len(offset))
    count = p**d
    coeffs = np.zeros((count, d), dtype=np.int64)
    idx = np.arange(count)
    for i in range(d - 1, -1, -1):
        coeffs[:, i] = idx % p
        idx //= p
    out = mod_matmul(coeffs, basis, p) if d else np.zeros((1, width), dtype=np.int64)
    if offset is not None:
        out = (out + np.asarray(offset, dtype=np.int64)) % p
    return out


# ---------------------------------------------------------------- univariate polynomials


def _trim(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list:
    if not a or not b:
        return []
    if min(len(a), len(b)) > 24 and p < 2**20:
        out = np.convolve(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)) % p
        return _trim(out.tolist())
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _trim([v % p for v in out])


def _pdivmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list, list]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    if len(a) <= db:
        return [], list(a)
    lead_inv = inv_mod(b[-1], p)
    q = [0] * (len(a) - db)
    if db > 24:
        r = np.asarray(a, dtype=np.int64).copy()
        bb = np.asarray(b, dtype=np.int64)
        for i in range(len(a) - 1 - db, -1, -1):
            c = int(r[i + db]) * lead_inv % p
            if c:
                q[i] = c
                r[i:i + db + 1] = (r[i:i + db + 1] - c * bb) % p
        return _trim(q), _trim(r[:db].tolist())
    r = list(a)
    for i in range(len(a) - 1 - db, -1, -1):
        c = r[i + db] * lead_inv % p
        if c:
            q[i] = c
            for j in range(db + 1):
                r[i + j] = (r[i + j] - c * b[j]) % p
    return _trim(q), _trim(r[:db])


class UniPoly:
    """Polynomial in one variable over F_p, coefficients stored low to high."""

    __slots__ = ("coeffs", "p")

    def __init__(self, coeffs: Sequence[int], p: int):
        self.coeffs = tuple(_trim([int(c) % p for c in coeffs]))
        self.p = p

    @classmethod
    def x(cls, p: int) -> UniPoly:
        return cls([0, 1], p)

    @classmethod
    def const(cls, c: int, p: int) -> UniPoly:
        return cls([c], p)

    @classmethod
    def monomial(cls, d: int, p: int, c: int = 1) -> UniPoly:
        return cls([0] * d + [c], p)

    @classmethod
    def from_roots(cls, roots: Sequence[int], p: int) -> UniPoly:
        return _fold(lambda acc, r: acc * cls([-r, 1], p), roots, cls.const(1, p))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == (1,)

    def is_monic(self) -> bool:
        return self.lead == 1

    def monic(self) -> UniPoly:
        if not self.coeffs or self.lead == 1:
            return self
        return self.scale(inv_mod(self.lead, self.p))

    def scale(self, c: int) -> UniPoly:
        return UniPoly([v * c for v in self.coeffs], self.p)

    def _lift(self, other) -> UniPoly:
        if isinstance(other, UniPoly):
            if other.p != self.p:
                raise FieldMismatch(f"F_{self.p} vs F_{other.p}")
            return other
        if isinstance(other, int):
            return UniPoly([other], self.p)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return UniPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], self.p)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], self.p)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return UniPoly(_pmul(self.coeffs, other.coeffs, self.p), self.p)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._lift(other)
        q, r = _pdivmod(self.coeffs, other.coeffs, self.p)
        return UniPoly(q, self.p), UniPoly(r, self.p)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, e: int) -> UniPoly:
        result = UniPoly.const(1, self.p)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def powmod(self, e: int, mod: UniPoly) -> UniPoly:
        result = UniPoly.const(1, self.p) % mod
        base = self % mod
        while e:
            if e & 1:
                result = (result * base) % mod
            e >>= 1
            if e:
                base = (base * base) % mod
        return result

    def divides(self, other: UniPoly) -> bool:
        return (other % self).is_zero()

    def derivative(self) -> UniPoly:
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:], self.p)

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def __eq__(self, other):
        if isinstance(other, int):
            other = UniPoly([other], self.p)
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def sort_key(self):
        return (self.degree, self.coeffs)

    def __lt__(self, other: UniPoly):
        return self.sort_key() < other.sort_key()

    def to_string(self, var: str = "x", compact: bool = False) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for d in range(self.degree, -1, -1):
            c = self.coeffs[d]
            if not c:
                continue
            mono = "" if d == 0 else (var if d == 1 else f"{var}^{d}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return ("+" if compact else " + ").join(parts)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"UniPoly({self.to_string()!r}, p={self.p})"


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: UniPoly, b: UniPoly) -> UniPoly:
    if a.is_zero() or b.is_zero():
        return UniPoly([], a.p)
    return (a * b // poly_gcd(a, b)).monic()


def poly_eval_matrix(f: UniPoly, A: MatrixFp) -> MatrixFp:
    """f(A) by Horner's rule."""
    n = A.rows
    acc = np.zeros((n, n), dtype=np.int64)
    eye = np.eye(n, dtype=np.int64)
    for c in reversed(f.coeffs):
        acc = (mod_matmul(acc, A.a, A.p) + c * eye) % A.p
    return MatrixFp(acc, A.p)


@dataclass(frozen=True)
class ElementaryDivisor:
    base: UniPoly
    multiplicity: int

    @property
    def poly(self) -> UniPoly:
        return self.base ** self.multiplicity

    def __str__(self):
        return format_factored([(self.base, self.multiplicity)])


def format_factored(factors, var: str = "x", lead: int = 1) -> str:
    """Render e.g. ``x^4 (x+1)^2 (x^4+x^3+x^2+x+1)^2``."""
    parts = [] if lead == 1 else [str(lead)]
    for base, mult in factors:
        s = base.to_string(var, compact=True)
        if len(base.coeffs) > 2 or base.coeffs[0] != 0 or base.lead != 1:
            s = f"({s})"
        parts.append(s if mult == 1 else f"{s}^{mult}")
    return " ".join(parts) if parts else "1"


# ---------------------------------------------------------------- factorization


def _pth_root(f: UniPoly) -> UniPoly:
    # Over F_p the p-th root of a coefficient is itself.
    p = f.p
    return UniPoly(f.coeffs[::p], p)


def squarefree_decomposition(f: UniPoly) -> list[tuple[UniPoly, int]]:
    """Pairs (g, m) with f = lead * prod g^m and each g squarefree, monic."""
    f = f.monic()
    if f.degree <= 0:
        return []
    out = []
    i = 1
    c = poly_gcd(f, f.derivative())
    w = f // c
    while not w.is_one():
        y = poly_gcd(w, c)
        z = w // y
        if z.degree > 0:
            out.append((z.monic(), i))
        i += 1
        w = y
        c = c // y
    if c.degree > 0:
        for g, m in squarefree_decomposition(_pth_root(c.monic())):
            out.append((g, m * f.p))
    return out


def distinct_degree(f: UniPoly) -> list[tuple[UniPoly, int]]:
    """Split squarefree monic f into products of irreducibles of equal degree d."""
    p = f.p
    out = []
    x = UniPoly.x(p)
    h = x % f
    d = 0
    while f.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(p, f)
        g = poly_gcd(h - x, f)
        if not g.is_one():
            out.append((g, d))
            f = f // g
            h = h % f
    if f.degree > 0:
        out.append((f.monic(), f.degree))
    return out


def _linear_roots(g: UniPoly) -> list[UniPoly]:
    return [UniPoly([-r, 1], g.p) for r in range(g.p) if g(r) == 0]


def equal_degree(g: UniPoly, d: int, rng: random.Random) -> list[UniPoly]:
    """Irreducible factors of g, a product of distinct degree-d irreducibles."""
    p = g.p
    if g.degree == d:
        return [g.monic()]
    if d == 1 and p <= 1024:
        return _linear_roots(g)
    while True:
        a = UniPoly([rng.randrange(p) for _ in range(g.degree)], p)
        if a.degree < 1:
            continue
        if p == 2:
            # Trace map a + a^2 + ... + a^(2^(d-1)).
            t, s = a % g, a % g
            for _ in range(d - 1):
                s = (s * s) % g
                t = t + s
            b = t
        else:
            b = a.powmod((p**d - 1) // 2, g) - UniPoly.const(1, p)
        h = poly_gcd(b, g)
        if 0 < h.degree < g.degree:
            return equal_degree(h, d, rng) + equal_degree(g // h, d, rng)


def factor_univariate(f: UniPoly, seed: int = 0) -> list[tuple[UniPoly, int]]:
    """Monic irreducible factors with multiplicities, sorted by (degree, coefficients).

    The leading coefficient is dropped; equal-degree splitting is seeded.
    """
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    rng = random.Random(seed)
    out: dict[UniPoly, int] = {}
    for g, m in squarefree_decomposition(f):
        for h, d in distinct_degree(g):
            for q in equal_degree(h, d, rng):
                out[q] = out.get(q, 0) + m
    return sorted(out.items(), key=lambda t: t[0].sort_key())


def is_irreducible(f: UniPoly) -> bool:
    if f.degree < 1:
        return False
    if f.degree == 1:
        return True
    sq = squarefree_decomposition(f)
    if len(sq) != 1 or sq[0][1] != 1:
        return False
    dd = distinct_degree(f.monic())
    return len(dd) == 1 and dd[0][1] == f.degree


def poly_order(f: UniPoly) -> int:
    """Least e >= 1 with f | x^e - 1, for irreducible f with f(0) != 0."""
    if f.degree < 1:
        raise ValueError("order of a constant polynomial is undefined")
    if f.coeffs[0] == 0:
        raise ConstantTermZero(f"{f} has zero constant term")
    if not is_irreducible(f):
        raise ValueError(f"{f} is not irreducible")
    f = f.monic()
    x = UniPoly.x(f.p)
    e = f.p**f.degree - 1
    for q, k in factorint(e).items():
        for _ in range(k):
            if x.powmod(e // q, f).is_one():
                e //= q
            else:
                break
    return e


def prime_power_ceiling(k: int, p: int) -> int:
    """p^ceil(log_p k): the least power of p that is >= k."""
    t = 1
    while t < k:
        t *= p
    return t


# ---------------------------------------------------------------- matrix invariants


def minimal_polynomial(A: MatrixFp) -> UniPoly:
    """Least common multiple of the minimal polynomials of Krylov sequences.

    Standard basis vectors already inside the sum of processed Krylov spaces
    are skipped: the running lcm annihilates them already.
    """
    if A.rows != A.cols:
        raise DimensionMismatch("minimal_polynomial needs a square matrix")
    n, p = A.rows, A.p
    mp = UniPoly.const(1, p)
    covered = Echelon(n, p)
    for i in range(n):
        if covered.rank == n:
            break
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        if covered.contains(e):
            continue
        local = Echelon(2 * n + 1, p, pivot_limit=n)
        w = e
        k = 0
        while True:
            aug = np.zeros(2 * n + 1, dtype=np.int64)
            aug[:n] = w
            aug[n + k] = 1
            r = local.reduce(aug)
            if not r[:n].any():
                mp = poly_lcm(mp, UniPoly(r[n:n + k + 1].tolist(), p))
                break
            local.insert(r, reduced=True)
            covered.insert(w)
            w = mod_matmul(A.a, w, p)
            k += 1
    return mp


def elementary_divisors(A: MatrixFp, seed: int = 0) -> list[ElementaryDivisor]:
    """Elementary divisors of A, one entry per companion block.

    For each irreducible factor f of the minimal polynomial the block sizes
    come from the rank sequence of f(A)^k.
    """
    n = A.rows
    out = []
    for f, top in factor_univariate(minimal_polynomial(A), seed=seed):
        B = poly_eval_matrix(f, A)
        ranks = [n]
        P = MatrixFp.identity(n, A.p)
        for _ in range(top + 1):
            P = P @ B
            ranks.append(rank(P))
        at_least = [(ranks[k - 1] - ranks[k]) // f.degree for k in range(1, top + 2)]
        for k in range(top, 0, -1):
            count = at_least[k - 1] - at_least[k]
            out.extend(ElementaryDivisor(f, k) for _ in range(count))
    return sorted(out, key=lambda d: (d.base.sort_key(), -d.multiplicity))


def invariant_factors(A: MatrixFp) -> list[UniPoly]:
    """Nontrivial invariant factors d1 | d2 | ... of A via the Smith form of xI - A."""
    if A.rows != A.cols:
        raise DimensionMismatch("invariant_factors needs a square matrix")
    n, p = A.rows, A.p
    x = UniPoly.x(p)
    M = [[(x if i == j else UniPoly([], p)) - UniPoly([int(A.a[i, j])], p) for j in range(n)] for i in range(n)]
    diag = []
    for t in range(n):
        while True:
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    if not M[i][j].is_zero() and (best is None or M[i][j].degree < best[0]):
                        best = (M[i][j].degree, i, j)
            if best is None:
                return [d for d in diag if d.degree > 0]
            _, i, j = best
            M[t], M[i] = M[i], M[t]
            for row in M:
                row[t], row[j] = row[j], row[t]
            piv = M[t][t]
            clean = True
            for i in range(t + 1, n):
                if not M[i][t].is_zero():
                    q, r = divmod(M[i][t], piv)
                    M[i] = [a - q * b for a, b in zip(M[i], M[t])]
                    clean = clean and r.is_zero()
            for j in range(t + 1, n):
                if not M[t][j].is_zero():
                    q, r = divmod(M[t][j], piv)
                    for row in M:
                        row[j] = row[j] - q * row[t]
                    clean = clean and r.is_zero()
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, n) for j in range(t + 1, n) if not piv.divides(M[i][j])),
                None,
            )
            if bad is None:
                break
            M[t] = [a + b for a, b in zip(M[t], M[bad])]
        diag.append(M[t][t].monic())
    return [d for d in diag if d.degree > 0]


def characteristic_polynomial(A: MatrixFp) -> UniPoly:
    return _fold(lambda a, b: a * b, invariant_factors(A), UniPoly.const(1, A.p))


def divisors_to_invariant_factors(divisors: Sequence[ElementaryDivisor], p: int) -> list[UniPoly]:
    """Reassemble invariant factors from elementary divisors."""
    groups: dict[UniPoly, list[int]] = {}
    for d in divisors:
        groups.setdefault(d.base, []).append(d.multiplicity)
    length = max((len(v) for v in groups.values()), default=0)
    factors = [UniPoly.const(1, p) for _ in range(length)]
    for base, mults in groups.items():
        mults = sorted(mults)
        for k, m in enumerate(mults):
            factors[length - len(mults) + k] = factors[length - len(mults) + k] * base**m
    return factors
