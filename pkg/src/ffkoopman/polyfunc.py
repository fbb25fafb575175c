"""Reduced multivariate polynomials as functions F_p^n -> F_p.

Every exponent is kept below p via x^p = x, so a polynomial and the function
it defines determine each other.  Monomials are exponent tuples; the global
order is graded lexicographic with x1 the most significant variable.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, FieldMismatch, IndexOutOfRange
from .ffla import mod_matmul
from .field import FieldElem, FieldSpec

Monomial = tuple


def reduce_exponent(e: int, p: int) -> int:
    """Smallest exponent e' < p with x^e = x^e' for every x in F_p."""
    if e < 0:
        raise ValueError("negative exponent")
    if e == 0:
        return 0
    return (e - 1) % (p - 1) + 1


def monomial_key(m: Monomial):
    return (sum(m), m)


class PolyFunc:
    """Immutable reduced polynomial in n variables over F_p."""

    __slots__ = ("field", "n", "_terms", "_hash")

    def __init__(self, field: FieldSpec, n: int, terms: Mapping[Monomial, int] | None = None):
        # Trusted constructor: terms must already be reduced with nonzero coefficients.
        self.field = field
        self.n = n
        self._terms = dict(terms) if terms else {}
        self._hash = None

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def terms(self) -> list[tuple[Monomial, int]]:
        """Terms in descending monomial order."""
        return sorted(self._terms.items(), key=lambda t: monomial_key(t[0]), reverse=True)

    def coeff(self, m: Monomial) -> int:
        return self._terms.get(tuple(m), 0)

    def monomials(self):
        return self._terms.keys()

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def _check(self, other: PolyFunc):
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if other.n != self.n:
            raise DimensionMismatch(f"{self.n} vs {other.n} variables")

    def _lift(self, other):
        if isinstance(other, PolyFunc):
            self._check(other)
            return other
        if isinstance(other, (int, FieldElem)):
            return constant(int(other), self.n, self.field)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return PolyFunc(self.field, self.n, _axpy(self._terms, other._terms, 1, self.p))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return PolyFunc(self.field, self.n, _axpy(self._terms, other._terms, -1, self.p))

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c: int) -> PolyFunc:
        c = int(c) % self.p
        if c == 0:
            return PolyFunc(self.field, self.n)
        return PolyFunc(self.field, self.n, {m: v * c % self.p for m, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, FieldElem)):
            return self.scale(int(other))
        if not isinstance(other, PolyFunc):
            return NotImplemented
        self._check(other)
        return PolyFunc(self.field, self.n, _mul_terms(self._terms, other._terms, self.p))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> PolyFunc:
        # As functions f^e = f^e' with e' the reduced exponent, and 0^0 = 1.
        e = reduce_exponent(int(e), self.p)
        result = constant(1, self.n, self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, PolyFunc):
            return NotImplemented
        return self.field == other.field and self.n == other.n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.p, self.n, frozenset(self._terms.items())))
        return self._hash

    def __call__(self, x: Sequence[int]) -> int:
        return evaluate(self, x)

    def to_string(self, names: Sequence[str] | None = None) -> str:
        return render_poly(self, names)

    def __str__(self):
        return render_poly(self)

    def __repr__(self):
        return f"PolyFunc({render_poly(self)!r}, n={self.n}, p={self.p})"


def _axpy(a: Mapping, b: Mapping, c: int, p: int) -> dict:
    """a + c*b over F_p, dropping zeros."""
    out = dict(a)
    for m, v in b.items():
        w = (out.get(m, 0) + c * v) % p
        if w:
            out[m] = w
        else:
            out.pop(m, None)
    return out


def _exponent_table(p: int):
    if p > 4096:
        return None
    return [0] + [(e - 1) % (p - 1) + 1 for e in range(1, 2 * p - 1)]


_TABLES: dict[int, list | None] = {}


def _mul_terms(a: Mapping, b: Mapping, p: int) -> dict:
    if len(a) > len(b):
        a, b = b, a
    table = _TABLES.get(p)
    if p not in _TABLES:
        table = _TABLES[p] = _exponent_table(p)
    out: dict = {}
    get = out.get
    for ma, ca in a.items():
        for mb, cb in b.items():
            if table is not None:
                m = tuple([table[i + j] for i, j in zip(ma, mb)])
            else:
                m = tuple(reduce_exponent(i + j, p) for i, j in zip(ma, mb))
            out[m] = (get(m, 0) + ca * cb) % p
    return {m: v for m, v in out.items() if v}


def reduce(raw: Iterable[tuple[Sequence[int], int]] | Mapping, n: int, field: FieldSpec) -> PolyFunc:
    """Canonical PolyFunc from terms with arbitrary nonnegative exponents."""
    p = field.p
    items = raw.items() if isinstance(raw, Mapping) else raw
    out: dict = {}
    for exps, c in items:
        exps = tuple(int(e) for e in exps)
        if len(exps) != n:
            raise DimensionMismatch(f"monomial {exps} has {len(exps)} exponents, expected {n}")
        m = tuple(reduce_exponent(e, p) for e in exps)
        out[m] = (out.get(m, 0) + int(c)) % p
    return PolyFunc(field, n, {m: v for m, v in out.items() if v})


def constant(c: int, n: int, field: FieldSpec) -> PolyFunc:
    c = int(c) % field.p
    return PolyFunc(field, n, {(0,) * n: c} if c else None)


def coordinate(i: int, n: int, field: FieldSpec) -> PolyFunc:
    """The coordinate function x_i (1-based index)."""
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"coordinate {i} outside 1..{n}")
    m = [0] * n
    m[i - 1] = 1
    return PolyFunc(field, n, {tuple(m): 1})


def evaluate(f: PolyFunc, x: Sequence[int]) -> int:
    if len(x) != f.n:
        raise DimensionMismatch(f"point has {len(x)} coordinates, expected {f.n}")
    p = f.p
    x = [int(v) % p for v in x]
    total = 0
    for m, c in f._terms.items():
        t = c
        for xi, e in zip(x, m):
            if e:
                t = t * pow(xi, e, p) % p
                if not t:
                    break
        total += t
    return total % p


def eval_many(f: PolyFunc, X: np.ndarray) -> np.ndarray:
    """Evaluate f at every row of the integer array X (shape k x n)."""
    X = np.asarray(X, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != f.n:
        raise DimensionMismatch(f"expected points with {f.n} coordinates")
    p = f.p
    X = X % p
    out = np.zeros(X.shape[0], dtype=np.int64)
    powers: dict = {}
    for m, c in f._terms.items():
        t = np.full(X.shape[0], c, dtype=np.int64)
        for i, e in enumerate(m):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = _int_pow_mod(X[:, i], e, p)
                t = t * powers[key] % p
        out = (out + t) % p
    return out


def eval_many_funcs(fs: Sequence[PolyFunc], X: np.ndarray, chunk_cells: int = 1 << 22) -> np.ndarray:
    """Evaluate several polynomials on the rows of X; column j holds fs[j].

    All distinct monomials are evaluated once from per-variable power tables
    and combined with one modular matrix product.
    """
    X = np.asarray(X, dtype=np.int64)
    if not fs:
        return np.zeros((X.shape[0], 0), dtype=np.int64)
    n, p = fs[0].n, fs[0].p
    if X.ndim != 2 or X.shape[1] != n:
        raise DimensionMismatch(f"expected points with {n} coordinates")
    monos = sorted({m for f in fs for m in f._terms})
    if not monos:
        return np.zeros((X.shape[0], len(fs)), dtype=np.int64)
    col = {m: j for j, m in enumerate(monos)}
    coef = np.zeros((len(monos), len(fs)), dtype=np.int64)
    for j, f in enumerate(fs):
        for m, c in f._terms.items():
            coef[col[m], j] = c
    E = np.asarray(monos, dtype=np.int64)
    used = [i for i in range(n) if E[:, i].any()]
    X = X % p
    out = np.empty((X.shape[0], len(fs)), dtype=np.int64)
    step = max(1, chunk_cells // len(monos))
    for start in range(0, X.shape[0], step):
        Xc = X[start:start + step]
        V = np.ones((Xc.shape[0], len(monos)), dtype=np.int64)
        for i in used:
            table = np.ones((Xc.shape[0], p), dtype=np.int64)
            for e in range(1, p):
                table[:, e] = table[:, e - 1] * Xc[:, i] % p
            V = V * table[:, E[:, i]] % p
        out[start:start + step] = mod_matmul(V, coef, p)
    return out


def _int_pow_mod(v: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.ones_like(v)
    base = v.copy()
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


class Substitution:
    """The Koopman operator f -> f o F with monomial images cached.

    Composition is a ring homomorphism, so the image of x^a is built from a
    smaller monomial's image times one component of F.
    """

    def __init__(self, F: Sequence[PolyFunc]):
        if not F:
            raise DimensionMismatch("empty map")
        n = len(F)
        field = F[0].field
        for Fi in F:
            if Fi.field != field:
                raise FieldMismatch("components of F over different fields")
            if Fi.n != n:
                raise DimensionMismatch(f"component of F has {Fi.n} variables, expected {n}")
        self.F = tuple(F)
        self.n = n
        self.field = field
        self._cache: dict = {(0,) * n: {(0,) * n: 1}}

    def monomial_image(self, m: Monomial) -> dict:
        cached = self._cache.get(m)
        if cached is not None:
            return cached
        # Peel off the last variable with a positive exponent.
        i = max(k for k, e in enumerate(m) if e)
        smaller = list(m)
        smaller[i] -= 1
        img = _mul_terms(self.monomial_image(tuple(smaller)), self.F[i]._terms, self.field.p)
        self._cache[m] = img
        return img

    def __call__(self, f: PolyFunc) -> PolyFunc:
        if f.field != self.field:
            raise FieldMismatch(f"{f.field} vs {self.field}")
        if f.n != self.n:
            raise DimensionMismatch(f"{f.n} vs {self.n} variables")
        p = self.field.p
        out: dict = {}
        get = out.get
        for m, c in f._terms.items():
            for mm, v in self.monomial_image(m).items():
                out[mm] = (get(mm, 0) + c * v) % p
        return PolyFunc(self.field, self.n, {m: v for m, v in out.items() if v})


def koopman_apply(f: PolyFunc, F: Sequence[PolyFunc]) -> PolyFunc:
    """Reduced representative of x -> f(F_1(x), ..., F_n(x))."""
    if len(F) != f.n:
        raise DimensionMismatch(f"map has {len(F)} components, f has {f.n} variables")
    return Substitution(F)(f)


def all_monomials(n: int, p: int) -> list[Monomial]:
    """Every reduced monomial, ascending in graded-lex order."""
    from itertools import product

    return sorted(product(range(p), repeat=n), key=monomial_key)


def default_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(1, n + 1)]


def render_monomial(m: Monomial, names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(names, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def render_poly(f: PolyFunc, names: Sequence[str] | None = None) -> str:
    """Canonical text, e.g. ``x1^2 + x1*x2 + 2``."""
    names = list(names) if names is not None else default_names(f.n)
    if len(names) != f.n:
        raise DimensionMismatch(f"{len(names)} names for {f.n} variables")
    if f.is_zero():
        return "0"
    pieces = []
    for m, c in f.terms:
        mono = render_monomial(m, names)
        if not mono:
            pieces.append(str(c))
        elif c == 1:
            pieces.append(mono)
        else:
            pieces.append(f"{c}*{mono}")
    return " + ".join(pieces)
