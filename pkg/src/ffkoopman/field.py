"""Prime fields F_p and their elements."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DivisionByZero, FieldMismatch, NotPrime

# Deterministic for every n < 3.3e24, which covers the 2^64 range we need.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
MAX_MODULUS = 2**31 - 1


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for n < 2^64."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field F_p."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p > MAX_MODULUS or not is_prime(self.p):
            raise NotPrime(self.p)

    def __call__(self, value: int) -> FieldElem:
        return FieldElem(value % self.p, self)

    def elements(self):
        return [FieldElem(v, self) for v in range(self.p)]

    def __str__(self):
        return f"F_{self.p}"


def validate_prime(p: int) -> FieldSpec:
    if p < 2:
        raise NotPrime(p)
    return FieldSpec(p)


@dataclass(frozen=True)
class FieldElem:
    value: int
    spec: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.spec.p:
            raise ValueError(f"{self.value} is not a residue mod {self.spec.p}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.spec != self.spec:
                raise FieldMismatch(f"{self.spec} vs {other.spec}")
            return other.value
        if isinstance(other, int):
            return other % self.spec.p
        return NotImplemented

    def _new(self, v: int) -> FieldElem:
        return FieldElem(v % self.spec.p, self.spec)

    def __add__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(self.value + b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(self.value - b)

    def __rsub__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(b - self.value)

    def __mul__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(self.value * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self * inv(self._new(b))

    def __pow__(self, e: int):
        return power(self, e)

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.spec.p})"


def inv(a: FieldElem) -> FieldElem:
    if a.value == 0:
        raise DivisionByZero(f"0 has no inverse in {a.spec}")
    return FieldElem(pow(a.value, -1, a.spec.p), a.spec)


def power(a: FieldElem, e: int) -> FieldElem:
    """a**e by square-and-multiply; 0**0 is 1."""
    if e < 0:
        return power(inv(a), -e)
    result, base, p = 1, a.value, a.spec.p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return FieldElem(result % p, a.spec)


def inv_mod(a: int, p: int) -> int:
    """Integer-level inverse used by the matrix and polynomial code."""
    a %= p
    if a == 0:
        raise DivisionByZero(f"0 has no inverse mod {p}")
    return pow(a, -1, p)
