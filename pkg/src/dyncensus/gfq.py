"""Exact arithmetic in small finite fields F_q, q = p^k.

Elements are represented by their canonical integer encoding: the element
with coefficient vector (c_0, ..., c_{k-1}) in the power basis of the
modulus is the integer c_0 + c_1*p + ... + c_{k-1}*p^(k-1).  This makes
0 and 1 the additive and multiplicative identities, keeps prime-subfield
elements at encodings 0..p-1, and lets functional graphs index dense
arrays of size q directly.

The modulus is the lexicographically smallest monic irreducible of degree
k over F_p (coefficients compared constant term first), so a field built
from (p, k) is identical across runs and machines.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

DOMAIN_LIMIT = 2**20
LOG_TABLE_LIMIT = 2**16


class NonPrimeError(ValueError):
    """Raised when the requested characteristic is not prime."""


class DomainTooLargeError(ValueError):
    """Raised when p^k exceeds the configured domain limit."""


class FieldMismatchError(ValueError):
    """Raised when an operation mixes elements of different fields."""


class ZeroElementError(ZeroDivisionError):
    """Raised for inverses or multiplicative orders of zero."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division, as {prime: exponent}."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# -- polynomial helpers over Z_p (coefficient lists, constant term first) --


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m, coefficients mod p."""
    a = a[:]
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        lead = a[-1]
        shift = len(a) - 1 - dm
        if lead:
            for i, c in enumerate(m):
                a[shift + i] = (a[shift + i] - lead * c) % p
        a.pop()
    return _ptrim(a)


def _pmul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _is_irreducible(poly: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            divisor = list(low) + [1]
            if not _pmod(poly, divisor, p):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """An explicit model of F_{p^k}: characteristic, degree, and modulus.

    Immutable after construction; all operations are pure functions of the
    integer encodings, so a FieldSpec is safe to share across workers.
    """

    p: int
    k: int
    modulus: tuple[int, ...]

    @cached_property
    def q(self) -> int:
        return self.p**self.k

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, k={self.k}, q={self.q})"

    # -- encoding <-> coefficient vector --

    def coeffs(self, a: int) -> tuple[int, ...]:
        """Coefficient vector (c_0..c_{k-1}) of the element encoded by a."""
        self._check(a)
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return tuple(out)

    def encode(self, coeffs) -> int:
        cs = list(coeffs)
        if len(cs) != self.k:
            raise ValueError(f"expected {self.k} coefficients, got {len(cs)}")
        enc = 0
        for c in reversed(cs):
            enc = enc * self.p + c % self.p
        return enc

    def _check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise FieldMismatchError(f"{a} is not an element encoding of {self!r}")

    def elements(self):
        """All q elements in increasing encoding order."""
        return range(self.q)

    # -- ring operations --

    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.k == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        enc, mult = 0, 1
        while a or b:
            enc += ((a + b) % p) * mult
            a //= p
            b //= p
            mult *= p
        return enc

    def neg(self, a: int) -> int:
        p = self.p
        if self.k == 1:
            return (-a) % p
        enc, mult = 0, 1
        while a:
            enc += (-a % p) * mult
            a //= p
            mult *= p
        return enc

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        tables = self._log_tables
        if tables is not None:
            exp, log = tables
            return exp[(log[a] + log[b]) % (self.q - 1)]
        return self._mul_raw(a, b)

    def _mul_raw(self, a: int, b: int) -> int:
        prod = _pmul(list(self.coeffs(a)), list(self.coeffs(b)), self.p)
        red = _pmod(prod, list(self.modulus), self.p)
        red += [0] * (self.k - len(red))
        return self.encode(red)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroElementError("0 has no multiplicative inverse")
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        tables = self._log_tables
        if tables is not None:
            exp, log = tables
            return exp[(-log[a]) % (self.q - 1)]
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.k == 1:
            return pow(a, e, self.p)
        if a == 0:
            return 0 if e else 1
        tables = self._log_tables
        if tables is not None:
            exp, log = tables
            return exp[(log[a] * e) % (self.q - 1)]
        result, base = 1, a
        while e:
            if e & 1:
                result = self._mul_raw(result, base)
            base = self._mul_raw(base, base)
            e >>= 1
        return result

    # -- Galois structure --

    def frobenius(self, a: int, i: int = 1) -> int:
        """The i-th power of the automorphism x -> x^p; identity at i=0."""
        for _ in range(i % self.k if self.k > 1 else 0):
            a = self.pow(a, self.p)
        return a

    def norm(self, a: int) -> int:
        """Multiplicative norm down to F_p: a^(1+p+...+p^(k-1))."""
        if a == 0:
            return 0
        return self.pow(a, (self.q - 1) // (self.p - 1))

    def trace(self, a: int) -> int:
        """Additive trace down to F_p: a + a^p + ... + a^(p^(k-1))."""
        acc, x = 0, a
        for _ in range(self.k):
            acc = self.add(acc, x)
            x = self.pow(x, self.p)
        return acc

    def mult_order(self, a: int) -> int:
        """Smallest m >= 1 with a^m = 1; divides q-1."""
        if a == 0:
            raise ZeroElementError("0 has no multiplicative order")
        m = self.q - 1
        for prime in factorize(m):
            while m % prime == 0 and self.pow(a, m // prime) == 1:
                m //= prime
        return m

    @cached_property
    def primitive_element(self) -> int:
        """Generator of F_q^* with the smallest integer encoding."""
        n = self.q - 1
        primes = list(factorize(n))
        for a in range(1, self.q):
            if all(self.pow(a, n // ell) != 1 for ell in primes):
                return a
        raise AssertionError("no generator found; field construction is broken")

    # -- discrete-log tables (multiplication fast path) --

    @cached_property
    def _log_tables(self):
        if self.k == 1 or self.q > LOG_TABLE_LIMIT:
            return None
        return self.build_log_tables()

    def build_log_tables(self):
        """exp/log tables over a generator; exp[i] = g^i, log[exp[i]] = i."""
        n = self.q - 1
        primes = list(factorize(n))
        gen = None
        for a in range(2, self.q):
            ok = True
            for ell in primes:
                x, e = 1, n // ell
                b = a
                while e:
                    if e & 1:
                        x = self._mul_raw(x, b)
                    b = self._mul_raw(b, b)
                    e >>= 1
                if x == 1:
                    ok = False
                    break
            if ok:
                gen = a
                break
        assert gen is not None
        exp = [1] * n
        log = [0] * self.q
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = self._mul_raw(x, gen)
        return exp, log

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus)}


def _smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    if k == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=k):
        cand = list(low) + [1]
        if cand[0] == 0:
            continue  # constant term 0 means X divides it
        if _is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError(f"no irreducible of degree {k} over F_{p}")


@lru_cache(maxsize=None)
def make_field(p: int, k: int, domain_limit: int = DOMAIN_LIMIT) -> FieldSpec:
    """Build F_{p^k} with the canonical (smallest) modulus.

    Raises NonPrimeError for composite p and DomainTooLargeError when p^k
    exceeds the domain limit (successor arrays are O(q) memory).
    """
    if not is_prime(p):
        raise NonPrimeError(f"{p} is not prime")
    if k < 1:
        raise ValueError(f"extension degree must be >= 1, got {k}")
    if p**k > domain_limit:
        raise DomainTooLargeError(f"p^k = {p**k} exceeds limit {domain_limit}")
    field = FieldSpec(p=p, k=k, modulus=_smallest_irreducible(p, k))
    if field.q <= LOG_TABLE_LIMIT:
        field._log_tables  # build eagerly; census inner loops are mul-bound
    return field
