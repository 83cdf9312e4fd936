"""
Galois Field Arithmetic
=======================

Exact arithmetic in GF(q) for q = p^k, the substrate for coordinatizing
PG(2, q).

Elements are the integers 0..q-1. An element encodes the polynomial whose
coefficient of x^i is the i-th base-p digit, so GF(4) = {0, 1, x, x+1} is
{0, 1, 2, 3}. Fields with q <= 256 precompute full addition, multiplication
and inverse tables; larger fields compute directly.

Public API:
    Field: Immutable field context with add/sub/neg/mul/inv/div/pow
    make_field: Build GF(q) with the lexicographically smallest monic irreducible modulus
    find_modulus: The modulus make_field selects for GF(p^k)
    is_prime_power: Whether q is the order of some finite field
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator
from dataclasses import dataclass, field

from sympy import Poly, factorint
from sympy.abc import x as _x

from common.exceptions import BadRangeError, DivisionByZeroError, NotPrimePowerError

# Fields up to this order get full lookup tables
TABLE_LIMIT = 256


@dataclass(frozen=True)
class Field:
    """
    GF(p^k) with elements encoded as base-p coefficient vectors.

    Attributes:
        p: Characteristic (prime)
        k: Extension degree (>= 1)
        modulus: Monic irreducible polynomial of degree k, constant term first
    """

    p: int
    k: int
    modulus: tuple[int, ...]
    q: int = field(init=False)
    _add: tuple[int, ...] | None = field(init=False, repr=False, compare=False)
    _mul: tuple[int, ...] | None = field(init=False, repr=False, compare=False)
    _inv: tuple[int, ...] | None = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.modulus) != self.k + 1 or self.modulus[-1] != 1:
            raise BadRangeError(f"modulus must be monic of degree {self.k}, got: {self.modulus}")
        q = self.p**self.k
        object.__setattr__(self, "q", q)
        add_table = mul_table = inv_table = None
        if q <= TABLE_LIMIT:
            add_table = tuple(self._add_direct(a, b) for a in range(q) for b in range(q))
            mul_table = tuple(self._mul_direct(a, b) for a in range(q) for b in range(q))
            inverses = [0] * q
            for a in range(1, q):
                for b in range(1, q):
                    if mul_table[a * q + b] == 1:
                        inverses[a] = b
                        break
            inv_table = tuple(inverses)
        object.__setattr__(self, "_add", add_table)
        object.__setattr__(self, "_mul", mul_table)
        object.__setattr__(self, "_inv", inv_table)

    # ------------------------------------------------------------------
    # Field operations
    # ------------------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        if self._add is not None:
            return self._add[a * self.q + b]
        return self._add_direct(a, b)

    def neg(self, a: int) -> int:
        self._check(a)
        if self.k == 1:
            return (-a) % self.p
        return self._encode([(-d) % self.p for d in self._digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        if self._mul is not None:
            return self._mul[a * self.q + b]
        return self._mul_direct(a, b)

    def inv(self, a: int) -> int:
        """Multiplicative inverse.

        Raises:
            DivisionByZeroError: If a == 0
        """
        self._check(a)
        if a == 0:
            raise DivisionByZeroError(f"0 has no inverse in GF({self.q})")
        if self._inv is not None:
            return self._inv[a]
        # a^(q-2) = a^-1 in the multiplicative group of order q-1
        return self._pow_nonneg(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        """a**e, with negative exponents through the inverse; pow(0, 0) == 1."""
        self._check(a)
        if e < 0:
            return self._pow_nonneg(self.inv(a), -e)
        return self._pow_nonneg(a, e)

    def frobenius(self, a: int) -> int:
        """The Frobenius automorphism a -> a^p."""
        return self.pow(a, self.p)

    def elements(self) -> Iterator[int]:
        return iter(range(self.q))

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _check(self, *values: int) -> None:
        for value in values:
            if not 0 <= value < self.q:
                raise BadRangeError(f"{value} is not an element of GF({self.q})")

    def _digits(self, a: int) -> list[int]:
        digits = []
        for _ in range(self.k):
            a, d = divmod(a, self.p)
            digits.append(d)
        return digits

    def _encode(self, digits: list[int]) -> int:
        value = 0
        for d in reversed(digits):
            value = value * self.p + d
        return value

    def _add_direct(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self._encode([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b), strict=True)])

    def _mul_direct(self, a: int, b: int) -> int:
        p, k = self.p, self.k
        if k == 1:
            return (a * b) % p
        product = [0] * (2 * k - 1)
        for i, x in enumerate(self._digits(a)):
            if x:
                for j, y in enumerate(self._digits(b)):
                    product[i + j] = (product[i + j] + x * y) % p
        # Reduce from the top degree down using x^k = -(modulus without leading term)
        for degree in range(2 * k - 2, k - 1, -1):
            c = product[degree]
            if c:
                for i in range(k + 1):
                    product[degree - k + i] = (product[degree - k + i] - c * self.modulus[i]) % p
        return self._encode(product[:k])

    def _pow_nonneg(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result


def make_field(q: int) -> Field:
    """
    Build GF(q).

    Args:
        q: Field order, a prime power >= 2

    Returns:
        Field with q = p^k; for k >= 2 the modulus is the lexicographically
        smallest monic irreducible polynomial, coefficients compared from the
        constant term upward.

    Raises:
        NotPrimePowerError: If q < 2 or q has two distinct prime factors
    """
    if q < 2:
        raise NotPrimePowerError(f"Field order must be a prime power >= 2, got: {q}")
    factors = factorint(q)
    if len(factors) != 1:
        raise NotPrimePowerError(f"Field order must be a prime power, got: {q} = {factors}")
    ((p, k),) = factors.items()
    return Field(p=int(p), k=int(k), modulus=find_modulus(int(p), int(k)))


def is_prime_power(q: int) -> bool:
    """True for q = p^k with p prime and k >= 1."""
    return q >= 2 and len(factorint(q)) == 1


def find_modulus(p: int, k: int) -> tuple[int, ...]:
    """Return the first monic irreducible of degree k over GF(p), constant term first.

    For k = 1 this is x itself, (0, 1).
    """
    if k == 1:
        return (0, 1)
    # product() varies the last position fastest, so the constant term is the most significant key
    for lower in itertools.product(range(p), repeat=k):
        if lower[0] == 0:
            continue  # divisible by x
        coefficients = (*lower, 1)
        if Poly(list(reversed(coefficients)), _x, modulus=p).is_irreducible:
            return coefficients
    raise NotPrimePowerError(f"No irreducible polynomial of degree {k} over GF({p})")
