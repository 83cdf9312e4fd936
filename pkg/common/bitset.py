"""
Dense Bitsets
=============

Immutable bitsets over a fixed universe 0..size-1, backed by a Python int.

PointSet and LineSet are distinct subclasses so that signatures say which
index space a set lives in; the set algebra is shared.

Public API:
    Bitset: Base immutable bitset
    PointSet: Bitset over point indices
    LineSet: Bitset over line indices
    iter_bits: Iterate the set bit positions of an int in ascending order
    mask_of: Build an int mask from indices
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the positions of the set bits of `bits`, ascending."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def mask_of(indices: Iterable[int]) -> int:
    """Return the int mask with exactly the given bit positions set."""
    bits = 0
    for index in indices:
        bits |= 1 << index
    return bits


class Bitset:
    """An immutable set of indices in range(size)."""

    __slots__ = ("_bits", "_size")

    def __init__(self, size: int, bits: int = 0) -> None:
        if size < 0:
            raise ValueError(f"size must be non-negative, got {size}")
        if bits < 0 or bits >> size:
            raise ValueError(f"bits outside universe of size {size}")
        self._size = size
        self._bits = bits

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]) -> Self:
        """Build a bitset from indices, rejecting any outside 0..size-1."""
        bits = 0
        for index in indices:
            if not 0 <= index < size:
                raise ValueError(f"index {index} outside universe of size {size}")
            bits |= 1 << index
        return cls(size, bits)

    @classmethod
    def full(cls, size: int) -> Self:
        return cls(size, (1 << size) - 1)

    @classmethod
    def empty(cls, size: int) -> Self:
        return cls(size, 0)

    @property
    def bits(self) -> int:
        """The backing int mask."""
        return self._bits

    @property
    def size(self) -> int:
        """Size of the universe, not the cardinality."""
        return self._size

    def indices(self) -> list[int]:
        """Sorted member indices."""
        return list(iter_bits(self._bits))

    def is_full(self) -> bool:
        return self._bits == (1 << self._size) - 1

    def issubset(self, other: Bitset) -> bool:
        return self._bits & ~other._bits == 0

    def with_index(self, index: int) -> Self:
        """Return a copy with `index` added."""
        return type(self).from_indices(self._size, [index]) | self

    def without_index(self, index: int) -> Self:
        """Return a copy with `index` removed."""
        return type(self)(self._size, self._bits & ~(1 << index))

    def complement(self) -> Self:
        return type(self)(self._size, ((1 << self._size) - 1) & ~self._bits)

    def _check_universe(self, other: Bitset) -> None:
        if type(self) is not type(other) or self._size != other._size:
            raise TypeError(f"cannot combine {self!r} with {other!r}")

    def __or__(self, other: Bitset) -> Self:
        self._check_universe(other)
        return type(self)(self._size, self._bits | other._bits)

    def __and__(self, other: Bitset) -> Self:
        self._check_universe(other)
        return type(self)(self._size, self._bits & other._bits)

    def __sub__(self, other: Bitset) -> Self:
        self._check_universe(other)
        return type(self)(self._size, self._bits & ~other._bits)

    def __xor__(self, other: Bitset) -> Self:
        self._check_universe(other)
        return type(self)(self._size, self._bits ^ other._bits)

    def __len__(self) -> int:
        return self._bits.bit_count()

    def __bool__(self) -> bool:
        return self._bits != 0

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self._bits)

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and 0 <= index < self._size and bool(self._bits >> index & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bitset):
            return NotImplemented
        return type(self) is type(other) and self._size == other._size and self._bits == other._bits

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._size, self._bits))

    def __le__(self, other: Bitset) -> bool:
        self._check_universe(other)
        return self.issubset(other)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(size={self._size}, indices={self.indices()})"


class PointSet(Bitset):
    """Bitset over point indices."""

    __slots__ = ()


class LineSet(Bitset):
    """Bitset over line indices."""

    __slots__ = ()
