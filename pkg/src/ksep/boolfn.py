"""Boolean functions on hypercube vertices, stored as truth-table bitmasks.

Vertex ``v`` of the n-cube holds the inputs ``(x1, ..., xn)`` with ``x1`` the
most significant bit of ``v``; bit ``v`` of a function's table is its value at
that vertex.  With this numbering function index 9 at n=3 is true exactly on
vertices 0 and 3.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator

MAX_N = 16
MAX_CENSUS_N = 4


class Label(str, Enum):
    PLUS = "+"
    MINUS = "-"
    MIXED = "mixed"

    def flipped(self) -> "Label":
        if self is Label.PLUS:
            return Label.MINUS
        if self is Label.MINUS:
            return Label.PLUS
        return self


def _check_n(n: int) -> None:
    if not isinstance(n, int) or not 1 <= n <= MAX_N:
        raise ValueError(f"n must be an integer in [1, {MAX_N}], got {n!r}")


@dataclass(frozen=True)
class BooleanFunction:
    n: int
    table: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if self.table < 0 or self.table >> (1 << self.n):
            raise ValueError(f"table {self.table} does not fit in 2**{self.n} bits")

    @property
    def n_vertices(self) -> int:
        return 1 << self.n

    @property
    def mask(self) -> int:
        return (1 << self.n_vertices) - 1

    def value(self, v: int) -> bool:
        if not 0 <= v < self.n_vertices:
            raise ValueError(f"vertex {v} out of range for n={self.n}")
        return bool(self.table >> v & 1)

    def label(self, v: int) -> Label:
        return Label.PLUS if self.value(v) else Label.MINUS

    def true_vertices(self) -> list[int]:
        return [v for v in range(self.n_vertices) if self.table >> v & 1]

    def is_constant(self) -> bool:
        return self.table == 0 or self.table == self.mask

    def to_index(self) -> int:
        return self.table

    def to_json(self) -> dict:
        return {"n": self.n, "index": self.table}

    def __invert__(self) -> "BooleanFunction":
        return complement(self)


def from_index(n: int, index: int) -> BooleanFunction:
    _check_n(n)
    if not 0 <= index < 1 << (1 << n):
        raise ValueError(f"function index {index} out of range for n={n}")
    return BooleanFunction(n, index)


def to_index(f: BooleanFunction) -> int:
    return f.table


def from_vertices(n: int, vertices) -> BooleanFunction:
    """Function true exactly on the given vertex numbers."""
    _check_n(n)
    table = 0
    for v in vertices:
        if not 0 <= v < 1 << n:
            raise ValueError(f"vertex {v} out of range for n={n}")
        table |= 1 << v
    return BooleanFunction(n, table)


def constant(n: int, value: bool) -> BooleanFunction:
    _check_n(n)
    return BooleanFunction(n, (1 << (1 << n)) - 1 if value else 0)


def variable(n: int, i: int) -> BooleanFunction:
    """The projection function f = x_i (1-based)."""
    _check_n(n)
    if not 1 <= i <= n:
        raise ValueError(f"variable index {i} out of range for n={n}")
    return from_vertices(n, (v for v in range(1 << n) if v >> (n - i) & 1))


def parity(n: int) -> BooleanFunction:
    """True on vertices with an odd number of 1 bits."""
    _check_n(n)
    return from_vertices(n, (v for v in range(1 << n) if v.bit_count() & 1))


def complement(f: BooleanFunction) -> BooleanFunction:
    return BooleanFunction(f.n, f.mask & ~f.table)


def vertex_coordinates(n: int, v: int) -> tuple[int, ...]:
    _check_n(n)
    if not 0 <= v < 1 << n:
        raise ValueError(f"vertex {v} out of range for n={n}")
    return tuple(v >> (n - 1 - i) & 1 for i in range(n))


def all_functions(n: int) -> Iterator[BooleanFunction]:
    if n > MAX_CENSUS_N:
        raise ValueError(f"enumerating all functions is limited to n <= {MAX_CENSUS_N}")
    for index in range(1 << (1 << n)):
        yield BooleanFunction(n, index)
