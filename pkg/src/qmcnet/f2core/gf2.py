"""Bit matrices over GF(2) stored as int bitsets.

A row vector ``c`` of length ``n`` is an ``int`` whose bit ``k`` is the
entry multiplying the digit ``nu_k`` of the index (least significant first).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DomainError


def parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class BitMatrix:
    """An ``rows x cols`` matrix over GF(2); ``bits[a]`` is row ``a + 1``."""

    rows: int
    cols: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 0:
            raise DomainError(f"bad shape {self.rows}x{self.cols}")
        if len(self.bits) != self.rows:
            raise DomainError(f"expected {self.rows} rows, got {len(self.bits)}")
        limit = 1 << self.cols
        for a, row in enumerate(self.bits):
            if not 0 <= row < limit:
                raise DomainError(f"row {a + 1} has bits outside {self.cols} columns")

    @classmethod
    def from_array(cls, arr) -> "BitMatrix":
        arr = np.asarray(arr, dtype=np.int64)
        if arr.ndim != 2:
            raise DomainError("expected a 2-d array")
        if np.any((arr != 0) & (arr != 1)):
            raise DomainError("entries must be 0 or 1")
        rows = tuple(int(sum(int(b) << k for k, b in enumerate(r))) for r in arr)
        return cls(arr.shape[0], arr.shape[1], rows)

    @classmethod
    def from_strings(cls, lines: Sequence[str]) -> "BitMatrix":
        """Rows given as '0'/'1' strings; character ``k`` is column ``k``."""
        cols = len(lines[0]) if lines else 0
        rows = []
        for line in lines:
            if len(line) != cols or set(line) - {"0", "1"}:
                raise DomainError(f"bad row {line!r}")
            rows.append(sum(1 << k for k, ch in enumerate(line) if ch == "1"))
        return cls(len(rows), cols, tuple(rows))

    @classmethod
    def identity(cls, n: int, rows: int | None = None) -> "BitMatrix":
        rows = n if rows is None else rows
        return cls(rows, n, tuple((1 << a) if a < n else 0 for a in range(rows)))

    @classmethod
    def anti_identity(cls, n: int, rows: int | None = None) -> "BitMatrix":
        """Generates the equidistant coordinate ``nu / 2^n``."""
        rows = n if rows is None else rows
        return cls(rows, n, tuple((1 << (n - 1 - a)) if a < n else 0 for a in range(rows)))

    def row(self, a: int) -> int:
        """Row ``a`` using the 1-based index of the net definition."""
        if not 1 <= a <= self.rows:
            raise DomainError(f"row index {a} outside [1, {self.rows}]")
        return self.bits[a - 1]

    def to_array(self) -> np.ndarray:
        return np.array(
            [[(r >> k) & 1 for k in range(self.cols)] for r in self.bits], dtype=np.uint8
        ).reshape(self.rows, self.cols)

    def to_strings(self) -> list[str]:
        return ["".join("1" if (r >> k) & 1 else "0" for k in range(self.cols)) for r in self.bits]

    def column_values(self) -> list[int]:
        """Column ``k`` read as the integer numerator ``sum_a bit(a,k) 2^(rows-a)``."""
        out = []
        for k in range(self.cols):
            v = 0
            for a, r in enumerate(self.bits):
                if (r >> k) & 1:
                    v |= 1 << (self.rows - 1 - a)
            out.append(v)
        return out

    def leading(self, rows: int, cols: int) -> "BitMatrix":
        mask = (1 << cols) - 1
        return BitMatrix(rows, cols, tuple(r & mask for r in self.bits[:rows]))

    def matvec(self, v: int) -> int:
        """Digits ``(x_1..x_s)`` of ``C v`` packed with ``x_1`` as the top bit."""
        out = 0
        for r in self.bits:
            out = (out << 1) | parity(r & v)
        return out


def rank(rows: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    r = 0
    for v in rows:
        if insert(basis, v):
            r += 1
    return r


def insert(basis: dict[int, int], v: int) -> bool:
    """Reduce ``v`` against ``basis`` (pivot bit -> vector); add it if independent.

    Returns False when ``v`` lies in the span, leaving ``basis`` untouched.
    """
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            basis[top] = v
            return True
        v ^= b
    return False
