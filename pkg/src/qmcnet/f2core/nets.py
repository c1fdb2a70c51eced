"""Digital nets over GF(2): generation, digit interlacing, sequence-to-net.

Coordinates are kept as exact integer numerators over a shared power of two.
Row ``a`` of a generating matrix produces the digit of weight ``2^-a`` and
column ``k`` multiplies digit ``nu_k`` of the index (least significant first).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from ..errors import CapacityError, DomainError
from .gf2 import BitMatrix

MAX_PRECISION = 64


@dataclass(frozen=True)
class PointSet:
    """Points ``num[i, j] / 2**precision`` in ``[0, 1)^d``, in index order."""

    num: np.ndarray
    precision: int

    def __post_init__(self):
        num = np.asarray(self.num, dtype=np.uint64)
        if num.ndim != 2:
            raise DomainError("numerator array must be 2-d (N, d)")
        if not 0 <= self.precision <= MAX_PRECISION:
            raise CapacityError(f"precision {self.precision} exceeds {MAX_PRECISION}")
        if self.precision < MAX_PRECISION and num.size and int(num.max()) >> self.precision:
            raise DomainError("numerator not below 2**precision")
        num.setflags(write=False)
        object.__setattr__(self, "num", num)

    @property
    def N(self) -> int:
        return self.num.shape[0]

    @property
    def dim(self) -> int:
        return self.num.shape[1]

    def __len__(self) -> int:
        return self.N

    def as_float(self) -> np.ndarray:
        # rounds to nearest once precision exceeds 53 digits
        return np.ldexp(self.num.astype(np.float64), -self.precision)

    def exact(self) -> list[tuple[Fraction, ...]]:
        den = 1 << self.precision
        return [tuple(Fraction(int(a), den) for a in row) for row in self.num]

    def project(self, coords: Sequence[int]) -> "PointSet":
        """Keep coordinates ``coords`` (0-based), in the given order."""
        coords = list(coords)
        if not coords or any(not 0 <= c < self.dim for c in coords):
            raise DomainError(f"invalid coordinate subset {coords}")
        return PointSet(self.num[:, coords], self.precision)

    def with_precision(self, precision: int) -> "PointSet":
        """Truncate (or zero-extend) every coordinate to ``precision`` digits."""
        if precision > MAX_PRECISION:
            raise CapacityError(f"precision {precision} exceeds {MAX_PRECISION}")
        if precision <= self.precision:
            num = self.num >> np.uint64(self.precision - precision)
        else:
            num = self.num << np.uint64(precision - self.precision)
        return PointSet(num, precision)

    def digits(self, coord: int) -> np.ndarray:
        """(N, precision) array; column ``a - 1`` holds the digit of weight ``2^-a``."""
        shifts = np.arange(self.precision - 1, -1, -1, dtype=np.uint64)
        return ((self.num[:, coord][:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True)
class GeneratingMatrixSet:
    """``d`` generating matrices sharing the shape ``s x n``."""

    matrices: tuple[BitMatrix, ...]

    def __post_init__(self):
        mats = tuple(self.matrices)
        if not mats:
            raise DomainError("need at least one matrix")
        shape = (mats[0].rows, mats[0].cols)
        for i, m in enumerate(mats):
            if (m.rows, m.cols) != shape:
                raise DomainError(f"matrix {i + 1} has shape {m.rows}x{m.cols}, expected {shape[0]}x{shape[1]}")
        if shape[0] < shape[1]:
            raise DomainError(f"need s >= n, got s={shape[0]}, n={shape[1]}")
        object.__setattr__(self, "matrices", mats)

    @property
    def d(self) -> int:
        return len(self.matrices)

    @property
    def s(self) -> int:
        return self.matrices[0].rows

    @property
    def n(self) -> int:
        return self.matrices[0].cols

    def select(self, coords: Sequence[int]) -> "GeneratingMatrixSet":
        return GeneratingMatrixSet(tuple(self.matrices[c] for c in coords))


def digit_vector(nu: int, n: int) -> tuple[int, ...]:
    """``(nu_0, ..., nu_{n-1})`` with ``nu = sum nu_k 2^k``."""
    if n < 0 or not 0 <= nu < (1 << n):
        raise DomainError(f"nu={nu} outside [0, 2^{n})")
    return tuple((nu >> k) & 1 for k in range(n))


def generate_digital_net(
    mats: GeneratingMatrixSet, start: int = 0, stop: int | None = None
) -> PointSet:
    """Points ``x_nu`` for ``start <= nu < stop`` (default: all ``2^n``).

    Disjoint index ranges concatenate to the full net.
    """
    total = 1 << mats.n
    stop = total if stop is None else stop
    if not 0 <= start <= stop <= total:
        raise DomainError(f"index range [{start}, {stop}) outside [0, {total})")
    if mats.s > MAX_PRECISION:
        raise CapacityError(f"s={mats.s} exceeds {MAX_PRECISION} digits")
    nu = np.arange(start, stop, dtype=np.uint64)
    num = np.zeros((stop - start, mats.d), dtype=np.uint64)
    for i, m in enumerate(mats.matrices):
        for k, col in enumerate(m.column_values()):
            if col:
                bit = (nu >> np.uint64(k)) & np.uint64(1)
                num[:, i] ^= bit * np.uint64(col)
    return PointSet(num, mats.s)


def interlace(points: PointSet, sigma: int) -> PointSet:
    """Digit interlacing of each group of ``sigma`` consecutive coordinates.

    Output digit ``r + (a - 1) sigma`` (1-based, ``2^-...`` weight) is digit ``a``
    of coordinate ``r`` of the group.
    """
    if sigma < 1 or points.dim % sigma:
        raise DomainError(f"dimension {points.dim} not divisible by sigma={sigma}")
    p = points.precision
    out_p = sigma * p
    if out_p > MAX_PRECISION:
        raise CapacityError(f"interlaced precision {out_p} exceeds {MAX_PRECISION}")
    if sigma == 1:
        return points
    d = points.dim // sigma
    out = np.zeros((points.N, d), dtype=np.uint64)
    one = np.uint64(1)
    for l in range(d):
        for r in range(1, sigma + 1):
            src = points.num[:, l * sigma + r - 1]
            for a in range(1, p + 1):
                bit = (src >> np.uint64(p - a)) & one
                out[:, l] |= bit << np.uint64(out_p - (r + (a - 1) * sigma))
    return PointSet(out, out_p)


def deinterlace(points: PointSet, sigma: int) -> PointSet:
    """Inverse of :func:`interlace` at fixed precision."""
    if sigma < 1 or points.precision % sigma:
        raise DomainError(f"precision {points.precision} not divisible by sigma={sigma}")
    p = points.precision // sigma
    out = np.zeros((points.N, points.dim * sigma), dtype=np.uint64)
    one = np.uint64(1)
    for l in range(points.dim):
        src = points.num[:, l]
        for r in range(1, sigma + 1):
            for a in range(1, p + 1):
                bit = (src >> np.uint64(points.precision - (r + (a - 1) * sigma))) & one
                out[:, l * sigma + r - 1] |= bit << np.uint64(p - a)
    return PointSet(out, p)


def interlace_matrices(mats: GeneratingMatrixSet, sigma: int) -> GeneratingMatrixSet:
    """Generating matrices of the interlaced net (``sigma * s`` rows each)."""
    if sigma < 1 or mats.d % sigma:
        raise DomainError(f"dimension {mats.d} not divisible by sigma={sigma}")
    if sigma * mats.s > MAX_PRECISION:
        raise CapacityError(f"interlaced precision {sigma * mats.s} exceeds {MAX_PRECISION}")
    out = []
    for l in range(mats.d // sigma):
        group = mats.matrices[l * sigma : (l + 1) * sigma]
        rows = [0] * (sigma * mats.s)
        for r, m in enumerate(group, start=1):
            for a in range(1, mats.s + 1):
                rows[r + (a - 1) * sigma - 1] = m.row(a)
        out.append(BitMatrix(sigma * mats.s, mats.n, tuple(rows)))
    return GeneratingMatrixSet(tuple(out))


def sequence_to_net(seq: PointSet, n: int) -> PointSet:
    """Truncate to ``n`` digits and append the coordinate ``i / 2^n``."""
    if seq.N != (1 << n):
        raise DomainError(f"need exactly 2^{n} points, got {seq.N}")
    trunc = seq.with_precision(n)
    last = np.arange(seq.N, dtype=np.uint64)[:, None]
    return PointSet(np.hstack([trunc.num, last]), n)


def sequence_to_net_matrices(mats: GeneratingMatrixSet, n: int) -> GeneratingMatrixSet:
    """Matrix form of :func:`sequence_to_net`: leading ``n x n`` blocks plus anti-identity."""
    if mats.n < n or mats.s < n:
        raise DomainError(f"sequence matrices {mats.s}x{mats.n} smaller than n={n}")
    lead = tuple(m.leading(n, n) for m in mats.matrices)
    return GeneratingMatrixSet(lead + (BitMatrix.anti_identity(n),))


def level_vectors(total: int, d: int):
    """All ``l`` in N_0^d with ``|l|_1 = total``."""
    for cut in combinations_with_replacement(range(total + 1), d - 1):
        prev = 0
        out = []
        for c in cut:
            out.append(c - prev)
            prev = c
        out.append(total - prev)
        yield tuple(out)


def check_equidistribution(ps: PointSet, t: int) -> bool:
    """True iff every dyadic box of order ``n - t`` holds exactly ``2^t`` points."""
    N = ps.N
    n = N.bit_length() - 1
    if N != 1 << n:
        raise DomainError(f"N={N} is not a power of two")
    if not 0 <= t <= n:
        raise DomainError(f"t={t} outside [0, {n}]")
    k = n - t
    if k == 0:
        return True
    expected = 1 << t
    for levels in level_vectors(k, ps.dim):
        key = np.zeros(N, dtype=np.uint64)
        for j, l in enumerate(levels):
            if l == 0:
                continue
            col = ps.num[:, j]
            if l <= ps.precision:
                box = col >> np.uint64(ps.precision - l)
            else:
                box = col << np.uint64(l - ps.precision)
            key = (key << np.uint64(l)) | box
        counts = np.bincount(key.astype(np.int64), minlength=1 << k)
        if counts.shape[0] != 1 << k or np.any(counts != expected):
            return False
    return True
