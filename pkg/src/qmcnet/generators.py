"""Comparison cubature rules: Halton, Fibonacci lattice, Smolyak sparse grid,
plus reproducible random shifts.

Every rule keeps exact rational nodes (integer numerators over one
denominator per coordinate) so kernel sums can be checked in rational
arithmetic.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .errors import DomainError
from .f2core import PointSet, level_vectors


@dataclass(frozen=True)
class CubatureRule:
    """Nodes ``num[i, j] / den[j]`` with weights (``None`` means ``1/N`` each)."""

    num: np.ndarray
    den: tuple[int, ...]
    weights: tuple[Fraction, ...] | None = None
    name: str = "rule"

    def __post_init__(self):
        num = np.asarray(self.num)
        if num.ndim != 2 or num.shape[1] != len(self.den):
            raise DomainError("numerators must be (N, d) with one denominator per coordinate")
        if self.weights is not None and len(self.weights) != num.shape[0]:
            raise DomainError("point and weight counts differ")
        object.__setattr__(self, "den", tuple(int(x) for x in self.den))
        object.__setattr__(self, "num", num)

    @classmethod
    def from_pointset(cls, ps: PointSet, name: str = "net") -> "CubatureRule":
        return cls(ps.num, (1 << ps.precision,) * ps.dim, None, name)

    @property
    def N(self) -> int:
        return self.num.shape[0]

    @property
    def dim(self) -> int:
        return len(self.den)

    @property
    def equal_weight(self) -> bool:
        return self.weights is None

    def points(self) -> np.ndarray:
        out = np.empty(self.num.shape, dtype=np.float64)
        for j, D in enumerate(self.den):
            col = self.num[:, j]
            if D.bit_length() <= 64 and D & (D - 1) == 0:
                out[:, j] = np.ldexp(col.astype(np.float64), -(D.bit_length() - 1))
            else:
                out[:, j] = [int(a) / D for a in col]
        return out

    def exact_weights(self) -> list[Fraction]:
        if self.weights is None:
            return [Fraction(1, self.N)] * self.N
        return list(self.weights)

    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.N, 1.0 / self.N)
        return np.array([float(w) for w in self.weights])

    def exact_points(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(int(a), D) for a, D in zip(row, self.den)) for row in self.num]

    def to_csv(self) -> str:
        """Header ``dim,N,weighted`` then coordinates and weight per row (17 digits)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dim", "N", "weighted"])
        w.writerow([self.dim, self.N, int(not self.equal_weight)])
        pts = self.points()
        wts = self.weight_array()
        for row, wt in zip(pts, wts):
            w.writerow([f"{x:.17g}" for x in row] + [f"{wt:.17g}"])
        return buf.getvalue()


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def first_primes(d: int) -> list[int]:
    out, p = [], 2
    while len(out) < d:
        if _is_prime(p):
            out.append(p)
        p += 1
    return out


def _check_bases(bases: Sequence[int]) -> None:
    for b in bases:
        if b < 2:
            raise DomainError(f"base {b} < 2")
    for i, a in enumerate(bases):
        for b in bases[i + 1 :]:
            if math.gcd(a, b) != 1:
                raise DomainError(f"bases {a} and {b} are not coprime")


def radical_inverse(i: int, b: int) -> Fraction:
    num, den = 0, 1
    while i:
        i, digit = divmod(i, b)
        num = num * b + digit
        den *= b
    return Fraction(num, den)


def halton_point(i: int, bases: Sequence[int]) -> tuple[Fraction, ...]:
    """Radical inverse of ``i`` in each base."""
    if i < 0:
        raise DomainError("index must be >= 0")
    _check_bases(bases)
    return tuple(radical_inverse(i, b) for b in bases)


def halton_rule(N: int, d: int, bases: Sequence[int] | None = None) -> CubatureRule:
    """First ``N`` Halton points, equal weights."""
    bases = list(bases) if bases is not None else first_primes(d)
    _check_bases(bases)
    num = np.zeros((N, d), dtype=np.int64)
    den = []
    idx = np.arange(N, dtype=np.int64)
    for j, b in enumerate(bases):
        k = 0
        while b**k < N:
            k += 1
        i = idx.copy()
        acc = np.zeros(N, dtype=np.int64)
        for _ in range(k):
            acc = acc * b + i % b
            i //= b
        num[:, j] = acc
        den.append(b**k)
    return CubatureRule(num, tuple(den), None, "halton")


def fibonacci(m: int) -> int:
    a, b = 0, 1
    for _ in range(m):
        a, b = b, a + b
    return a


def fibonacci_lattice(m: int) -> CubatureRule:
    """``{(i/F_m, frac(i F_{m-1}/F_m))}`` with equal weights."""
    if m < 2:
        raise DomainError("Fibonacci index must be >= 2")
    F, G = fibonacci(m), fibonacci(m - 1)
    i = np.arange(F, dtype=np.int64)
    num = np.stack([i, (i * G) % F], axis=1)
    return CubatureRule(num, (F, F), None, "fibonacci")


def sparse_grid(L: int, d: int) -> CubatureRule:
    """Smolyak combination of periodic trapezoidal (left-endpoint) rules.

    Level ``l`` of the univariate rule has ``2^l`` equispaced nodes. Terms
    with ``L - d + 1 <= |l|_1 <= L`` get coefficient
    ``(-1)^(L-|l|_1) binom(d-1, L-|l|_1)``. Coincident nodes are merged on
    exact dyadic keys and nodes whose merged weight vanishes are dropped.
    """
    if L < 0 or d < 1:
        raise DomainError("need L >= 0 and d >= 1")
    acc: dict[tuple[int, ...], Fraction] = {}
    for q in range(min(d - 1, L) + 1):
        level = L - q
        coef = (-1) ** q * math.comb(d - 1, q)
        for l in level_vectors(level, d):
            w = Fraction(coef, 1 << level)
            axes = [range(0, 1 << L, 1 << (L - lj)) for lj in l]
            for node in product(*axes):
                acc[node] = acc.get(node, Fraction(0)) + w
    nodes = sorted(k for k, w in acc.items() if w != 0)
    num = np.array(nodes, dtype=np.int64).reshape(len(nodes), d)
    return CubatureRule(num, (1 << L,) * d, tuple(acc[k] for k in nodes), "sparsegrid")


def sparse_grid_size(L: int, d: int) -> int:
    return sparse_grid(L, d).N


@dataclass(frozen=True)
class ShiftVector:
    """Offset ``eta`` in ``[0, 1)^d`` with the seed and stream index it came from."""

    eta: tuple[float, ...]
    seed: int | None = None
    index: int | None = None

    def __post_init__(self):
        if any(not 0.0 <= e < 1.0 for e in self.eta):
            raise DomainError("shift components must lie in [0, 1)")


def _philox(seed: int, index: int) -> np.random.Generator:
    # Philox4x64 is counter based: the key is the 64-bit seed, the second
    # counter word selects the stream, the first word advances within it.
    if not 0 <= seed < 2**64 or index < 0:
        raise DomainError("seed must be an unsigned 64-bit integer and index >= 0")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, index, 0, 0]))


def random_shift(seed: int, d: int, index: int = 0) -> ShiftVector:
    """Shift number ``index`` of the stream keyed by ``seed``."""
    eta = _philox(seed, index).random(d)
    return ShiftVector(tuple(float(e) for e in eta), seed, index)


def shift_table(seed: int, d: int, count: int, start: int = 0) -> list[ShiftVector]:
    return [random_shift(seed, d, k) for k in range(start, start + count)]


def frac(x):
    """Fractional part with ``frac(1.0) == 0``; works on floats, arrays, Fractions."""
    if isinstance(x, np.ndarray):
        out = x - np.floor(x)
        out[out >= 1.0] = 0.0
        return out
    out = x - math.floor(x)
    return 0 * out if out >= 1 else out


def apply_shift(point, eta):
    """Componentwise ``frac(x + eta)``; ``point`` may be an (N, d) array."""
    eta = eta.eta if isinstance(eta, ShiftVector) else eta
    if isinstance(point, np.ndarray):
        return frac(point + np.asarray(eta, dtype=np.float64))
    return tuple(frac(x + e) for x, e in zip(point, eta))
