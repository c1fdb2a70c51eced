"""Faber hats, Haar functions and the coefficients linking them.

Conventions: ``h = 1`` on ``[0, 1/2)``, ``-1`` on ``[1/2, 1)``; the tent
``v(x) = 2 int_0^x h`` peaks at ``v(1/2) = 1``. Level ``-1`` stands for the
constant function on that coordinate, with translation 0 only.

For a point ``z`` and ``j >= 0`` the separable pieces of the Haar coefficient
of the discrepancy function are

    int chi(z <= x) h_{j,m}(x) dx = -2^(-j-1) v_{j,m}(z),
    int x h_{j,m}(x) dx           = -2^(-2j-2),

and for ``j = -1`` they are ``1 - z`` and ``1/2``. Together these give
``mu_{j,m} = (-1)^d 2^(-d) 2^(-|j|_1) c_{j,m}`` for ``j`` in ``N_0^d``.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError
from .f2core import PointSet
from .generators import CubatureRule

HAAR_GUARD = 2**26


@dataclass(frozen=True)
class HaarIndex:
    """Level ``j`` in ``{-1, 0, 1, ...}^d`` and translation ``m``."""

    j: tuple[int, ...]
    m: tuple[int, ...]

    def __post_init__(self):
        j, m = tuple(int(a) for a in self.j), tuple(int(a) for a in self.m)
        if len(j) != len(m) or not j:
            raise DomainError("level and translation need the same positive length")
        for ji, mi in zip(j, m):
            if ji < -1:
                raise DomainError(f"level {ji} < -1")
            if not 0 <= mi < 1 << max(ji, 0):
                raise DomainError(f"translation {mi} outside D_{ji}")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "m", m)

    @classmethod
    def zero(cls, d: int) -> "HaarIndex":
        return cls((0,) * d, (0,) * d)

    @property
    def d(self) -> int:
        return len(self.j)

    @property
    def support(self) -> tuple[int, ...]:
        """Coordinates with ``j_i != -1``."""
        return tuple(i for i, ji in enumerate(self.j) if ji != -1)

    @property
    def l1(self) -> int:
        return sum(abs(ji) for ji in self.j)

    @property
    def plus(self) -> int:
        return sum(max(ji, 0) for ji in self.j)


def translations(j: Sequence[int]) -> Iterable[tuple[int, ...]]:
    return product(*(range(1 << max(ji, 0)) for ji in j))


def levels_plus(ell: int, d: int) -> list[tuple[int, ...]]:
    """All ``j`` in ``{-1, 0, ...}^d`` whose non-negative parts sum to ``ell``."""
    out = []
    for j in product(range(-1, ell + 1), repeat=d):
        if sum(max(a, 0) for a in j) == ell:
            out.append(j)
    return out


def _frac(x):
    if isinstance(x, (Fraction, int)):
        return x - math.floor(x)
    x = np.asarray(x, dtype=np.float64)
    return x - np.floor(x)


def tent(y):
    """Peak-1 tent on ``[0, 1]``, zero outside."""
    if isinstance(y, (Fraction, int)):
        if y <= 0 or y >= 1:
            return Fraction(0)
        return 2 * y if y <= Fraction(1, 2) else 2 * (1 - y)
    y = np.asarray(y, dtype=np.float64)
    return np.where((y > 0) & (y < 1), np.where(y <= 0.5, 2 * y, 2 * (1 - y)), 0.0)


def hat(j: int, k: int, x):
    """Univariate ``v_{j,k}(x)``, periodic in ``x``."""
    if j < -1 or not 0 <= k < 1 << max(j, 0):
        raise DomainError(f"invalid hat index j={j}, k={k}")
    if j == -1:
        return Fraction(1) if isinstance(x, (Fraction, int)) else np.ones_like(np.asarray(x, dtype=np.float64))
    return tent((1 << j) * _frac(x) - k)


def haar(j: int, k: int, x):
    """Univariate ``h_{j,k}(x)``: +1 on the left half of its interval, -1 on the right."""
    if j < -1 or not 0 <= k < 1 << max(j, 0):
        raise DomainError(f"invalid Haar index j={j}, k={k}")
    if j == -1:
        return 1
    y = (1 << j) * _frac(x) - k
    if 0 <= y < Fraction(1, 2):
        return 1
    if Fraction(1, 2) <= y < 1:
        return -1
    return 0


def tensor_hat(idx: HaarIndex, x):
    out = 1
    for ji, mi, xi in zip(idx.j, idx.m, x):
        out = out * hat(ji, mi, xi)
    return out


def hat_integral(idx: HaarIndex) -> Fraction:
    """``int v_{j,m} = prod over j_i >= 0 of 2^(-(j_i + 1))``."""
    return Fraction(1, 1 << sum(ji + 1 for ji in idx.j if ji >= 0))


def _rule_points(rule) -> tuple[list[tuple[Fraction, ...]], list[Fraction]]:
    if isinstance(rule, PointSet):
        pts = rule.exact()
        return pts, [Fraction(1, len(pts))] * len(pts)
    if isinstance(rule, CubatureRule):
        return rule.exact_points(), rule.exact_weights()
    pts = [tuple(Fraction(a) for a in p) for p in rule]
    return pts, [Fraction(1, len(pts))] * len(pts)


def faber_error_coeff(rule, idx: HaarIndex) -> Fraction:
    """``c_{j,m} = Q(v_{j,m}) - int v_{j,m}`` in rational arithmetic.

    ``rule`` is a CubatureRule (its weights are used), a PointSet or a list of
    points (equal weights).
    """
    pts, wts = _rule_points(rule)
    q = sum((w * tensor_hat(idx, z) for z, w in zip(pts, wts)), Fraction(0))
    return q - hat_integral(idx)


def discrepancy_eval(points, x) -> Fraction | float:
    """``#(P in [0, x]) / N - prod x_i`` with the closed box ``[0, x]``."""
    if isinstance(points, PointSet):
        if all(isinstance(a, (Fraction, int)) for a in x):
            pts = points.exact()
        else:
            pts = points.as_float()
    else:
        pts = points
    N = len(pts)
    count = sum(1 for z in pts if all(zi <= xi for zi, xi in zip(z, x)))
    vol = 1
    for xi in x:
        vol = vol * xi
    if all(isinstance(a, (Fraction, int)) for a in x):
        return Fraction(count, N) - vol
    return count / N - float(vol)


def _point_factor(z: Fraction, j: int, m: int) -> Fraction:
    if j == -1:
        return 1 - z
    return -Fraction(1, 1 << (j + 1)) * hat(j, m, z)


def _volume_factor(j: int) -> Fraction:
    return Fraction(1, 2) if j == -1 else -Fraction(1, 1 << (2 * j + 2))


def haar_coeff_discrepancy(points, idx: HaarIndex):
    """``mu_{j,m}(D_P) = int D_P h_{j,m}`` from the closed form in the tents.

    Exact for rational input; float input gives a float.
    """
    floating = isinstance(points, np.ndarray) and points.dtype.kind == "f"
    if isinstance(points, PointSet):
        pts = points.exact()
    elif floating:
        pts = points
    else:
        pts = [tuple(Fraction(a) for a in p) for p in points]
    if len(pts[0]) != idx.d:
        raise DomainError("point and index dimensions differ")
    if floating:
        A = np.ones(len(pts))
        B = 1.0
        for i, (ji, mi) in enumerate(zip(idx.j, idx.m)):
            z = pts[:, i]
            if ji == -1:
                A *= 1 - z
                B *= 0.5
            else:
                A *= -(2.0 ** (-ji - 1)) * hat(ji, mi, z)
                B *= -(2.0 ** (-2 * ji - 2))
        return float(A.mean() - B)
    total = Fraction(0)
    for z in pts:
        term = Fraction(1)
        for zi, ji, mi in zip(z, idx.j, idx.m):
            term *= _point_factor(zi, ji, mi)
            if not term:
                break
        total += term
    vol = Fraction(1)
    for ji in idx.j:
        vol *= _volume_factor(ji)
    return total / len(pts) - vol


def haar_coeff_piecewise(points, idx: HaarIndex) -> Fraction:
    """Independent oracle: integrate ``D_P h_{j,m}`` cell by cell.

    Cells come from the grid of point coordinates and Haar breakpoints. On
    each open cell the count and the Haar sign are constant, so the integral
    is ``sign * (count / N * vol - prod (b^2 - a^2) / 2)``.
    """
    pts = points.exact() if isinstance(points, PointSet) else [tuple(Fraction(a) for a in p) for p in points]
    N, d = len(pts), idx.d
    axes = []
    for i, (ji, mi) in enumerate(zip(idx.j, idx.m)):
        cuts = {Fraction(0), Fraction(1)} | {z[i] for z in pts}
        if ji >= 0:
            lo = Fraction(mi, 1 << ji)
            cuts |= {lo, lo + Fraction(1, 1 << (ji + 1)), lo + Fraction(1, 1 << ji)}
        cuts = sorted(c for c in cuts if 0 <= c <= 1)
        cells = []
        for a, b in zip(cuts, cuts[1:]):
            sign = haar(ji, mi, (a + b) / 2)
            if sign:
                cells.append((a, b, sign, (b * b - a * a) / 2))
        axes.append(cells)
    total = Fraction(0)
    for cell in product(*axes):
        sign = 1
        vol = Fraction(1)
        mom = Fraction(1)
        for a, b, s, m2 in cell:
            sign *= s
            vol *= b - a
            mom *= m2
        # z <= x holds on the whole open cell iff z <= its left end
        count = sum(1 for z in pts if all(z[i] <= cell[i][0] for i in range(d)))
        total += sign * (Fraction(count, N) * vol - mom)
    return total


@dataclass(frozen=True)
class PiecewiseEvaluable:
    """Periodic function on the torus with a flag for rational exactness."""

    func: Callable
    d: int
    exact: bool = False

    def __call__(self, x):
        return self.func(tuple(_frac(a) for a in x))


@dataclass(frozen=True)
class HatCombination:
    """Finite sum ``sum a_i v_{j_i, m_i}``; exact on rational input."""

    terms: tuple[tuple[Fraction, HaarIndex], ...]

    @property
    def d(self) -> int:
        return self.terms[0][1].d

    @property
    def max_level(self) -> int:
        return max((max(idx.j) for _, idx in self.terms), default=-1)

    def __call__(self, x):
        return sum((a * tensor_hat(idx, x) for a, idx in self.terms), Fraction(0))

    def integral(self) -> Fraction:
        return sum((a * hat_integral(idx) for a, idx in self.terms), Fraction(0))

    def evaluable(self) -> PiecewiseEvaluable:
        return PiecewiseEvaluable(self, self.d, exact=True)


def random_hat_combination(rng: np.random.Generator, d: int, max_level: int = 3, count: int = 5) -> HatCombination:
    terms = []
    for _ in range(count):
        j = tuple(int(a) for a in rng.integers(-1, max_level + 1, size=d))
        m = tuple(int(rng.integers(0, 1 << max(a, 0))) for a in j)
        terms.append((Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 9))), HaarIndex(j, m)))
    return HatCombination(tuple(terms))


def faber_coeff(f, idx: HaarIndex):
    """``(-2)^(-|e(j)|)`` times the mixed second difference of ``f`` at ``x_{j,m}``.

    Step ``2^-(j_i+1)`` in each coordinate with ``j_i >= 0``; the others sit at 0.
    """
    sup = idx.support
    anchor = [Fraction(mi, 1 << ji) if ji >= 0 else Fraction(0) for ji, mi in zip(idx.j, idx.m)]
    total = 0
    for steps in product((0, 1, 2), repeat=len(sup)):
        x = list(anchor)
        weight = 1
        for i, s in zip(sup, steps):
            x[i] = _frac(x[i] + s * Fraction(1, 1 << (idx.j[i] + 1)))
            weight *= -2 if s == 1 else 1
        total = total + weight * f(tuple(x))
    return total * Fraction(1, (-2) ** len(sup))


def all_indices(d: int, max_level: int) -> Iterable[HaarIndex]:
    for j in product(range(-1, max_level + 1), repeat=d):
        for m in translations(j):
            yield HaarIndex(j, m)


def faber_reconstruct(f, d: int, max_level: int) -> HatCombination:
    """Partial Faber series of ``f`` up to level ``max_level`` per coordinate."""
    # every stencil point lies on the grid of step 2^-(max_level+1): evaluate each once
    f = functools.lru_cache(maxsize=None)(f)
    coeffs = [(faber_coeff(f, idx), idx) for idx in all_indices(d, max_level)]
    return HatCombination(tuple((a, idx) for a, idx in coeffs if a))


def faber_error_expansion(f, rule, d: int, max_level: int, series: HatCombination | None = None) -> Fraction:
    """``sum_j sum_m d2_{j,m}(f) c_{j,m}(rule)``; equals ``Q(f) - I(f)`` when the series terminates.

    Pass ``series = faber_reconstruct(f, d, max_level)`` to reuse the coefficients across rules.
    """
    if series is None:
        series = faber_reconstruct(f, d, max_level)
    return sum((a * faber_error_coeff(rule, idx) for a, idx in series.terms), Fraction(0))


def shell_bound(ell: int, n: int, t: int, d: int) -> float:
    """Upper-bound shape for the shell maxima of an order-2 net."""
    if ell < n - math.ceil(t / 2):
        return 2.0 ** (-2 * n + t) * (2 * n - t - 2 * ell) ** (d - 1)
    return 2.0 ** (-ell - n + t / 2)


def _shell_max(num: np.ndarray, p: int, j: tuple[int, ...]) -> Fraction:
    # integer form of the tent closed form: every point factor is an integer over 2^(p + j_i)
    N = num.shape[0]
    numer = [1] * N
    for i, ji in enumerate(j):
        a = num[:, i].astype(object)
        if ji == -1:
            fac = [(1 << p) - int(x) for x in a]
        else:
            mask = (1 << p) - 1
            fac = []
            for x in a:
                b = (int(x) << ji) & mask if ji < p else 0
                fac.append(-min(b, (1 << p) - b))
        numer = [u * w for u, w in zip(numer, fac)]
    den = N << sum(p + max(ji, 0) for ji in j)
    vol = Fraction(1)
    for ji in j:
        vol *= _volume_factor(ji)
    boxes: dict[tuple[int, ...], int] = {}
    keys = [tuple(int(x) >> (p - ji) if ji >= 0 else 0 for x, ji in zip(row, j)) for row in num]
    for key, u in zip(keys, numer):
        boxes[key] = boxes.get(key, 0) + u
    values = list(boxes.values())
    best = max(abs(Fraction(min(values), den) - vol), abs(Fraction(max(values), den) - vol))
    total_boxes = 1 << sum(max(ji, 0) for ji in j)
    if len(boxes) < total_boxes:
        best = max(best, abs(vol))
    return best


def haar_decay_profile(
    points: PointSet, n: int, t: int, d: int | None = None, guard: int = HAAR_GUARD, boundary: bool = False
) -> list[tuple[int, Fraction, float, float]]:
    """Exact ``max |mu_{j,m}(D_P)|`` per shell ``|j|_1 = ell``, ``j`` in ``N_0^d``, ``ell = 0..n``.

    ``boundary=True`` also admits levels ``-1`` (shell index is then the sum
    of the non-negative levels). Returns rows ``(ell, max_mu, bound, ratio)``.
    """
    d = points.dim if d is None else d
    if points.dim != d:
        raise DomainError("point dimension differs from d")
    if (1 << (2 * n)) > guard:
        raise CapacityError(f"shell enumeration needs 2^{2 * n} work units, guard is {guard}")
    if points.precision > 62:
        raise CapacityError("point precision above 62 digits")
    # refine to at least n digits so every box key is defined
    p = max(points.precision, n)
    num = points.with_precision(p).num.astype(np.int64)
    rows = []
    for ell in range(n + 1):
        js = levels_plus(ell, d) if boundary else [j for j in levels_plus(ell, d) if min(j) >= 0]
        best = Fraction(0)
        for j in js:
            best = max(best, _shell_max(num, p, j))
        bound = shell_bound(ell, n, t, d)
        rows.append((ell, best, bound, float(best) / bound))
    return rows


def profile_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ell", "max_mu", "bound_prop57", "ratio"])
    for ell, mu, bound, ratio in rows:
        w.writerow([ell, f"{float(mu):.17g}", f"{bound:.17g}", f"{ratio:.17g}"])
    return buf.getvalue()
