"""Reproducing kernels of the periodic mixed Sobolev space and worst-case errors.

The univariate kernel is ``1 + 2 sum_k (2 pi k)^(-2r) cos(2 pi k (x - y))``;
for ``r`` in {1, 2} it has the Bernoulli closed form
``1 + (-1)^(r+1) / (2r)! * B_2r(|x - y|)``. The d-variate kernel is the
product. Every non-constant Fourier mode integrates to zero, so
``int K(x, .) = int int K = 1`` and for a rule with weights ``w``

    e^2 = (1 - sum w)^2 + sum_i sum_j w_i w_j (K(x_i, x_j) - 1).

Summing ``K - 1`` rather than ``K`` avoids cancelling against the constant.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import zeta

from .errors import DomainError
from .generators import CubatureRule

CLOSED_FORM_R = (1, 2)
MIN_TERMS = 16
BLOCK = 256


@dataclass(frozen=True)
class KernelSpec:
    """Dimension, smoothness and evaluation mode of ``K_{d,r}``."""

    d: int
    r: Fraction | float | int = 2
    mode: str = "auto"  # "closed", "series" or "auto"
    eps: float = 1e-12

    def __post_init__(self):
        r = Fraction(self.r) if not isinstance(self.r, float) else Fraction(self.r).limit_denominator(10**6)
        object.__setattr__(self, "r", r)
        if self.d < 1:
            raise DomainError("dimension must be >= 1")
        if r <= Fraction(1, 2):
            raise DomainError("smoothness must exceed 1/2")
        if self.eps <= 0:
            raise DomainError("series tolerance must be positive")
        mode = self.mode
        if mode == "auto":
            mode = "closed" if r in CLOSED_FORM_R else "series"
        if mode == "closed" and r not in CLOSED_FORM_R:
            raise DomainError(f"closed form needs r in {{1, 2}}, got r={r}")
        if mode not in ("closed", "series"):
            raise DomainError(f"unknown kernel mode {mode!r}")
        object.__setattr__(self, "mode", mode)

    @property
    def closed(self) -> bool:
        return self.mode == "closed"

    def terms(self) -> int:
        """Series length ``K`` with ``2 (2 pi)^(-2r) K^(1-2r) / (2r-1) < eps``."""
        r = float(self.r)
        need = (2 * (2 * math.pi) ** (-2 * r) / ((2 * r - 1) * self.eps)) ** (1 / (2 * r - 1))
        return max(MIN_TERMS, math.ceil(need) + 1)


@dataclass(frozen=True)
class WceResult:
    squared: float | Fraction
    error: float
    N: int
    method: str
    mode: str
    seconds: float = 0.0


def bernoulli_poly(degree: int, t):
    """``B_2(t) = t^2 - t + 1/6`` or ``B_4(t) = t^4 - 2t^3 + t^2 - 1/30``.

    Exact for ``Fraction`` input, floating otherwise; works on arrays.
    """
    if degree == 2:
        return t * t - t + Fraction(1, 6) if isinstance(t, (Fraction, int)) else t * t - t + 1.0 / 6.0
    if degree == 4:
        if isinstance(t, (Fraction, int)):
            return t**4 - 2 * t**3 + t**2 - Fraction(1, 30)
        t2 = t * t
        return t2 * (t2 - 2 * t + 1.0) - 1.0 / 30.0
    raise DomainError(f"Bernoulli polynomial of degree {degree} not supported (use 2 or 4)")


def _closed_factor(r: int):
    # (-1)^(r+1) / (2r)!
    return Fraction((-1) ** (r + 1), math.factorial(2 * r))


def _series_coef(r: float, k: np.ndarray) -> np.ndarray:
    return 2.0 * (2.0 * math.pi * k) ** (-2.0 * r)


def series_terms(spec: KernelSpec, u) -> np.ndarray:
    """Truncation length per torus distance ``u``.

    The integral bound of :meth:`KernelSpec.terms` holds uniformly. Away from
    ``u = 0`` summation by parts gives the sharper bound
    ``|tail| <= 2 (2 pi (K+1))^(-2r) / sin(pi u)``; the smaller ``K`` is used.
    """
    r = float(spec.r)
    u = np.asarray(u, dtype=np.float64)
    k_int = spec.terms()
    s = np.sin(math.pi * np.minimum(u, 1.0 - u))
    with np.errstate(divide="ignore"):
        need = (2.0 / (spec.eps * s)) ** (1.0 / (2.0 * r)) / (2.0 * math.pi)
    k_abel = np.where(s > 0, np.ceil(np.minimum(need, k_int)), k_int)
    return np.maximum(MIN_TERMS, k_abel).astype(np.int64)


def _series_minus_one(spec: KernelSpec, u: np.ndarray) -> np.ndarray:
    r = float(spec.r)
    u = np.asarray(u, dtype=np.float64)
    flat = u.reshape(-1)
    terms = series_terms(spec, flat)
    out = np.zeros(flat.shape, dtype=np.float64)
    zero = flat == 0.0
    if zero.any():
        # at u = 0 the partial sum is a generalized harmonic number
        K = float(spec.terms())
        out[zero] = 2.0 * (2.0 * math.pi) ** (-2.0 * r) * (zeta(2.0 * r) - zeta(2.0 * r, K + 1.0))
    idx = np.flatnonzero(~zero)
    idx = idx[np.argsort(terms[idx], kind="stable")]
    for start in range(0, idx.size, 128):
        sel = idx[start : start + 128]
        kt = terms[sel]
        x = flat[sel]
        B = min(2048, int(kt[-1]))
        j = np.arange(B, dtype=np.float64)
        xj = np.outer(x, j)
        # e^{2 pi i u k} = e^{2 pi i u lo} e^{2 pi i u j}: one table per group
        W = np.exp(2j * math.pi * (xj - np.floor(xj)))
        acc = np.zeros(sel.size, dtype=np.complex128)
        for lo in range(1, int(kt[-1]) + 1, B):
            k = lo + j
            coef = _series_coef(r, k)
            if kt[0] < k[-1]:
                v = (W * (k[None, :] <= kt[:, None])) @ coef
            else:
                v = W @ coef
            xl = x * lo
            acc += np.exp(2j * math.pi * (xl - np.floor(xl))) * v
        out[sel] += acc.real
    return out.reshape(u.shape)


def kernel_1d_minus_one(spec: KernelSpec, u):
    """``K_{1,r} - 1`` as a function of the torus distance ``u = frac(x - y)``."""
    if spec.closed:
        r = int(spec.r)
        c = _closed_factor(r)
        if isinstance(u, Fraction):
            return c * bernoulli_poly(2 * r, u)
        return float(c) * bernoulli_poly(2 * r, np.asarray(u, dtype=np.float64))
    if isinstance(u, Fraction):
        raise DomainError("fractional smoothness has no exact mode")
    return _series_minus_one(spec, u)


def _distance(x, y):
    if isinstance(x, Fraction) or isinstance(y, Fraction):
        diff = Fraction(x) - Fraction(y)
        return diff - math.floor(diff)
    diff = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return diff - np.floor(diff)


def kernel_1d(spec: KernelSpec, x, y):
    """``K_{1,r}(x, y)``; exact for Fraction inputs in closed-form mode."""
    u = _distance(x, y)
    return 1 + kernel_1d_minus_one(spec, u)


def kernel_dd(spec: KernelSpec, x, y):
    """Product of univariate kernels over the ``d`` coordinates."""
    x = list(x) if not isinstance(x, np.ndarray) else x
    y = list(y) if not isinstance(y, np.ndarray) else y
    if len(x) != spec.d or len(y) != spec.d:
        raise DomainError(f"points must have dimension {spec.d}")
    out = 1
    for a, b in zip(x, y):
        out = out * kernel_1d(spec, a, b)
    return out


def _product_minus_one(factors) -> np.ndarray:
    """``prod(1 + k_j) - 1`` without forming the product near 1."""
    q = None
    for k in factors:
        q = k if q is None else q + k + q * k
    return q


# Double-double arithmetic: a value is an unevaluated pair (hi, lo) with
# |lo| <= ulp(hi) / 2. Products use Dekker splitting, sums Knuth's TwoSum.
_SPLITTER = 134217729.0  # 2^27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    return _fast_two_sum(s, e + (x[1] + y[1]))


def _dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    return _fast_two_sum(p, e + (x[0] * y[1] + x[1] * y[0]))


def _dd_const(value: Fraction):
    hi = float(value)
    return hi, float(value - Fraction(hi))


def _dd_ratio(a: np.ndarray, D: int):
    """``a / D`` for integers below 2^53."""
    a = a.astype(np.float64)
    hi = a / D
    p, e = _two_prod(hi, np.float64(D))
    return hi, ((a - p) - e) / D


_ONE = (1.0, 0.0)
_CLOSED_DD = {
    # K - 1 = c0 + c1 v^r with v = u (1 - u)
    1: (_dd_const(Fraction(1, 12)), _dd_const(Fraction(-1, 2))),
    2: (_dd_const(Fraction(1, 720)), _dd_const(Fraction(-1, 24))),
}


def _closed_minus_one_dd(r: int, diff: np.ndarray, D: int):
    u = _dd_ratio(diff, D)
    v = _dd_mul(u, _dd_add(_ONE, (-u[0], -u[1])))
    if r == 2:
        v = _dd_mul(v, v)
    c0, c1 = _CLOSED_DD[r]
    return _dd_add(c0, _dd_mul(c1, v))


def _error_terms(x) -> list[float]:
    """Floats whose exact sum is ``sum(x)``: a pairwise TwoSum cascade.

    Each level's rounding errors are added in plain floating point; they are
    ``2^-53`` smaller than the values they came from.
    """
    x = np.array(x, dtype=np.float64).ravel()
    errs: list[float] = []
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        s, e = _two_sum(x[0::2], x[1::2])
        errs.append(float(np.sum(e)))
        x = s
    return errs + ([float(x[0])] if x.size else [])


def compensated_sum(x) -> float:
    return math.fsum(_error_terms(x))


def _block_sums(rule: CubatureRule, spec: KernelSpec, block: int) -> list[float]:
    """Error terms of the weighted pair sum of ``K - 1``, one block of rows at a time.

    Closed-form kernels are evaluated in double-double arithmetic from the
    exact integer coordinate differences, so that the sum keeps its relative
    accuracy when it is many orders of magnitude below the individual terms.
    """
    num = [np.asarray(rule.num[:, j]).astype(np.int64) for j in range(rule.dim)]
    den = rule.den
    if not rule.equal_weight:
        wt = [rule.exact_weights()[i] for i in range(rule.N)]
        w_hi = np.array([float(x) for x in wt])
        w_lo = np.array([float(x - Fraction(float(x))) for x in wt])
    N = rule.N
    partial: list[float] = []
    for i0 in range(0, N, block):
        i1 = min(N, i0 + block)
        q = None
        for j in range(rule.dim):
            diff = (num[j][i0:i1, None] - num[j][None, i0:]) % den[j]
            if spec.closed:
                k = _closed_minus_one_dd(int(spec.r), diff, den[j])
            else:
                vals, inv = np.unique(diff, return_inverse=True)
                table = kernel_1d_minus_one(spec, vals / den[j])
                k = (table[inv].reshape(diff.shape), np.zeros(diff.shape))
            q = k if q is None else _dd_add(_dd_add(q, k), _dd_mul(q, k))
        if not rule.equal_weight:
            wi = (w_hi[i0:i1, None], w_lo[i0:i1, None])
            wj = (w_hi[None, i0:], w_lo[None, i0:])
            q = _dd_mul(q, _dd_mul(wi, wj))
        # diagonal once, strict upper triangle twice
        rows = np.arange(i1 - i0)[:, None]
        cols = np.arange(N - i0)[None, :]
        mult = np.where(cols > rows, 2.0, np.where(cols == rows, 1.0, 0.0))
        partial += _error_terms(q[0] * mult)
        partial += _error_terms(q[1] * mult)
    return partial


def _exact_kernel_tables(rule: CubatureRule, r: int):
    """Per coordinate: integer numerator of ``K_{1,r} - 1`` over ``scale`` as a function of difference."""
    tables = []
    for D in rule.den:
        if r == 1:
            # (K-1) * 12 D^2 = 6 (a^2 - a D) + D^2
            scale = 12 * D * D
            fn = lambda a, D=D: 6 * (a * a - a * D) + D * D
        else:
            # (K-1) * 720 D^4 = -30 (a^4 - 2 a^3 D + a^2 D^2) + D^4
            scale = 720 * D**4
            fn = lambda a, D=D: -30 * (a**4 - 2 * a**3 * D + a * a * D * D) + D**4
        tables.append((fn, scale, D, {}))
    return tables


def _exact_squared(rule: CubatureRule, spec: KernelSpec) -> Fraction:
    r = int(spec.r)
    tables = _exact_kernel_tables(rule, r)
    cols = [[int(a) for a in rule.num[:, j]] for j in range(rule.dim)]
    weights = rule.exact_weights()
    N = rule.N
    scale = 1
    for _, s, _, _ in tables:
        scale *= s
    total = Fraction(0)
    for i in range(N):
        acc = 0
        for k in range(i, N):
            prod_k = 1
            prod_1 = 1
            for (fn, s, D, cache), col in zip(tables, cols):
                a = (col[i] - col[k]) % D
                v = cache.get(a)
                if v is None:
                    v = cache[a] = fn(a)
                prod_k *= v + s  # numerator of K
                prod_1 *= s
            term = prod_k - prod_1
            if rule.equal_weight:
                acc += term if k == i else 2 * term
            else:
                wt = weights[i] * weights[k]
                total += Fraction(term, scale) * (wt if k == i else 2 * wt)
        if rule.equal_weight:
            total += Fraction(acc, scale * N * N)
    s_w = sum(weights, Fraction(0))
    return (1 - s_w) ** 2 + total


def worst_case_error(
    rule: CubatureRule, spec: KernelSpec, exact: bool = False, block: int = BLOCK
) -> WceResult:
    """Worst-case integration error of ``rule`` in the unit ball of ``H^r_mix``."""
    if rule.dim != spec.d:
        raise DomainError(f"rule dimension {rule.dim} differs from kernel dimension {spec.d}")
    t0 = time.perf_counter()
    if exact:
        if not spec.closed:
            raise DomainError("exact mode needs integer smoothness r in {1, 2}")
        sq = _exact_squared(rule, spec)
        err = math.sqrt(max(float(sq), 0.0))
        return WceResult(sq, err, rule.N, rule.name, "exact", time.perf_counter() - t0)
    s_w = sum(rule.exact_weights(), Fraction(0))
    partial = _block_sums(rule, spec, block)
    if rule.equal_weight:
        sq = math.fsum(partial) / (rule.N * rule.N)
    else:
        sq = math.fsum([float((1 - s_w) ** 2)] + partial)
    err = math.sqrt(max(sq, 0.0))
    return WceResult(sq, err, rule.N, rule.name, "float", time.perf_counter() - t0)


def wce_csv_row(res: WceResult, d: int, r, n, timing: bool = True) -> list[str]:
    """Fields ``method,d,r,n,N,wce,wce_squared,mode,seconds``."""
    sq = float(res.squared)
    return [
        res.method,
        str(d),
        str(Fraction(r)),
        "" if n is None else str(n),
        str(res.N),
        f"{res.error:.17g}",
        f"{sq:.17g}",
        res.mode,
        f"{res.seconds:.3f}" if timing else "",
    ]


WCE_HEADER = ["method", "d", "r", "n", "N", "wce", "wce_squared", "mode", "seconds"]
