"""Test functions, randomly shifted error experiments, sweeps and rate fits."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .f2core import (
    BitMatrix,
    GeneratingMatrixSet,
    file_checksum,
    generate_digital_net,
    interlace,
    load_net,
    net_matrix_path,
)
from .generators import (
    CubatureRule,
    ShiftVector,
    fibonacci_lattice,
    frac,
    halton_rule,
    shift_table,
    sparse_grid,
)
from .kernels import KernelSpec, worst_case_error

DEFAULT_SEED = 20150617
DEFAULT_SHIFTS = 1000
METHODS = ("order2net", "order1net", "halton", "sparsegrid", "fibonacci", "vdc")

KINK_SCALE = 15 * math.sqrt(5) / 4


def kink_g(x):
    """``(15 sqrt5 / 4) max(1/5 - (x - 1/2)^2, 0)``: unit integral, kinks at ``1/2 +- 5^-1/2``."""
    x = np.asarray(x, dtype=np.float64)
    return KINK_SCALE * np.maximum(0.2 - (x - 0.5) ** 2, 0.0)


def sqrt_hat_g(t):
    """``(3/2) sqrt(v(t))`` with the peak-1 tent ``v``; unit integral, square-root cusps at 0 and 1/2."""
    t = np.asarray(t, dtype=np.float64)
    y = t - np.floor(t)
    v = np.where(y < 0.5, 2 * y, 2 * (1 - y))
    return 1.5 * np.sqrt(v)


def one_g(x):
    return np.ones_like(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class TestFunction:
    """Tensor product ``prod_j g(x_j)`` on the torus with a known integral."""

    __test__ = False  # not a pytest class

    name: str
    g: Callable
    d: int
    integral: Fraction = Fraction(1)
    label: str = ""

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise DomainError(f"points have dimension {X.shape[1]}, function expects {self.d}")
        out = np.ones(X.shape[0])
        for j in range(self.d):
            out *= self.g(X[:, j])
        return out


def kink_function(d: int) -> TestFunction:
    return TestFunction("kink", kink_g, d, Fraction(1), "S^2_{1,inf}B")


def sqrt_hat_function(d: int) -> TestFunction:
    return TestFunction("sqrthat", sqrt_hat_g, d, Fraction(1), "S^{3/2}_{1,inf}B")


def constant_function(d: int) -> TestFunction:
    return TestFunction("one", one_g, d, Fraction(1), "const")


TEST_FUNCTIONS = {"kink": kink_function, "sqrthat": sqrt_hat_function, "one": constant_function}


def max_shift_error(
    rule: CubatureRule,
    f: TestFunction,
    shifts: Sequence[ShiftVector] | None = None,
    seed: int = DEFAULT_SEED,
    count: int = DEFAULT_SHIFTS,
) -> float:
    """``max_eta |sum_i w_i f(frac(x_i + eta)) - I(f)|`` over the shifts.

    Without explicit shifts, ``count`` shifts are drawn from ``seed``.
    """
    if rule.dim != f.d:
        raise DomainError(f"rule dimension {rule.dim} differs from function dimension {f.d}")
    if shifts is None:
        shifts = shift_table(seed, f.d, count)
    X = rule.points()
    w = rule.weight_array()
    target = float(f.integral)
    worst = 0.0
    for s in shifts:
        vals = f(frac(X + np.asarray(s.eta, dtype=np.float64)))
        worst = max(worst, abs(float(np.dot(w, vals)) - target))
    return worst


@dataclass(frozen=True)
class BuiltRule:
    rule: CubatureRule
    n: int
    checksum: str = ""


def build_rule(method: str, d: int, n: int, matrices=None, sigma: int = 2) -> BuiltRule:
    """Rule of size index ``n``.

    Nets, Halton: ``2^n`` points. Sparse grid: level ``n``. Fibonacci
    (``d = 2``): ``n`` is the Fibonacci index, ``N = F_n``. ``vdc`` is the
    van der Corput net (``d = 1``, identity matrix). The order-1
    baseline takes the first ``d`` coordinates of the same matrix file the
    order-2 net interlaces.
    """
    if method in ("order2net", "order1net"):
        path = net_matrix_path(sigma * d, n, matrices)
        mats = load_net(sigma * d, n, matrices)
        ps = generate_digital_net(mats)
        if method == "order2net":
            ps = interlace(ps, sigma)
        else:
            ps = ps.project(range(d))
        return BuiltRule(CubatureRule.from_pointset(ps, method), n, file_checksum(path))
    if method == "vdc":
        if d != 1:
            raise DomainError("the van der Corput net is one-dimensional")
        mats = GeneratingMatrixSet((BitMatrix.identity(n, rows=max(n, 1)),))
        return BuiltRule(CubatureRule.from_pointset(generate_digital_net(mats), "vdc"), n)
    if method == "halton":
        return BuiltRule(halton_rule(1 << n, d), n)
    if method == "sparsegrid":
        return BuiltRule(sparse_grid(n, d), n)
    if method == "fibonacci":
        if d != 2:
            raise DomainError("the Fibonacci lattice is two-dimensional")
        return BuiltRule(fibonacci_lattice(n), n)
    raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    log_exponent: float | None = None


@dataclass
class ConvergenceRecord:
    """Errors of one method over a range of sizes, with provenance."""

    method: str
    d: int
    r: str
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)  # (n, N, error, seconds)
    seed: int | None = None
    checksum: str = ""
    mode: str = "float"
    fit: FitResult | None = None

    def add(self, n: int, N: int, error: float, seconds: float) -> None:
        if self.rows and N <= self.rows[-1][1]:
            raise DomainError("sizes must increase strictly")
        self.rows.append((n, N, error, seconds))

    @property
    def N(self) -> list[int]:
        return [row[1] for row in self.rows]

    @property
    def errors(self) -> list[float]:
        return [row[2] for row in self.rows]


def fit_rate(record, with_log_correction: bool = False) -> FitResult:
    """Least squares for ``log2 e`` against ``log2 N`` (and ``log2 log2 N``).

    ``record`` is a ConvergenceRecord or a pair ``(N, errors)``.
    """
    if isinstance(record, ConvergenceRecord):
        N, errs = record.N, record.errors
    else:
        N, errs = record
    x = np.log2(np.asarray(N, dtype=np.float64))
    y = np.log2(np.asarray(errs, dtype=np.float64))
    if x.size < 4:
        raise DomainError(f"need at least 4 data points, got {x.size}")
    if np.ptp(x) == 0:
        raise DomainError("all sizes equal: degenerate design")
    cols = [x, np.ones_like(x)]
    if with_log_correction:
        if np.any(x <= 0):
            raise DomainError("log correction needs N > 1")
        cols.insert(1, np.log2(x))
    A = np.stack(cols, axis=1)
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise DomainError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    if with_log_correction:
        return FitResult(float(coef[0]), float(coef[2]), resid, float(coef[1]))
    return FitResult(float(coef[0]), float(coef[1]), resid)


def convergence_sweep(
    method: str,
    d: int,
    n_range: Sequence[int],
    spec: KernelSpec | None = None,
    f: TestFunction | None = None,
    shifts: Sequence[ShiftVector] | None = None,
    seed: int = DEFAULT_SEED,
    shift_count: int = DEFAULT_SHIFTS,
    matrices=None,
    exact: bool = False,
    sigma: int = 2,
) -> ConvergenceRecord:
    """Worst-case errors (``spec``) or maximal shifted errors (``f``) over ``n_range``."""
    if (spec is None) == (f is None):
        raise DomainError("give exactly one of a kernel spec or a test function")
    if f is not None and shifts is None:
        shifts = shift_table(seed, d, shift_count)
    label = str(spec.r) if spec is not None else f.name
    rec = ConvergenceRecord(method, d, label, seed=seed if f is not None else None)
    rec.mode = "exact" if exact else "float"
    sums = []
    for n in n_range:
        t0 = time.perf_counter()
        built = build_rule(method, d, n, matrices, sigma)
        if spec is not None:
            err = worst_case_error(built.rule, spec, exact=exact).error
        else:
            err = max_shift_error(built.rule, f, shifts)
        rec.add(n, built.rule.N, err, time.perf_counter() - t0)
        if built.checksum:
            sums.append(built.checksum)
    rec.checksum = ";".join(sums)
    if len(rec.rows) >= 4:
        rec.fit = fit_rate(rec)
    return rec


SWEEP_HEADER = ["method", "d", "r", "n", "N", "error", "slope_so_far", "seed", "seconds"]


def sweep_rows(rec: ConvergenceRecord, timing: bool = True) -> list[list[str]]:
    out = []
    for k, (n, N, err, sec) in enumerate(rec.rows):
        slope = ""
        if k >= 3:
            slope = f"{fit_rate((rec.N[: k + 1], rec.errors[: k + 1])).slope:.6f}"
        out.append(
            [
                rec.method,
                str(rec.d),
                rec.r,
                str(n),
                str(N),
                f"{err:.17g}",
                slope,
                "" if rec.seed is None else str(rec.seed),
                f"{sec:.3f}" if timing else "",
            ]
        )
    return out


def sweep_csv(records: Sequence[ConvergenceRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for rec in records:
        w.writerows(sweep_rows(rec, timing))
    return buf.getvalue()


def plot_data(rec: ConvergenceRecord) -> str:
    """Two whitespace-separated columns ``N error`` for gnuplot."""
    lines = [f"# {rec.method} d={rec.d} r={rec.r}"]
    lines += [f"{N} {err:.17g}" for _, N, err, _ in rec.rows]
    return "\n".join(lines) + "\n"
