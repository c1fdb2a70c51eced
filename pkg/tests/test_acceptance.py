"""Acceptance criteria: one test per criterion, each printing a PASS/FAIL line."""

import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from qmcnet.errors import CapacityError
from qmcnet.experiments import (
    build_rule,
    convergence_sweep,
    fit_rate,
    kink_function,
    sqrt_hat_function,
)
from qmcnet.f2core import (
    PointSet,
    check_equidistribution,
    generate_digital_net,
    interlace_matrices,
    load_net,
    manifest,
    verify_order_sigma_t,
)
from qmcnet.faberhaar import (
    HaarIndex,
    faber_error_coeff,
    faber_error_expansion,
    faber_reconstruct,
    haar_coeff_discrepancy,
    haar_coeff_piecewise,
    haar_decay_profile,
    random_hat_combination,
)
from qmcnet.generators import CubatureRule, fibonacci_lattice, halton_rule, shift_table, sparse_grid
from qmcnet.kernels import KernelSpec, kernel_1d, worst_case_error


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{label}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return emit


def test_ac1_kernel_exactness(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    x, y = rng.random(1000), rng.random(1000)
    worst = 0.0
    for r in (1, 2):
        closed = kernel_1d(KernelSpec(1, r, mode="closed"), x, y)
        series = kernel_1d(KernelSpec(1, r, mode="series", eps=5e-11), x, y)
        worst = max(worst, float(np.max(np.abs(closed - series))))
    diag1 = kernel_1d(KernelSpec(1, 1), F(3, 7), F(3, 7))
    diag2 = kernel_1d(KernelSpec(1, 2), F(3, 7), F(3, 7))
    secs = time.perf_counter() - t0
    ok = worst < 1e-10 and diag1 == F(13, 12) and diag2 == 1 + F(1, 720) and secs < 1
    report("AC1 kernel exactness", ok, f"max |closed - series| = {worst:.2e}, diagonals {diag1}, {diag2}, {secs:.2f} s")
    assert ok


def _ac2_rules():
    for n in range(0, 9):
        yield f"vdc n={n}", build_rule("vdc", 1, n).rule
    for d in (1, 2):
        for n in range(1, 9):
            yield f"order2net d={d} n={n}", build_rule("order2net", d, n).rule
    for n in range(1, 9):
        yield f"order1net d=2 n={n}", build_rule("order1net", 2, n).rule
        yield f"net d=3 n={n}", CubatureRule.from_pointset(generate_digital_net(load_net(3, n)))
    for m in range(3, 14):
        yield f"fibonacci m={m}", fibonacci_lattice(m)
    for N in (1, 2, 3, 5, 8, 17, 64, 100, 255, 256):
        yield f"equispaced N={N}", CubatureRule(np.arange(N)[:, None], (N,))


def test_ac2_wce_oracle(report):
    t0 = time.perf_counter()
    worst, where, count = 0.0, "", 0
    for name, rule in _ac2_rules():
        assert rule.N <= 256
        for r in (1, 2):
            spec = KernelSpec(rule.dim, r)
            exact = worst_case_error(rule, spec, exact=True)
            approx = worst_case_error(rule, spec)
            ref = math.sqrt(float(exact.squared))
            rel = abs(approx.error - ref) / ref
            count += 1
            if rel > worst:
                worst, where = rel, f"{name} r={r}"
    equi = True
    for N in range(1, 257):
        rule = CubatureRule(np.arange(N)[:, None], (N,))
        equi &= worst_case_error(rule, KernelSpec(1, 1), exact=True).squared == F(1, 12 * N * N)
        equi &= abs(worst_case_error(rule, KernelSpec(1, 1)).error * math.sqrt(12) * N - 1) < 1e-14
    secs = time.perf_counter() - t0
    ok = worst <= 1e-10 and equi and secs < 30
    report("AC2 WCE oracle", ok, f"{count} cases, max relative deviation {worst:.2e} at {where}, equispaced closed form {equi}, {secs:.1f} s")
    assert ok


def test_ac3_net_structure(report):
    t0 = time.perf_counter()
    checked = interlaced = 0
    failures = []
    for e in manifest():
        dim, n, tp = e["dim"], e["n"], e["t"]
        if n > 10:
            continue
        mats = load_net(dim, n)
        if dim <= 3:
            checked += 1
            if not check_equidistribution(generate_digital_net(mats), tp):
                failures.append(f"equidistribution d={dim} n={n}")
            if verify_order_sigma_t(mats, 1) > tp:
                failures.append(f"order-1 t d={dim} n={n}")
        if dim % 2 == 0 and dim // 2 <= 3:
            d = dim // 2
            try:
                t2 = verify_order_sigma_t(interlace_matrices(mats, 2), 2)
            except CapacityError:
                continue
            interlaced += 1
            if t2 > 2 * tp + d:
                failures.append(f"interlaced t={t2} > {2 * tp + d} d={d} n={n}")
    secs = time.perf_counter() - t0
    ok = not failures and checked > 0 and interlaced > 0 and secs < 300
    report("AC3 net structure", ok, f"{checked} files, {interlaced} interlaced, failures {failures or 'none'}, {secs:.1f} s")
    assert ok


def test_ac4_haar_faber(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    constants = {}
    for d in (1, 2, 3):
        ratios = set()
        used = 0
        while used < 100:
            N = int(rng.integers(1, 9))
            P = [tuple(F(int(a), 32) for a in rng.integers(0, 32, size=d)) for _ in range(N)]
            j = tuple(int(a) for a in rng.integers(0, 4, size=d))
            m = tuple(int(rng.integers(0, 2**a)) for a in j)
            idx = HaarIndex(j, m)
            mu = haar_coeff_discrepancy(P, idx)
            assert mu == haar_coeff_piecewise(P, idx)
            c = faber_error_coeff(P, idx)
            if c == 0:
                assert mu == 0
                continue
            ratios.add(mu / (F(1, 2 ** sum(j)) * c))
            used += 1
        constants[d] = ratios
    base = haar_coeff_piecewise([(F(0),)], HaarIndex((0,), (0,)))
    secs = time.perf_counter() - t0
    ok = all(len(v) == 1 for v in constants.values()) and base == F(1, 4) and secs < 60
    shown = ", ".join(f"d={d}: {sorted(str(x) for x in v)}" for d, v in constants.items())
    report("AC4 Haar-Faber consistency", ok, f"ratios {shown}; N=1 value {base}; {secs:.1f} s")
    assert ok


def test_ac5_rates(report):
    t0 = time.perf_counter()
    slopes = {}
    for r in (1, 2):
        slopes[f"order2net r={r}"] = convergence_sweep("order2net", 2, range(4, 13), spec=KernelSpec(2, r)).fit.slope
    slopes["halton r=2"] = convergence_sweep("halton", 2, range(4, 13), spec=KernelSpec(2, 2)).fit.slope
    slopes["fibonacci r=2"] = convergence_sweep("fibonacci", 2, range(7, 19), spec=KernelSpec(2, 2)).fit.slope
    secs = time.perf_counter() - t0
    bands = {
        "order2net r=1": (-1.3, -0.7),
        "order2net r=2": (-2.3, -1.7),
        "halton r=2": (-1.3, -0.8),
        "fibonacci r=2": (-2.3, -1.7),
    }
    ok = all(lo <= slopes[k] <= hi for k, (lo, hi) in bands.items()) and secs < 600
    report("AC5 WCE rates", ok, ", ".join(f"{k}: {v:.3f}" for k, v in slopes.items()) + f", {secs:.1f} s")
    assert ok


def _level0_slope(method):
    ns = (4, 6, 8)
    values = []
    for n in ns:
        rule = build_rule(method, 2, n).rule
        ps = PointSet(rule.num, rule.den[0].bit_length() - 1)
        values.append(haar_decay_profile(ps, n, t=0)[0][1])
    if any(v == 0 for v in values):
        return -math.inf, values
    y = [math.log2(v) for v in values]
    return float(np.polyfit(ns, y, 1)[0]), values


def test_ac6_haar_decay(report):
    t0 = time.perf_counter()
    s2, v2 = _level0_slope("order2net")
    s1, v1 = _level0_slope("order1net")
    secs = time.perf_counter() - t0
    ok = s2 <= -1.7 and s1 >= -1.3 and secs < 120
    fmt = lambda vs: ", ".join(f"{float(v):.3g}" for v in vs)
    report(
        "AC6 Haar decay",
        ok,
        f"order-2 shell-0 maxima [{fmt(v2)}] slope {s2:.2f}; order-1 [{fmt(v1)}] slope {s1:.2f}; {secs:.1f} s",
    )
    assert ok


def test_ac7_kink_rates(report):
    t0 = time.perf_counter()
    slopes = {}
    for d in (1, 2):
        shifts = shift_table(12345, d, 100)
        for f, band in ((kink_function(d), (-2.4, -1.6)), (sqrt_hat_function(d), (-1.8, -1.2))):
            rec = convergence_sweep("order2net", d, range(4, 15), f=f, shifts=shifts)
            slopes[f"{f.name} d={d}"] = (fit_rate(rec).slope, band)
    secs = time.perf_counter() - t0
    ok = all(lo <= s <= hi for s, (lo, hi) in slopes.values()) and secs < 300
    report("AC7 test-function rates", ok, ", ".join(f"{k}: {s:.2f}" for k, (s, _) in slopes.items()) + f", {secs:.1f} s")
    assert ok


def test_ac8_faber_machinery(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    recon = ident = 0
    for k in range(50):
        d = 1 + k % 3
        f = random_hat_combination(rng, d, max_level=3 if d < 3 else 2, count=5)
        L = max(f.max_level, 0)
        series = faber_reconstruct(f, d, L)
        for _ in range(20):
            x = tuple(F(int(a), 1 << 10) for a in rng.integers(0, 1 << 10, size=d))
            recon += series(x) == f(x)
        x = tuple(F(int(a), 101) for a in rng.integers(0, 101, size=d))
        recon += series(x) == f(x)
        pts = [tuple(F(int(a), 97) for a in rng.integers(0, 97, size=d)) for _ in range(5)]
        rules = [
            build_rule("order2net", d, 3).rule,
            build_rule("order1net", d, 4).rule,
            halton_rule(7, d),
            sparse_grid(3, d),
            CubatureRule(np.array([[int(x * 97) for x in p] for p in pts]), (97,) * d),
        ]
        for rule in rules:
            w = rule.exact_weights()
            Q = sum((wi * f(p) for wi, p in zip(w, rule.exact_points())), F(0))
            ident += faber_error_expansion(f, rule, d, L, series) == Q - f.integral()
    secs = time.perf_counter() - t0
    ok = recon == 50 * 21 and ident == 50 * 5 and secs < 60
    report("AC8 Faber machinery", ok, f"reconstruction {recon}/{50 * 21}, error identity {ident}/250, {secs:.1f} s")
    assert ok
