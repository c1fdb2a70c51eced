"""Exhaustive order-sigma t-value of a generating matrix set.

For each coordinate a selection of rows is weighted by the sum of its
``sigma`` largest row indices. The net has order-sigma quality ``t`` iff
every selection with total weight ``<= sigma n - t`` is linearly independent.
Only inclusion-maximal selections of a given weight need checking: below the
``sigma``-th largest index every smaller row can be added for free. So per
coordinate the candidates are arbitrary sets of fewer than ``sigma`` rows,
and sets ``{1..a_min} | top`` whose top-``sigma`` part starts at ``a_min``.

The search finds the least weight ``W`` of any dependent selection; then
``t = max(0, sigma n - W + 1)``.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..errors import CapacityError, DomainError
from .gf2 import insert
from .nets import GeneratingMatrixSet

SEARCH_GUARD = 10**7


def _candidates(s: int, sigma: int, cap: int) -> list[tuple[int, tuple[int, ...]]]:
    """(weight, row indices) per coordinate, weight in [1, cap], sorted by weight."""
    out = []
    for size in range(1, sigma):
        for rows in combinations(range(1, s + 1), size):
            w = sum(rows)
            if w <= cap:
                out.append((w, rows))
    for top in combinations(range(1, s + 1), sigma):
        w = sum(top)
        if w <= cap:
            out.append((w, tuple(range(1, top[0])) + top))
    out.sort()
    return out


def count_selections(s: int, d: int, sigma: int, cap: int) -> int:
    """Number of candidate selections with total weight <= cap."""
    hist = np.zeros(cap + 1, dtype=object)
    hist[0] = 1
    for w, _ in _candidates(s, sigma, cap):
        hist[w] += 1
    total = np.zeros(cap + 1, dtype=object)
    total[0] = 1
    for _ in range(d):
        total = np.convolve(total, hist)[: cap + 1]
    return int(sum(total))


def verify_order_sigma_t(
    mats: GeneratingMatrixSet, sigma: int, guard: int = SEARCH_GUARD
) -> int:
    """Least ``t`` for which ``mats`` generate an order-``sigma`` digital ``(t, n, d)``-net."""
    if sigma < 1:
        raise DomainError("sigma must be >= 1")
    n, s, d = mats.n, mats.s, mats.d
    if sigma * n > s:
        raise DomainError(f"need sigma*n <= s, got sigma={sigma}, n={n}, s={s}")
    cap = sigma * n
    if cap == 0:
        return 0
    work = count_selections(s, d, sigma, cap)
    if work > guard:
        raise CapacityError(
            f"{work} row selections exceed the guard {guard}; reduce n, d or sigma"
        )
    cands = _candidates(s, sigma, cap)
    rows = [m.bits for m in mats.matrices]
    best = cap + 1

    def search(i: int, weight: int, basis: dict[int, int]) -> None:
        nonlocal best
        if i == d:
            return
        search(i + 1, weight, basis)
        for w, sel in cands:
            total = weight + w
            if total >= best:
                break
            trial = dict(basis)
            ok = True
            for a in sel:
                if not insert(trial, rows[i][a - 1]):
                    ok = False
                    break
            if ok:
                search(i + 1, total, trial)
            else:
                best = total

    search(0, 0, {})
    return max(0, cap - best + 1)
