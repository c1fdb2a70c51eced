#!/usr/bin/env python3
"""Regenerate the shipped order-1 net matrices.

Each file ``sobol_net_d{D}_n{n}.txt`` holds the generating matrices of the
``D``-dimensional digital net obtained from the first ``D - 1`` coordinates
of the Sobol sequence (Joe-Kuo ``new-joe-kuo-6.21201`` direction numbers) by
truncating to ``n`` digits and appending the equidistant coordinate
``i / 2^n``. ``manifest.json`` records the t-value bound of each net, taken
from the primitive-polynomial degrees: ``t <= sum_j (deg p_j - 1)``.

Usage: python tools/make_matrices.py [--out DIR] [--max-dim 10] [--max-n 14]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from qmcnet.f2core import BitMatrix, GeneratingMatrixSet, save_matrices, sequence_to_net_matrices

# (degree s, coefficient code a, initial m_1..m_s) for Sobol coordinates 2, 3, ...
JOE_KUO = [
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
]


def direction_integers(s: int, a: int, m_init, count: int) -> list[int]:
    m = list(m_init)
    for k in range(s, count):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    return m[:count]


def sobol_matrix(coord: int, n: int) -> BitMatrix:
    """n x n generating matrix of Sobol coordinate ``coord`` (1-based)."""
    if coord == 1:
        return BitMatrix.identity(n)
    s, a, m_init = JOE_KUO[coord - 2]
    m = direction_integers(s, a, m_init, n)
    rows = [0] * n
    for k in range(n):
        # column k is v_{k+1} = m_{k+1} / 2^{k+1}
        for row in range(1, k + 2):
            if (m[k] >> (k + 1 - row)) & 1:
                rows[row - 1] |= 1 << k
    return BitMatrix(n, n, tuple(rows))


def degree(coord: int) -> int:
    return 1 if coord == 1 else JOE_KUO[coord - 2][0]


def net_matrices(dim: int, n: int) -> GeneratingMatrixSet:
    if dim == 1:
        return GeneratingMatrixSet((BitMatrix.anti_identity(n),))
    seq = GeneratingMatrixSet(tuple(sobol_matrix(c, n) for c in range(1, dim)))
    return sequence_to_net_matrices(seq, n)


def t_bound(dim: int, n: int) -> int:
    return min(n, sum(degree(c) - 1 for c in range(1, dim)))


def main() -> None:
    default = Path(__file__).resolve().parents[1] / "src" / "qmcnet" / "data" / "matrices"
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=default)
    ap.add_argument("--max-dim", type=int, default=len(JOE_KUO) + 1)
    ap.add_argument("--max-n", type=int, default=14)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    entries = []
    for dim in range(1, args.max_dim + 1):
        for n in range(1, args.max_n + 1):
            name = f"sobol_net_d{dim}_n{n}.txt"
            save_matrices(net_matrices(dim, n), args.out / name)
            entries.append({"file": name, "dim": dim, "n": n, "t": t_bound(dim, n)})
    meta = {
        "source": "Sobol sequence, Joe-Kuo new-joe-kuo-6.21201, sequence-to-net with equidistant last coordinate",
        "nets": entries,
    }
    (args.out / "manifest.json").write_text(json.dumps(meta, indent=1) + "\n")


if __name__ == "__main__":
    main()
