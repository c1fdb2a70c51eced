"""Text format for generating matrices.

Line 1 is ``d s n``; then ``d`` blocks of ``s`` lines, each exactly ``n``
characters from ``{0,1}``. Line ``a`` of block ``i`` is row ``c_{i,a}``;
character ``k`` of a row multiplies the index digit ``nu_k`` (least
significant first). Published matrices that use the transposed or
most-significant-first convention must be converted before shipping.
"""

from __future__ import annotations

import hashlib
import json
import os
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, MatrixFileError
from .gf2 import BitMatrix
from .nets import GeneratingMatrixSet

MATRIX_DIR_ENV = "QMCNET_MATRIX_DIR"


def parse_matrices(text: str, path="<string>") -> GeneratingMatrixSet:
    lines = text.splitlines()
    if not lines:
        raise MatrixFileError(path, 1, "empty file, expected header 'd s n'")
    head = lines[0].split()
    if len(head) != 3 or not all(h.isdigit() for h in head):
        raise MatrixFileError(path, 1, f"expected header 'd s n', got {lines[0]!r}")
    d, s, n = map(int, head)
    if d < 1 or s < 1 or s < n:
        raise MatrixFileError(path, 1, f"invalid shape d={d} s={s} n={n}")
    expected = 1 + d * s
    mats = []
    for i in range(d):
        rows = []
        for a in range(s):
            lineno = 2 + i * s + a
            if lineno > len(lines):
                raise MatrixFileError(path, lineno, f"missing row {a + 1} of matrix {i + 1}")
            row = lines[lineno - 1].strip()
            if len(row) != n:
                raise MatrixFileError(path, lineno, f"row has {len(row)} characters, expected {n}")
            if set(row) - {"0", "1"}:
                raise MatrixFileError(path, lineno, "row contains characters other than 0/1")
            rows.append(sum(1 << k for k, ch in enumerate(row) if ch == "1"))
        mats.append(BitMatrix(s, n, tuple(rows)))
    for extra in range(expected, len(lines)):
        if lines[extra].strip():
            raise MatrixFileError(path, extra + 1, "unexpected content after last matrix")
    return GeneratingMatrixSet(tuple(mats))


def load_matrices(path) -> GeneratingMatrixSet:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"matrix file not found: {path}")
    return parse_matrices(path.read_text(), path)


def format_matrices(mats: GeneratingMatrixSet) -> str:
    out = [f"{mats.d} {mats.s} {mats.n}"]
    for m in mats.matrices:
        out.extend(m.to_strings())
    return "\n".join(out) + "\n"


def save_matrices(mats: GeneratingMatrixSet, path) -> None:
    Path(path).write_text(format_matrices(mats))


def file_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def matrix_dir(override=None) -> Path:
    """Directory holding net matrix files: override, then env var, then shipped data."""
    if override:
        return Path(override)
    env = os.environ.get(MATRIX_DIR_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("qmcnet") / "data" / "matrices"))


def net_matrix_path(dim: int, n: int, directory=None) -> Path:
    """Shipped order-1 net in ``dim`` dimensions with ``2^n`` points."""
    return matrix_dir(directory) / f"sobol_net_d{dim}_n{n}.txt"


def load_net(dim: int, n: int, directory=None) -> GeneratingMatrixSet:
    path = net_matrix_path(dim, n, directory)
    if not path.is_file():
        raise ConfigError(f"no matrix file for a {dim}-dimensional net with 2^{n} points: {path}")
    return load_matrices(path)


def manifest(directory=None) -> list[dict]:
    """Entries of ``manifest.json``: file, dim, n, declared t."""
    path = matrix_dir(directory) / "manifest.json"
    if not path.is_file():
        return []
    return json.loads(path.read_text())["nets"]
