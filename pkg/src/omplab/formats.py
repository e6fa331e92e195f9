"""Text exchange formats for matrices, signals, and observation vectors.

Matrix file: line 1 is ``n p``; each of the next n lines holds p entries
formatted ``re,im`` and separated by single spaces. Signal file: line 1 is
``p k``; each of the next k lines is ``index re,im`` with a 1-based index.
Vector file (observations, probe vectors): line 1 is ``n``; each of the next
n lines is ``re,im``. All floats are written with 17 significant digits so a
write/read round trip is exact for float64.
"""

from __future__ import annotations

import numpy as np

from .model import SensingMatrix, SparseSignal

READ_NORM_ATOL = 1e-6


class MatrixFormatError(ValueError):
    """A file does not conform to one of the text exchange formats."""


def _fmt(z: complex) -> str:
    return f"{z.real:.17g},{z.imag:.17g}"


def _parse_complex(token: str, where: str) -> complex:
    parts = token.split(",")
    if len(parts) != 2:
        raise MatrixFormatError(f"{where}: expected 're,im', got {token!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise MatrixFormatError(f"{where}: non-numeric token {token!r}") from None


def write_matrix(matrix: SensingMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{matrix.n} {matrix.p}\n")
        for row in matrix.entries:
            fh.write(" ".join(_fmt(z) for z in row) + "\n")


def read_matrix(path) -> SensingMatrix:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(f"malformed header {lines[0]!r}, expected 'n p'")
    try:
        n, p = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError(f"malformed header {lines[0]!r}, expected two integers") from None
    if len(lines) - 1 < n:
        raise MatrixFormatError(f"expected {n} data rows, found {len(lines) - 1}")
    entries = np.empty((n, p), dtype=np.complex128)
    for i in range(n):
        tokens = lines[i + 1].split()
        if len(tokens) != p:
            raise MatrixFormatError(f"row {i + 1}: expected {p} entries, found {len(tokens)}")
        for j, token in enumerate(tokens):
            entries[i, j] = _parse_complex(token, f"row {i + 1}")
    norms = np.linalg.norm(entries, axis=0)
    bad = np.nonzero(np.abs(norms - 1.0) > READ_NORM_ATOL)[0]
    if bad.size:
        j = int(bad[0]) + 1
        raise MatrixFormatError(
            f"column {j} has norm {norms[bad[0]]:.12g}, deviating from 1 by more than {READ_NORM_ATOL}"
        )
    return SensingMatrix(entries=entries, label=f"file:{path}")


def write_signal(signal: SparseSignal, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{signal.p} {signal.k}\n")
        for index, value in zip(signal.support, signal.values):
            fh.write(f"{index} {_fmt(value)}\n")


def read_signal(path) -> SparseSignal:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty signal file")
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(f"malformed header {lines[0]!r}, expected 'p k'")
    try:
        p, k = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError(f"malformed header {lines[0]!r}, expected two integers") from None
    if len(lines) - 1 < k:
        raise MatrixFormatError(f"expected {k} data rows, found {len(lines) - 1}")
    support = []
    values = []
    for i in range(k):
        tokens = lines[i + 1].split()
        if len(tokens) != 2:
            raise MatrixFormatError(f"row {i + 1}: expected 'index re,im'")
        try:
            support.append(int(tokens[0]))
        except ValueError:
            raise MatrixFormatError(f"row {i + 1}: non-integer index {tokens[0]!r}") from None
        values.append(_parse_complex(tokens[1], f"row {i + 1}"))
    return SparseSignal(p=p, support=tuple(support), values=np.asarray(values))


def write_vector(vec, path) -> None:
    vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
    with open(path, "w") as fh:
        fh.write(f"{vec.size}\n")
        for z in vec:
            fh.write(_fmt(z) + "\n")


def read_vector(path) -> np.ndarray:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty vector file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise MatrixFormatError(f"malformed header {lines[0]!r}, expected an integer") from None
    if len(lines) - 1 < n:
        raise MatrixFormatError(f"expected {n} data rows, found {len(lines) - 1}")
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        out[i] = _parse_complex(lines[i + 1].strip(), f"row {i + 1}")
    return out
