"""Independent reference implementations used only as test oracles.

Everything here is written straight-line from the algorithm statements,
recomputing each projection from scratch via explicit normal equations.
It deliberately shares no code with omplab.solvers.
"""

import numpy as np


def omp_reference(entries: np.ndarray, y: np.ndarray, k: int):
    """Plain OMP: argmax of |X^H r| (first index on ties), then re-solve the
    normal equations on the selected columns from scratch.

    Returns (0-based selection order, residual norms including r_0).
    """
    selected = []
    residual = y.astype(np.complex128)
    norms = [float(np.linalg.norm(residual))]
    for _ in range(k):
        correlations = entries.conj().T @ residual
        best = 0
        best_mag = -1.0
        for j, value in enumerate(correlations):
            mag = abs(value)
            if mag > best_mag:
                best = j
                best_mag = mag
        selected.append(best)
        cols = entries[:, selected]
        gram = cols.conj().T @ cols
        rhs = cols.conj().T @ y
        coef = np.linalg.solve(gram, rhs)
        residual = y - cols @ coef
        norms.append(float(np.linalg.norm(residual)))
    return selected, norms


def debias_reference(entries: np.ndarray, support_1based, y: np.ndarray) -> np.ndarray:
    """Dense least-squares estimate via explicit Gram inversion."""
    idx = [int(j) - 1 for j in support_1based]
    cols = entries[:, idx]
    gram = cols.conj().T @ cols
    coef = np.linalg.inv(gram) @ (cols.conj().T @ y)
    estimate = np.zeros(entries.shape[1], dtype=np.complex128)
    estimate[idx] = coef
    return estimate


def gabor_mu_bruteforce(entries: np.ndarray) -> float:
    """Worst-case coherence by looping over every column pair."""
    p = entries.shape[1]
    mu = 0.0
    for i in range(p):
        for j in range(i + 1, p):
            mu = max(mu, abs(np.vdot(entries[:, i], entries[:, j])))
    return mu
