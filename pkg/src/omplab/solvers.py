"""Greedy sparse-recovery solvers and least-squares debiasing.

Both OMP variants share one iteration: correlate the residual with every
column (f = X^H r), select the column with the largest modulus (ties go to
the smallest index), then recompute the residual as the projection of y onto
the orthogonal complement of all selected columns. The fixed variant runs
exactly k iterations; the stopping variant runs while ||X^H r||_inf exceeds
a threshold delta, with a hard iteration cap.

SOST (sorted one-step thresholding) is the one-pass baseline: the indices of
the k largest entries of |X^H y|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SensingMatrix, SupportSet

CONDITION_LIMIT = 1e12

# A residual this small relative to ||y|| is floating-point zero: the
# stopping rule treats it as having reached its threshold, so noiseless
# exact recovery terminates even with delta = 0.
NUMERICAL_ZERO_RTOL = 1e-12

TERMINATION_REACHED_K = "reached-k"
TERMINATION_THRESHOLD = "threshold"
TERMINATION_MAX_ITERATIONS = "max-iterations"


class SingularSelectionError(ValueError):
    """The Gram matrix of the selected columns is numerically singular."""

    def __init__(self, iteration: int, condition: float):
        self.iteration = iteration
        self.condition = condition
        super().__init__(
            f"selected columns are numerically dependent at iteration {iteration} "
            f"(condition estimate {condition:.3e} > {CONDITION_LIMIT:.1e})"
        )


@dataclass(frozen=True)
class RecoveryResult:
    """Outcome of a solver run.

    ``residual_norms`` starts with ||r_0|| = ||y|| and has one entry per
    iteration thereafter; ``correlation_peaks`` holds ||X^H r_{t-1}||_inf
    for each performed iteration; ``debiased`` is the dense least-squares
    re-estimate on the selected support when requested.
    """

    support: SupportSet
    iterations: int
    residual_norms: tuple[float, ...]
    correlation_peaks: tuple[float, ...]
    termination: str
    debiased: np.ndarray | None = None


def _check_conditioning(cols: np.ndarray, iteration: int) -> None:
    gram = cols.conj().T @ cols
    condition = float(np.linalg.cond(gram))
    if not math.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularSelectionError(iteration, condition)


def _project_out(cols: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Residual of y after projecting onto the span of ``cols``."""
    coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
    return y - cols @ coef


def _as_observation(matrix: SensingMatrix, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if y.shape != (matrix.n,):
        raise ValueError(f"observation must have length n={matrix.n}, got {y.shape[0]}")
    return y


def _run_omp(matrix, y, *, k=None, delta=None, max_iterations=None):
    X = matrix.entries
    selected: list[int] = []
    residual = y
    residual_norms = [float(np.linalg.norm(y))]
    peaks: list[float] = []
    cap = k if k is not None else max_iterations
    stop_level = None if delta is None else max(delta, NUMERICAL_ZERO_RTOL * residual_norms[0])
    while True:
        if len(selected) >= cap:
            termination = TERMINATION_REACHED_K if k is not None else TERMINATION_MAX_ITERATIONS
            break
        correlations = X.conj().T @ residual
        magnitudes = np.abs(correlations)
        peak = float(np.max(magnitudes))
        if stop_level is not None and peak <= stop_level:
            termination = TERMINATION_THRESHOLD
            break
        j = int(np.argmax(magnitudes))
        selected.append(j)
        cols = X[:, selected]
        _check_conditioning(cols, len(selected))
        residual = _project_out(cols, y)
        residual_norms.append(float(np.linalg.norm(residual)))
        peaks.append(peak)
    return selected, residual_norms, peaks, termination


def omp_fixed(matrix: SensingMatrix, y, k: int, debias: bool = False) -> RecoveryResult:
    """OMP run for exactly k iterations."""
    y = _as_observation(matrix, y)
    if not 1 <= k <= min(matrix.n, matrix.p):
        raise ValueError(f"need 1 <= k <= min(n, p) = {min(matrix.n, matrix.p)}, got k={k}")
    selected, norms, peaks, _ = _run_omp(matrix, y, k=k)
    support = SupportSet(order=tuple(j + 1 for j in selected), p=matrix.p)
    estimate = least_squares_debias(matrix, support, y) if debias else None
    return RecoveryResult(
        support=support,
        iterations=len(selected),
        residual_norms=tuple(norms),
        correlation_peaks=tuple(peaks),
        termination=TERMINATION_REACHED_K,
        debiased=estimate,
    )


def omp_stopping(
    matrix: SensingMatrix,
    y,
    delta: float,
    max_iterations: int | None = None,
    debias: bool = False,
) -> RecoveryResult:
    """OMP run while ||X^H r||_inf > delta, capped at ``max_iterations``.

    The cap defaults to min(n, p); on noisy data with delta = 0 the residual
    correlation stays positive, so the cap is what guarantees termination.
    Correlation peaks at or below NUMERICAL_ZERO_RTOL * ||y|| count as zero,
    so a residual that vanishes up to floating-point noise stops the loop
    for any delta >= 0.
    """
    y = _as_observation(matrix, y)
    if delta < 0:
        raise ValueError(f"threshold must be >= 0, got {delta}")
    limit = min(matrix.n, matrix.p)
    if max_iterations is None:
        max_iterations = limit
    if not 0 <= max_iterations <= limit:
        raise ValueError(f"need 0 <= max_iterations <= min(n, p) = {limit}")
    selected, norms, peaks, termination = _run_omp(
        matrix, y, delta=delta, max_iterations=max_iterations
    )
    support = SupportSet(order=tuple(j + 1 for j in selected), p=matrix.p)
    estimate = None
    if debias and selected:
        estimate = least_squares_debias(matrix, support, y)
    elif debias:
        estimate = np.zeros(matrix.p, dtype=np.complex128)
    return RecoveryResult(
        support=support,
        iterations=len(selected),
        residual_norms=tuple(norms),
        correlation_peaks=tuple(peaks),
        termination=termination,
        debiased=estimate,
    )


def stopping_threshold(sigma: float, p: int, alpha: float) -> float:
    """Noise-scaled stopping threshold sigma * sqrt((1 + alpha) ln p)."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return sigma * math.sqrt((1.0 + alpha) * math.log(p))


def sost(matrix: SensingMatrix, y, k: int) -> SupportSet:
    """Indices of the k largest |X^H y| entries, in descending magnitude order.

    Ties are broken toward the smaller index.
    """
    y = _as_observation(matrix, y)
    if not 1 <= k <= matrix.p:
        raise ValueError(f"need 1 <= k <= p = {matrix.p}, got k={k}")
    magnitudes = np.abs(matrix.entries.conj().T @ y)
    order = np.argsort(-magnitudes, kind="stable")[:k]
    return SupportSet(order=tuple(int(j) + 1 for j in order), p=matrix.p)


def least_squares_debias(matrix: SensingMatrix, support: SupportSet, y) -> np.ndarray:
    """Least-squares coefficients on the selected columns, zero elsewhere."""
    y = _as_observation(matrix, y)
    if len(support) == 0:
        raise ValueError("debias requires a nonempty support")
    if len(support) > matrix.n:
        raise ValueError(f"support size {len(support)} exceeds n={matrix.n}")
    cols = matrix.columns(support.order)
    _check_conditioning(cols, len(support))
    coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
    estimate = np.zeros(matrix.p, dtype=np.complex128)
    estimate[np.asarray(support.order) - 1] = coef
    return estimate
