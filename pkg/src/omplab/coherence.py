"""Coherence parameters of a sensing matrix and the sign-flip reduction.

Two scalar parameters drive every recovery guarantee in this package:

* worst-case coherence ``mu``: the largest magnitude inner product between
  distinct unit-norm columns;
* average coherence ``nu``: the largest (over columns i) magnitude of the
  complex sum of inner products of column i with all other columns, divided
  by p - 1. The magnitude is taken after summation, not summed magnitudes.

A matrix satisfies the strong coherence property when
``mu <= 1/(240 ln p)`` and ``nu <= mu / sqrt(n)``. Natural logarithms are
used everywhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SensingMatrix

MU_UPPER_SLACK = 1e-12
SPECTRAL_LOWER_SLACK = 1e-9
MAX_WIGGLE_SWEEPS = 100


@dataclass(frozen=True)
class CoherenceProfile:
    """Worst-case coherence, average coherence, and spectral norm of a matrix."""

    mu: float
    nu: float
    spectral_norm: float
    n: int
    p: int

    def __post_init__(self):
        if not (0.0 <= self.nu <= self.mu <= 1.0 + MU_UPPER_SLACK):
            raise ValueError(
                f"coherences must satisfy 0 <= nu <= mu <= 1, got mu={self.mu}, nu={self.nu}"
            )
        if self.spectral_norm < 1.0 - SPECTRAL_LOWER_SLACK:
            raise ValueError(
                f"a unit-norm column forces spectral norm >= 1, got {self.spectral_norm}"
            )


@dataclass(frozen=True)
class StrongCoherenceReport:
    """Margins of a profile against the strong coherence property."""

    mu_threshold: float
    mu_margin: float
    nu_threshold: float
    nu_margin: float
    satisfied: bool


def offdiagonal_gram(matrix: SensingMatrix) -> np.ndarray:
    """Gram matrix X^H X with its diagonal zeroed.

    Entry (i, j) is the inner product <x_i, x_j>, conjugate-linear in the
    first argument.
    """
    gram = matrix.entries.conj().T @ matrix.entries
    np.fill_diagonal(gram, 0.0)
    return gram


def coherence_profile(matrix: SensingMatrix) -> CoherenceProfile:
    """Compute (mu, nu, spectral norm) for a unit-norm matrix with p >= 2."""
    if matrix.p < 2:
        raise ValueError("coherence requires at least two columns")
    gram = offdiagonal_gram(matrix)
    mu = float(np.max(np.abs(gram)))
    nu = float(np.max(np.abs(gram.sum(axis=1))) / (matrix.p - 1))
    spectral = float(np.linalg.norm(matrix.entries, 2))
    return CoherenceProfile(mu=mu, nu=nu, spectral_norm=spectral, n=matrix.n, p=matrix.p)


def check_strong_coherence(profile: CoherenceProfile) -> StrongCoherenceReport:
    mu_threshold = 1.0 / (240.0 * math.log(profile.p))
    nu_threshold = profile.mu / math.sqrt(profile.n)
    mu_margin = mu_threshold - profile.mu
    nu_margin = nu_threshold - profile.nu
    return StrongCoherenceReport(
        mu_threshold=mu_threshold,
        mu_margin=mu_margin,
        nu_threshold=nu_threshold,
        nu_margin=nu_margin,
        satisfied=bool(mu_margin >= 0 and nu_margin >= 0),
    )


def welch_bound(n: int, p: int) -> float:
    """Universal lower bound sqrt((p-n)/(n(p-1))) on mu for n x p unit-norm frames.

    Returns 0 when p <= n, where orthonormal columns are achievable.
    """
    if n < 1 or p < 2:
        raise ValueError(f"need n >= 1 and p >= 2, got n={n}, p={p}")
    if p <= n:
        return 0.0
    return math.sqrt((p - n) / (n * (p - 1.0)))


def wiggle(matrix: SensingMatrix) -> tuple[SensingMatrix, np.ndarray]:
    """Flip column signs to reduce average coherence.

    Greedy coordinate descent: sweep columns in index order, setting each
    sign to whichever of +1/-1 yields the smaller nu with all other signs
    held fixed (ties keep +1); stop when a full sweep changes nothing or
    after 100 sweeps. The worst-case coherence and spectral norm are exactly
    invariant under sign flips, and nu never increases.

    Returns the sign-flipped matrix and the per-column sign pattern.
    """
    p = matrix.p
    signs = np.ones(p)
    if p >= 2:
        gram = offdiagonal_gram(matrix)
        row_sums = gram @ signs
        for _ in range(MAX_WIGGLE_SWEEPS):
            changed = False
            for j in range(p):
                col = gram[:, j]
                with_plus = row_sums + (1.0 - signs[j]) * col
                with_minus = row_sums - (1.0 + signs[j]) * col
                nu_plus = np.max(np.abs(with_plus))
                nu_minus = np.max(np.abs(with_minus))
                pick = 1.0 if nu_plus <= nu_minus else -1.0
                if pick != signs[j]:
                    row_sums = with_plus if pick > 0 else with_minus
                    signs[j] = pick
                    changed = True
            if not changed:
                break
    flipped = SensingMatrix(
        entries=matrix.entries * signs[np.newaxis, :],
        label=f"wiggled({matrix.label})" if matrix.label else "wiggled",
    )
    return flipped, signs
