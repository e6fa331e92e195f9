"""Core domain types: sensing matrices, sparse signals, noise, and measurements.

Conventions used throughout the package:

* all vectors and matrices are complex128; real problems ride the same code
  path with zero imaginary parts;
* a circular complex Gaussian entry with power ``sigma2`` has independent
  real and imaginary parts of variance ``sigma2 / 2`` each, so that
  ``E|eta_i|^2 = sigma2`` and ``E||eta||^2 = n * sigma2``;
* indices exposed to users (supports, file formats, JSON) are 1-based;
  0-based indices appear only when slicing numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

COLUMN_NORM_ATOL = 1e-9


def spawn_rng(*keys: int) -> np.random.Generator:
    """Deterministic generator derived from a path of integer keys.

    Two calls with the same key path always yield the same stream; distinct
    paths yield independent streams. This is the only way randomness enters
    the package, which keeps every Monte Carlo trial reproducible in
    isolation.
    """
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in keys)))


def complex_gaussian(rng: np.random.Generator, size, variance: float) -> np.ndarray:
    """Draw circular complex Gaussian samples with E|z|^2 = variance."""
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


@dataclass(frozen=True)
class SensingMatrix:
    """An n x p measurement matrix with unit-norm columns.

    ``label`` records provenance (generator name and seed, or source file).
    """

    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        n, p = entries.shape
        if n < 1 or p < 1:
            raise ValueError(f"matrix must have n >= 1 and p >= 1, got {n} x {p}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("matrix entries must be finite")
        norms = np.linalg.norm(entries, axis=0)
        bad = np.nonzero(np.abs(norms - 1.0) > COLUMN_NORM_ATOL)[0]
        if bad.size:
            j = int(bad[0]) + 1
            raise ValueError(
                f"column {j} has norm {norms[bad[0]]:.12g}, expected 1 within {COLUMN_NORM_ATOL}"
            )
        entries = entries.copy(order="C")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]

    def columns(self, indices) -> np.ndarray:
        """Submatrix of the 1-based column indices, in the given order."""
        idx = np.asarray(list(indices), dtype=int) - 1
        if idx.size and (idx.min() < 0 or idx.max() >= self.p):
            raise ValueError(f"column index out of range 1..{self.p}")
        return self.entries[:, idx]


@dataclass(frozen=True)
class SparseSignal:
    """A length-p vector with k nonzero entries at an explicit support.

    ``support`` is strictly increasing and 1-based; ``values`` holds the
    matching nonzero coefficients.
    """

    p: int
    support: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        support = tuple(int(i) for i in self.support)
        values = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        k = len(support)
        if not 1 <= k <= self.p:
            raise ValueError(f"need 1 <= k <= p, got k={k}, p={self.p}")
        if values.shape != (k,):
            raise ValueError("values must align with the support")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support indices must be strictly increasing")
        if support[0] < 1 or support[-1] > self.p:
            raise ValueError(f"support indices must lie in 1..{self.p}")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        if np.any(np.abs(values) == 0.0):
            raise ValueError("all supported coefficients must be nonzero")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return len(self.support)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.p, dtype=np.complex128)
        out[np.asarray(self.support) - 1] = self.values
        return out

    @classmethod
    def from_dense(cls, vec) -> "SparseSignal":
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        idx = np.nonzero(np.abs(vec) > 0.0)[0]
        return cls(p=vec.size, support=tuple(int(i) + 1 for i in idx), values=vec[idx])

    def magnitudes_descending(self) -> np.ndarray:
        """|values| sorted from largest to smallest."""
        return np.sort(np.abs(self.values))[::-1]

    @property
    def min_magnitude(self) -> float:
        return float(np.min(np.abs(self.values)))

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True)
class NoiseModel:
    """Circular complex Gaussian noise with per-entry power ``variance``."""

    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise ValueError(f"noise variance must be finite and >= 0, got {self.variance}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class SupportSet:
    """An ordered set of selected column indices (1-based, selection order)."""

    order: tuple[int, ...]
    p: int

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if len(set(order)) != len(order):
            raise ValueError("support contains duplicate indices")
        if any(i < 1 or i > self.p for i in order):
            raise ValueError(f"support indices must lie in 1..{self.p}")
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    @property
    def indices(self) -> frozenset:
        return frozenset(self.order)


@dataclass(frozen=True)
class MeasurementInstance:
    """One realization y = X beta + eta together with its ingredients."""

    matrix: SensingMatrix
    signal: SparseSignal
    noise: np.ndarray
    observation: np.ndarray
    seed: int

    def __post_init__(self):
        noise = np.asarray(self.noise, dtype=np.complex128).reshape(-1)
        y = np.asarray(self.observation, dtype=np.complex128).reshape(-1)
        if noise.shape != (self.matrix.n,) or y.shape != (self.matrix.n,):
            raise ValueError("noise and observation must have length n")
        clean = self.matrix.entries @ self.signal.dense()
        scale = max(np.linalg.norm(y), 1.0)
        if np.linalg.norm(y - (clean + noise)) > 1e-12 * scale:
            raise ValueError("observation is not reproducible from (matrix, signal, noise)")
        noise = noise.copy()
        noise.setflags(write=False)
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "observation", y)


def synthesize_measurement(
    matrix: SensingMatrix,
    signal: SparseSignal,
    noise: NoiseModel,
    seed: int,
) -> MeasurementInstance:
    """Form y = X beta + eta with a freshly seeded noise draw.

    The noise realization is a length-n circular complex Gaussian vector with
    per-entry power ``noise.variance``; ``seed`` fully determines it.
    """
    if signal.p != matrix.p:
        raise ValueError(f"signal dimension {signal.p} != matrix dimension {matrix.p}")
    rng = spawn_rng(seed)
    eta = complex_gaussian(rng, matrix.n, noise.variance)
    y = matrix.entries @ signal.dense() + eta
    return MeasurementInstance(matrix=matrix, signal=signal, noise=eta, observation=y, seed=int(seed))
