"""Matrix and signal ensembles used by the experiments.

Matrices: unit-normalized complex Gaussian matrices, and Gabor frames built
from the Alltop cubic-phase sequence (n prime >= 5), whose worst-case
coherence is exactly 1/sqrt(n).

Signals: random-support sparse vectors with controlled amplitude profiles
(flat, linear decay, geometric decay, or explicit amplitudes) and either
zero phases or uniformly random phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SensingMatrix, SparseSignal, complex_gaussian, spawn_rng

PROFILE_KINDS = ("flat", "linear-decay", "geometric-decay", "explicit")
PHASE_RULES = ("unit", "random-uniform")

GABOR_MU_ATOL = 1e-10


@dataclass(frozen=True)
class SignalProfile:
    """Amplitude and phase recipe for generated sparse signals.

    ``decay`` is the geometric ratio in (0, 1] for ``geometric-decay`` and
    the per-rank increment (>= 0, default 1) for ``linear-decay``. For
    ``explicit``, ``amplitudes`` lists the magnitudes directly and
    ``min_amplitude`` is ignored.
    """

    kind: str = "flat"
    min_amplitude: float = 1.0
    decay: float | None = None
    phases: str = "unit"
    amplitudes: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.phases not in PHASE_RULES:
            raise ValueError(f"unknown phase rule {self.phases!r}")
        if self.kind == "explicit":
            if not self.amplitudes:
                raise ValueError("explicit profile requires amplitudes")
            amps = tuple(float(a) for a in self.amplitudes)
            if any(a <= 0 for a in amps):
                raise ValueError("explicit amplitudes must be positive")
            object.__setattr__(self, "amplitudes", amps)
        else:
            if self.min_amplitude <= 0:
                raise ValueError("min_amplitude must be positive")

    def amplitude_sequence(self, k: int) -> np.ndarray:
        """Magnitudes by rank (largest first); the smallest equals |beta|_min."""
        if self.kind == "explicit":
            if len(self.amplitudes) != k:
                raise ValueError(
                    f"explicit profile has {len(self.amplitudes)} amplitudes, need {k}"
                )
            return np.sort(np.asarray(self.amplitudes, dtype=float))[::-1]
        m = self.min_amplitude
        ranks = np.arange(1, k + 1)
        if self.kind == "flat":
            return np.full(k, m)
        if self.kind == "linear-decay":
            step = 1.0 if self.decay is None else float(self.decay)
            if step < 0:
                raise ValueError("linear decay increment must be >= 0")
            return m * (1.0 + step * (k - ranks))
        # geometric-decay: rank t has amplitude m * r^(t - k)
        if self.decay is None:
            raise ValueError("geometric-decay requires a ratio in (0, 1]")
        r = float(self.decay)
        if not 0.0 < r <= 1.0:
            raise ValueError(f"geometric ratio must lie in (0, 1], got {r}")
        return m * r ** (ranks.astype(float) - k)


def gaussian_matrix(n: int, p: int, seed: int) -> SensingMatrix:
    """i.i.d. standard complex Gaussian entries, columns scaled to unit norm."""
    if n < 1 or p < 2:
        raise ValueError(f"need n >= 1 and p >= 2, got n={n}, p={p}")
    rng = spawn_rng(seed)
    entries = complex_gaussian(rng, (n, p), 1.0)
    entries /= np.linalg.norm(entries, axis=0)
    return SensingMatrix(entries=entries, label=f"gaussian(n={n},p={p},seed={seed})")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def alltop_gabor(n: int) -> SensingMatrix:
    """Gabor frame of all time-frequency shifts of the Alltop sequence.

    The generator is a_m = n^{-1/2} exp(2 pi i m^3 / n) for m = 0..n-1; the
    frame collects all n^2 translations and modulations, giving an n x n^2
    matrix. Column tau*n + f (0-based) translates by tau and modulates by f.
    Worst-case coherence is exactly 1/sqrt(n) for prime n >= 5, which is
    verified at construction.
    """
    if not _is_prime(n) or n < 5:
        raise ValueError(f"Alltop Gabor frame requires a prime n >= 5, got {n}")
    m = np.arange(n, dtype=np.int64)
    seq = np.exp(2j * np.pi * ((m**3) % n) / n) / math.sqrt(n)
    translates = np.empty((n, n), dtype=np.complex128)
    for tau in range(n):
        translates[:, tau] = np.roll(seq, tau)
    modulation = np.exp(2j * np.pi * np.outer(m, m) / n)
    entries = (translates[:, :, np.newaxis] * modulation[:, np.newaxis, :]).reshape(n, n * n)
    matrix = SensingMatrix(entries=entries, label=f"alltop-gabor(n={n})")
    # Coherence depends only on the shift difference, so checking column 0
    # against all others covers every pair.
    overlaps = np.abs(entries[:, 0].conj() @ entries[:, 1:])
    mu = float(np.max(overlaps))
    if abs(mu - 1.0 / math.sqrt(n)) > GABOR_MU_ATOL:
        raise AssertionError(f"Alltop Gabor coherence {mu} != 1/sqrt({n})")
    return matrix


def generate_signal(p: int, k: int, profile: SignalProfile, seed: int) -> SparseSignal:
    """Sparse signal with a uniformly random size-k support and profiled values.

    The support is drawn uniformly without replacement; amplitudes follow
    ``profile`` and are assigned to support positions in a random order;
    phases are zero (``unit``) or i.i.d. uniform on the circle.
    """
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p, got k={k}, p={p}")
    rng = spawn_rng(seed)
    support = np.sort(rng.choice(p, size=k, replace=False)) + 1
    amplitudes = profile.amplitude_sequence(k)
    placement = rng.permutation(k)
    values = amplitudes[placement].astype(np.complex128)
    if profile.phases == "random-uniform":
        values = values * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=k))
    return SparseSignal(p=p, support=tuple(int(i) for i in support), values=values)
