"""Closed-form recovery guarantees: signal statistics, sparsity caps,
admissibility conditions, success-probability lower bounds, and the
reconstruction error bound.

The probabilistic guarantees are hypothesis-gated on the strong coherence
property, which desk-scale matrices essentially never satisfy (its mu
threshold forces n into the millions). Every formula here is therefore
evaluated and reported as-is, with a ``vacuous`` flag whenever it implies
k < 1 or a probability <= 0; honest reporting is the contract, not silent
clamping.

Constants: c1 = 50 sqrt(2) and c2 = 104 sqrt(2). All logs are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import CoherenceProfile, check_strong_coherence
from .model import NoiseModel, SparseSignal

C1 = 50.0 * math.sqrt(2.0)
C2 = 104.0 * math.sqrt(2.0)

THETA_GRID = np.arange(1, 1000, dtype=float) / 1000.0

PROBABILITY_VARIANTS = ("fixed", "stopping", "partial")


@dataclass(frozen=True)
class SignalStats:
    """Amplitude-profile statistics of a sparse signal against a noise level.

    ``lar[t]`` is the squared t+1-th largest magnitude divided by the mean
    squared magnitude ||beta||^2 / k (0-based t); ``mar`` equals ``lar[-1]``.
    SNRs are reported as ``inf`` when the noise variance is zero.
    """

    k: int
    norm_sq: float
    mar: float
    lar: tuple[float, ...]
    snr: float
    snr_min: float


def signal_stats(signal: SparseSignal, noise: NoiseModel, n: int) -> SignalStats:
    """MAR, per-rank LAR, SNR and minimum SNR for a signal under CN noise.

    With E||eta||^2 = n sigma^2: SNR = ||beta||^2 / (n sigma^2) and
    SNR_min = |beta|_min^2 / (n sigma^2 / k) = MAR * SNR.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    mags = signal.magnitudes_descending()
    k = signal.k
    norm_sq = float(np.sum(mags**2))
    mean_sq = norm_sq / k
    lar = tuple(float(m * m / mean_sq) for m in mags)
    mar = lar[-1]
    if noise.variance > 0:
        noise_energy = n * noise.variance
        snr = norm_sq / noise_energy
        snr_min = float(mags[-1] ** 2 / (noise_energy / k))
    else:
        snr = math.inf
        snr_min = math.inf
    return SignalStats(k=k, norm_sq=norm_sq, mar=mar, lar=lar, snr=snr, snr_min=snr_min)


@dataclass(frozen=True)
class ConditionCheck:
    """Result of one admissibility inequality.

    ``vacuous`` marks cases where the denominator 1 - c1 mu sqrt((k-t) ln p)
    is not positive, so the inequality carries no information; ``satisfied``
    is then False.
    """

    satisfied: bool
    vacuous: bool
    value: float
    threshold: float


def _denominator(mu: float, k: int, t: int, p: int) -> float:
    return 1.0 - C1 * mu * math.sqrt((k - t) * math.log(p))


def lar_condition(
    stats: SignalStats,
    mu: float,
    k: int,
    n: int,
    snr: float,
    alpha: float,
    p: int,
    t: int,
) -> ConditionCheck:
    """Rank-t admissibility: LAR_(t+1) must exceed a coherence-inflated noise floor.

    The inequality is
    LAR_(t+1) > 4 (1 + alpha) / (1 - c1 mu sqrt((k - t) ln p))^2 * k ln p / (n SNR)
    for 0 <= t <= k-1. Equivalent to ``amplitude_condition`` whenever
    sigma > 0.
    """
    if not 0 <= t <= k - 1:
        raise ValueError(f"need 0 <= t <= k-1, got t={t}")
    denom = _denominator(mu, k, t, p)
    value = stats.lar[t]
    if denom <= 0:
        return ConditionCheck(satisfied=False, vacuous=True, value=value, threshold=math.inf)
    threshold = 4.0 * (1.0 + alpha) / denom**2 * (k * math.log(p) / (n * snr))
    return ConditionCheck(
        satisfied=bool(value > threshold), vacuous=False, value=value, threshold=threshold
    )


def amplitude_condition(
    signal: SparseSignal,
    sigma: float,
    mu: float,
    k: int,
    p: int,
    alpha: float,
    t: int,
) -> ConditionCheck:
    """Amplitude form of ``lar_condition``:
    |beta|_(t+1) > 2 sigma sqrt((1 + alpha) ln p) / (1 - c1 mu sqrt((k - t) ln p)).
    """
    if not 0 <= t <= k - 1:
        raise ValueError(f"need 0 <= t <= k-1, got t={t}")
    denom = _denominator(mu, k, t, p)
    value = float(signal.magnitudes_descending()[t])
    if denom <= 0:
        return ConditionCheck(satisfied=False, vacuous=True, value=value, threshold=math.inf)
    threshold = 2.0 * sigma * math.sqrt((1.0 + alpha) * math.log(p)) / denom
    return ConditionCheck(
        satisfied=bool(value > threshold), vacuous=False, value=value, threshold=threshold
    )


def mar_condition(
    stats: SignalStats,
    mu: float,
    k: int,
    n: int,
    snr: float,
    alpha: float,
    p: int,
) -> ConditionCheck:
    """Whole-signal admissibility: the t = 0 denominator applied to MAR.

    Implies ``lar_condition`` for every t because MAR <= LAR_(t+1).
    """
    denom = _denominator(mu, k, 0, p)
    value = stats.mar
    if denom <= 0:
        return ConditionCheck(satisfied=False, vacuous=True, value=value, threshold=math.inf)
    threshold = 4.0 * (1.0 + alpha) / denom**2 * (k * math.log(p) / (n * snr))
    return ConditionCheck(
        satisfied=bool(value > threshold), vacuous=False, value=value, threshold=threshold
    )


def decay_condition(
    signal: SparseSignal,
    mu: float,
    k: int,
    p: int,
    sigma: float,
    alpha: float,
    t: int,
) -> ConditionCheck:
    """Gap condition for detecting the t+1 largest entries in rank order:
    |beta|_(t+1) > (|beta|_(t+2) + 2 sigma sqrt((1 + alpha) ln p)) / denom,
    with |beta|_(k+1) treated as 0.
    """
    if not 0 <= t <= k - 1:
        raise ValueError(f"need 0 <= t <= k-1, got t={t}")
    mags = signal.magnitudes_descending()
    value = float(mags[t])
    next_mag = float(mags[t + 1]) if t + 1 < k else 0.0
    denom = _denominator(mu, k, t, p)
    if denom <= 0:
        return ConditionCheck(satisfied=False, vacuous=True, value=value, threshold=math.inf)
    threshold = (next_mag + 2.0 * sigma * math.sqrt((1.0 + alpha) * math.log(p))) / denom
    return ConditionCheck(
        satisfied=bool(value > threshold), vacuous=False, value=value, threshold=threshold
    )


def sparsity_cap_matrix(profile: CoherenceProfile) -> float:
    """Matrix-only sparsity cap min{p / (c2^2 ||X||^2 ln p), 1 / (c1^2 mu^2 ln p)}.

    Returned as a real number; the caller floors it. With mu = 0 the
    coherence term is infinite and the spectral term alone binds.
    """
    logp = math.log(profile.p)
    spectral_term = profile.p / (C2**2 * profile.spectral_norm**2 * logp)
    if profile.mu == 0:
        return spectral_term
    coherence_term = 1.0 / (C1**2 * profile.mu**2 * logp)
    return min(spectral_term, coherence_term)


def combined_cap_terms(
    theta: float,
    n: int,
    snr_min: float,
    mu: float,
    spectral_norm_sq: float,
    p: int,
    alpha: float,
) -> tuple[float, float, float]:
    """The three competing terms of the combined sparsity cap at a given theta."""
    logp = math.log(p)
    snr_term = n * (1.0 - theta) ** 2 * snr_min / (4.0 * (1.0 + alpha) * logp)
    coherence_term = math.inf if mu == 0 else theta**2 / (C1**2 * mu**2 * logp)
    spectral_term = p / (C2**2 * spectral_norm_sq * logp)
    return snr_term, coherence_term, spectral_term


def sost_cap_terms(
    theta: float, n: int, snr_min: float, mu: float, mar: float, p: int
) -> tuple[float, float, float]:
    """The three competing terms of the SOST sparsity cap at a given theta."""
    logp = math.log(p)
    snr_term = n * (1.0 - theta) ** 2 * snr_min / (16.0 * logp)
    coherence_term = math.inf if mu == 0 else theta**2 / (800.0 * mu**2 * logp * mar)
    row_term = n / (2.0 * logp)
    return snr_term, coherence_term, row_term


def worstcase_cap_terms(
    theta: float, n: int, snr_min: float, mu: float, alpha: float, p: int
) -> tuple[float, float]:
    """The two competing terms of the worst-case-analysis sparsity cap."""
    logp = math.log(p)
    snr_term = n * (1.0 - theta) ** 2 * snr_min / (4.0 * (1.0 + alpha) * logp)
    coherence_term = math.inf if mu == 0 else 0.5 + theta / (2.0 * mu)
    return snr_term, coherence_term


def _grid_maximize(term_fn) -> tuple[float, float]:
    """Maximize min(terms(theta)) over the 999-point theta grid.

    Ties return the smallest maximizing theta.
    """
    values = np.array([min(term_fn(theta)) for theta in THETA_GRID])
    best = int(np.argmax(values))
    return float(values[best]), float(THETA_GRID[best])


def sparsity_cap_combined(
    n: int, snr_min: float, mu: float, spectral_norm_sq: float, p: int, alpha: float
) -> tuple[float, float]:
    """Theta-optimized cap combining the SNR, coherence, and spectral terms.

    Returns (bound, maximizing theta). The bound never exceeds the coherence
    term of ``sparsity_cap_matrix`` because theta^2 < 1.
    """
    return _grid_maximize(
        lambda theta: combined_cap_terms(theta, n, snr_min, mu, spectral_norm_sq, p, alpha)
    )


def sparsity_cap_sost(
    n: int, snr_min: float, mu: float, mar: float, p: int
) -> tuple[float, float]:
    """Theta-optimized sparsity cap for the SOST baseline; note the 1/MAR
    inflation of the coherence term. Returns (bound, maximizing theta)."""
    return _grid_maximize(lambda theta: sost_cap_terms(theta, n, snr_min, mu, mar, p))


def sparsity_cap_worstcase(
    n: int, snr_min: float, mu: float, alpha: float, p: int
) -> tuple[float, float]:
    """Theta-optimized sparsity cap from worst-case (deterministic) analysis.

    Its coherence term scales as 1/mu rather than 1/mu^2. Returns
    (bound, maximizing theta)."""
    return _grid_maximize(lambda theta: worstcase_cap_terms(theta, n, snr_min, mu, alpha, p))


@dataclass(frozen=True)
class ProbabilityBound:
    """A success-probability lower bound, reported as-is.

    ``vacuous`` marks values <= 0; ``applicable`` is False when p < 128,
    below which the supporting analysis is not claimed to hold.
    """

    value: float
    vacuous: bool
    applicable: bool


def success_probability(k: int, p: int, alpha: float, variant: str) -> ProbabilityBound:
    """Lower bound on the support-recovery success probability.

    fixed:    1 - k (p^alpha pi)^{-1} - 2 p^{-2 ln 2} - 4/p
    stopping: the same with k + 1 in place of k
    partial:  the same with k interpreted as the partial count k'
    """
    if variant not in PROBABILITY_VARIANTS:
        raise ValueError(f"variant must be one of {PROBABILITY_VARIANTS}, got {variant!r}")
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    count = k + 1 if variant == "stopping" else k
    tail = 2.0 * math.exp(-2.0 * math.log(2.0) * math.log(p)) + 4.0 / p
    value = 1.0 - count / (p**alpha * math.pi) - tail
    return ProbabilityBound(value=value, vacuous=bool(value <= 0), applicable=bool(p >= 128))


def reconstruction_bound(k: int, sigma: float, alpha: float, p: int) -> float:
    """Squared-error bound 4 (1 + alpha) k sigma^2 ln p for least-squares
    re-estimation on a correctly recovered support."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return 4.0 * (1.0 + alpha) * k * sigma**2 * math.log(p)


@dataclass(frozen=True)
class GuaranteeReport:
    """Every closed-form guarantee evaluated for one (matrix, signal, noise) triple."""

    alpha: float
    k: int
    n: int
    p: int
    mu: float
    spectral_norm: float
    strong_coherence: bool
    stats: SignalStats
    sparsity_cap_matrix: float
    sparsity_cap_matrix_vacuous: bool
    sparsity_cap_combined: float
    sparsity_cap_combined_theta: float
    sparsity_cap_combined_vacuous: bool
    per_rank_lar: tuple[ConditionCheck, ...]
    mar: ConditionCheck
    decay: tuple[ConditionCheck, ...]
    success_fixed: ProbabilityBound
    success_stopping: ProbabilityBound
    reconstruction_error_bound: float


def build_guarantee_report(
    profile: CoherenceProfile,
    signal: SparseSignal,
    sigma: float,
    alpha: float,
) -> GuaranteeReport:
    """Assemble the full report for one problem instance."""
    if signal.p != profile.p:
        raise ValueError(f"signal dimension {signal.p} != matrix dimension {profile.p}")
    noise = NoiseModel(variance=sigma**2)
    stats = signal_stats(signal, noise, profile.n)
    k, n, p, mu = stats.k, profile.n, profile.p, profile.mu
    cap_matrix = sparsity_cap_matrix(profile)
    cap_combined, theta = sparsity_cap_combined(
        n, stats.snr_min, mu, profile.spectral_norm**2, p, alpha
    )
    return GuaranteeReport(
        alpha=alpha,
        k=k,
        n=n,
        p=p,
        mu=mu,
        spectral_norm=profile.spectral_norm,
        strong_coherence=check_strong_coherence(profile).satisfied,
        stats=stats,
        sparsity_cap_matrix=cap_matrix,
        sparsity_cap_matrix_vacuous=bool(cap_matrix < 1),
        sparsity_cap_combined=cap_combined,
        sparsity_cap_combined_theta=theta,
        sparsity_cap_combined_vacuous=bool(cap_combined < 1),
        per_rank_lar=tuple(
            lar_condition(stats, mu, k, n, stats.snr, alpha, p, t) for t in range(k)
        ),
        mar=mar_condition(stats, mu, k, n, stats.snr, alpha, p),
        decay=tuple(decay_condition(signal, mu, k, p, sigma, alpha, t) for t in range(k)),
        success_fixed=success_probability(k, p, alpha, "fixed"),
        success_stopping=success_probability(k, p, alpha, "stopping"),
        reconstruction_error_bound=reconstruction_bound(k, sigma, alpha, p),
    )
