"""Monte Carlo verification of the probabilistic machinery behind the
guarantees: the statistical orthogonality condition (StOC), conditioning of
random column submatrices, the sup-norm bound on correlated noise, and an
instrumented per-iteration sufficient condition for correct OMP selection.

These estimators are observational: each reports an empirical frequency next
to the corresponding analytic bound. Comparisons are asserted by callers
only when the bound's hypotheses hold; at desk scale they usually do not,
and the numbers are recorded informationally.

Naming note: the StOC failure probability is called ``stoc delta``
throughout to avoid collision with the solver stopping threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import coherence_profile, check_strong_coherence
from .model import (
    MeasurementInstance,
    SensingMatrix,
    complex_gaussian,
    spawn_rng,
)

SUBMATRIX_DEVIATION_LIMIT = 0.5
NOISE_CHUNK = 4096


def stoc_epsilon(mu: float, p: int) -> float:
    """StOC distortion level 10 mu sqrt(2 ln p).

    Values >= 1 make the downstream conditions vacuous; callers flag them.
    """
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    return 10.0 * mu * math.sqrt(2.0 * math.log(p))


@dataclass(frozen=True)
class StocReport:
    """Empirical StOC violation frequencies for one probe vector.

    ``violations_near_identity`` counts trials where the on-support Gram
    distortion ||(X_S^H X_S - I) z||_inf exceeded epsilon ||z||_2;
    ``violations_cross`` counts trials where the off-support leakage
    ||X_{S^c}^H X_S z||_inf exceeded it. ``empirical_delta`` is the joint
    (union) violation rate, to be compared with the analytic bound 4/p.
    """

    k: int
    epsilon: float
    epsilon_vacuous: bool
    trials: int
    violations_near_identity: int
    violations_cross: int
    joint_violations: int
    violating_trials_near_identity: tuple[int, ...]
    violating_trials_cross: tuple[int, ...]
    empirical_delta: float
    delta_bound: float
    applicable: bool


def _stoc_applicable(matrix: SensingMatrix, k: int) -> bool:
    profile = coherence_profile(matrix)
    strong = check_strong_coherence(profile).satisfied
    return bool(strong and k <= matrix.n / (2.0 * math.log(matrix.p)))


def verify_stoc(
    matrix: SensingMatrix,
    k: int,
    z,
    epsilon: float,
    trials: int,
    seed: int,
    method: str = "gram",
) -> StocReport:
    """Check both StOC inequalities over seeded random support permutations.

    Each trial draws a uniform random permutation of 1..p (generator derived
    from (seed, trial index)), takes its first k entries as the support, and
    tests ||(X_S^H X_S - I) z||_inf <= epsilon ||z||_2 and
    ||X_{S^c}^H X_S z||_inf <= epsilon ||z||_2.

    ``method="gram"`` slices a precomputed Gram matrix; ``method="direct"``
    recomputes every inner product from the raw columns and exists as a
    cross-check oracle. Both must flag identical trial sets.
    """
    if not 1 <= k <= matrix.p:
        raise ValueError(f"need 1 <= k <= p = {matrix.p}, got k={k}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if method not in ("gram", "direct"):
        raise ValueError(f"method must be 'gram' or 'direct', got {method!r}")
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    if z.shape != (k,):
        raise ValueError(f"probe vector must have length k={k}")
    z_norm = float(np.linalg.norm(z))
    X = matrix.entries
    gram = X.conj().T @ X if method == "gram" else None

    bad_near: list[int] = []
    bad_cross: list[int] = []
    joint = 0
    for trial in range(trials):
        perm = spawn_rng(seed, trial).permutation(matrix.p)
        on = perm[:k]
        off = perm[k:]
        if method == "gram":
            on_block = gram[np.ix_(on, on)] - np.eye(k)
            near = float(np.max(np.abs(on_block @ z)))
            cross = float(np.max(np.abs(gram[np.ix_(off, on)] @ z))) if off.size else 0.0
        else:
            cols_on = X[:, on]
            combo = np.zeros(matrix.n, dtype=np.complex128)
            for i in range(k):
                combo = combo + cols_on[:, i] * z[i]
            near = 0.0
            for i in range(k):
                entry = np.vdot(cols_on[:, i], combo) - z[i]
                near = max(near, abs(entry))
            cross = 0.0
            for j in off:
                cross = max(cross, abs(np.vdot(X[:, j], combo)))
        hit = False
        if near > epsilon * z_norm:
            bad_near.append(trial)
            hit = True
        if cross > epsilon * z_norm:
            bad_cross.append(trial)
            hit = True
        if hit:
            joint += 1
    return StocReport(
        k=k,
        epsilon=float(epsilon),
        epsilon_vacuous=bool(epsilon >= 1.0),
        trials=trials,
        violations_near_identity=len(bad_near),
        violations_cross=len(bad_cross),
        joint_violations=joint,
        violating_trials_near_identity=tuple(bad_near),
        violating_trials_cross=tuple(bad_cross),
        empirical_delta=joint / trials,
        delta_bound=4.0 / matrix.p,
        applicable=_stoc_applicable(matrix, k),
    )


def default_probe_vectors(k: int, seed: int) -> dict[str, np.ndarray]:
    """Built-in probe vectors: all-ones, a single spike, and a seeded Gaussian."""
    spike = np.zeros(k, dtype=np.complex128)
    spike[0] = 1.0
    return {
        "all-ones": np.ones(k, dtype=np.complex128),
        "single-spike": spike,
        "gaussian": complex_gaussian(spawn_rng(seed, 10_000_019), k, 1.0),
    }


@dataclass(frozen=True)
class ConditioningReport:
    """Empirical distribution of ||X_S^H X_S - I||_2 over random k-subsets.

    ``empirical_probability`` estimates Pr(deviation >= 1/2); the analytic
    bound under the supporting hypotheses is 2 p^{-2 ln 2}. Eigenvalue
    extremes over all draws are reported so callers can see how far the
    spectra sit inside [1/2, 3/2].
    """

    k: int
    trials: int
    deviation_count: int
    empirical_probability: float
    probability_bound: float
    min_eigenvalue: float
    max_eigenvalue: float
    applicable: bool


def submatrix_conditioning(
    matrix: SensingMatrix, k: int, trials: int, seed: int
) -> ConditioningReport:
    """Monte Carlo estimate of Pr(||X_S^H X_S - I||_2 >= 1/2) over random supports.

    Supports are the first k entries of seeded permutations, so runs with the
    same seed and different k draw nested supports; the spectral deviation is
    monotone along that nesting.
    """
    if not 1 <= k <= matrix.p:
        raise ValueError(f"need 1 <= k <= p = {matrix.p}, got k={k}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    X = matrix.entries
    gram = X.conj().T @ X
    profile = coherence_profile(matrix)
    logp = math.log(matrix.p)
    hypotheses = (
        profile.mu <= 1.0 / (240.0 * logp)
        and k <= matrix.p / ((104.0 * math.sqrt(2.0)) ** 2 * profile.spectral_norm**2 * logp)
    )
    count = 0
    min_eig = math.inf
    max_eig = -math.inf
    for trial in range(trials):
        on = spawn_rng(seed, trial).permutation(matrix.p)[:k]
        eigs = np.linalg.eigvalsh(gram[np.ix_(on, on)])
        lo, hi = float(eigs[0]), float(eigs[-1])
        min_eig = min(min_eig, lo)
        max_eig = max(max_eig, hi)
        if max(hi - 1.0, 1.0 - lo) >= SUBMATRIX_DEVIATION_LIMIT:
            count += 1
    return ConditioningReport(
        k=k,
        trials=trials,
        deviation_count=count,
        empirical_probability=count / trials,
        probability_bound=2.0 * math.exp(-2.0 * math.log(2.0) * logp),
        min_eigenvalue=min_eig,
        max_eigenvalue=max_eig,
        applicable=bool(hypotheses),
    )


@dataclass(frozen=True)
class NoiseSupReport:
    """Empirical Pr(||X^H P eta||_inf <= tau) next to the analytic bound.

    The bound 1 - (p / pi) exp(-tau^2 / sigma^2) is reported exactly as the
    analysis states it, even when it is negative or when the empirical
    frequency falls below it.
    """

    tau: float
    sigma: float
    trials: int
    satisfied_count: int
    empirical_probability: float
    analytic_bound: float


def noise_sup_check(
    matrix: SensingMatrix,
    sigma: float,
    tau: float,
    trials: int,
    seed: int,
    projection_support=None,
) -> NoiseSupReport:
    """Estimate how often the matched-filter noise stays under tau.

    Each trial draws eta ~ CN(0, sigma^2 I) from a generator derived from
    (seed, trial index) and tests ||X^H P eta||_inf <= tau, where P projects
    onto the orthogonal complement of the given support's column span (the
    identity when no support is given).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    X = matrix.entries
    if projection_support:
        cols = matrix.columns(projection_support)
        q, _ = np.linalg.qr(cols)
        projector = np.eye(matrix.n) - q @ q.conj().T
        filter_matrix = X.conj().T @ projector
    else:
        filter_matrix = X.conj().T
    count = 0
    for start in range(0, trials, NOISE_CHUNK):
        block = min(NOISE_CHUNK, trials - start)
        draws = np.empty((matrix.n, block), dtype=np.complex128)
        for i in range(block):
            draws[:, i] = complex_gaussian(spawn_rng(seed, start + i), matrix.n, sigma**2)
        sup = np.max(np.abs(filter_matrix @ draws), axis=0)
        count += int(np.sum(sup <= tau))
    bound = 1.0 - (matrix.p / math.pi) * math.exp(-(tau**2) / sigma**2)
    return NoiseSupReport(
        tau=float(tau),
        sigma=float(sigma),
        trials=trials,
        satisfied_count=count,
        empirical_probability=count / trials,
        analytic_bound=bound,
    )


@dataclass(frozen=True)
class IterationStep:
    """Instrumented quantities at one OMP iteration.

    ``m_on`` and ``m_off`` are the sup correlations of the noiseless residual
    component with the true-support and off-support columns; ``n_sup`` is the
    sup correlation of the noise component with all columns. When
    ``sufficient`` (m_on - m_off > 2 n_sup) holds and all previous selections
    were correct, the next selection provably lands in the true support.
    """

    m_on: float
    m_off: float
    n_sup: float
    sufficient: bool
    selected_index: int
    selected_correct: bool


@dataclass(frozen=True)
class IterationTrace:
    steps: tuple[IterationStep, ...]
    true_support: tuple[int, ...]
    selected_order: tuple[int, ...]


def trace_iterations(matrix: SensingMatrix, instance: MeasurementInstance, k: int) -> IterationTrace:
    """Run k OMP iterations while decomposing the residual into signal and
    noise parts, recording the selection-correctness certificates.

    Requires the true support (carried by the instance). At iteration t the
    residual r_t = s_t + n_t with s_t = (I - P_t) X beta and
    n_t = (I - P_t) eta, where P_t projects onto the selected columns' span.
    """
    if instance.matrix is not matrix and not np.array_equal(
        instance.matrix.entries, matrix.entries
    ):
        raise ValueError("instance was synthesized from a different matrix")
    if not 1 <= k <= min(matrix.n, matrix.p):
        raise ValueError(f"need 1 <= k <= min(n, p) = {min(matrix.n, matrix.p)}, got k={k}")
    X = matrix.entries
    true_support = instance.signal.support
    on = np.asarray(true_support, dtype=int) - 1
    off = np.setdiff1d(np.arange(matrix.p), on)
    clean = X @ instance.signal.dense()
    eta = instance.noise
    y = instance.observation
    selected: list[int] = []
    steps: list[IterationStep] = []
    for _ in range(k):
        if selected:
            cols = X[:, selected]
            coef_y, *_ = np.linalg.lstsq(cols, y, rcond=None)
            residual = y - cols @ coef_y
            coef_clean, *_ = np.linalg.lstsq(cols, clean, rcond=None)
            coef_noise, *_ = np.linalg.lstsq(cols, eta, rcond=None)
            signal_part = clean - cols @ coef_clean
            noise_part = eta - cols @ coef_noise
        else:
            residual = y
            signal_part = clean
            noise_part = eta
        m_on = float(np.max(np.abs(X[:, on].conj().T @ signal_part)))
        m_off = float(np.max(np.abs(X[:, off].conj().T @ signal_part))) if off.size else 0.0
        n_sup = float(np.max(np.abs(X.conj().T @ noise_part)))
        j = int(np.argmax(np.abs(X.conj().T @ residual)))
        steps.append(
            IterationStep(
                m_on=m_on,
                m_off=m_off,
                n_sup=n_sup,
                sufficient=bool(m_on - m_off > 2.0 * n_sup),
                selected_index=j + 1,
                selected_correct=bool(j + 1 in true_support),
            )
        )
        selected.append(j)
    return IterationTrace(
        steps=tuple(steps),
        true_support=true_support,
        selected_order=tuple(j + 1 for j in selected),
    )
