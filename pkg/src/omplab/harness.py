"""Monte Carlo experiment harness: trial generation, solver execution,
outcome scoring, aggregation, and persistence.

An experiment is a grid of cells. Every cell shares one sensing matrix and
fixes (k, sigma2, solver, signal profile); list-valued ``k``, ``sigma2``, or
``solver`` entries in a config expand into the Cartesian product of cells.
Within a cell, trial t draws its signal and noise from generators derived
from (master seed, cell index, t), so any single trial is reproducible in
isolation and results are identical regardless of worker count.

Persistence contract: ``trials.csv`` (one row per trial, fixed column order
and float formatting, rows ordered by (cell, trial)), ``summary.json`` (per
cell aggregates plus the closed-form bound values), and ``manifest.json``
(completed cells). Reruns of the same config are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import yaml

from . import formats
from .coherence import check_strong_coherence, coherence_profile
from .ensembles import SignalProfile, alltop_gabor, gaussian_matrix, generate_signal
from .guarantees import (
    reconstruction_bound,
    signal_stats,
    sparsity_cap_combined,
    sparsity_cap_matrix,
    success_probability,
)
from .model import NoiseModel, SensingMatrix, SupportSet, synthesize_measurement
from .solvers import (
    SingularSelectionError,
    least_squares_debias,
    omp_fixed,
    omp_stopping,
    sost,
    stopping_threshold,
)

SOLVER_NAMES = ("omp-fixed", "omp-stopping", "sost")
STOPPING_RULES = ("explicit", "noise-scaled")
TERMINATION_FAILED = "failed"
TERMINATION_MATCHED_FILTER = "matched-filter"

CSV_COLUMNS = (
    "cell_id",
    "trial",
    "seed",
    "solver",
    "n",
    "p",
    "k",
    "sigma2",
    "alpha",
    "exact",
    "partial_count",
    "topk_detected",
    "iterations",
    "error_sq",
    "termination",
)

MAGNITUDE_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class MatrixSpec:
    """Where a cell's sensing matrix comes from."""

    kind: str  # gaussian | gabor | file
    n: int | None = None
    p: int | None = None
    seed: int | None = None
    path: str | None = None

    def build(self) -> SensingMatrix:
        if self.kind == "gaussian":
            if self.n is None or self.p is None:
                raise ValueError("gaussian matrix spec requires n and p")
            return gaussian_matrix(self.n, self.p, self.seed or 0)
        if self.kind == "gabor":
            if self.n is None:
                raise ValueError("gabor matrix spec requires n")
            return alltop_gabor(self.n)
        if self.kind == "file":
            if not self.path:
                raise ValueError("file matrix spec requires a path")
            return formats.read_matrix(self.path)
        raise ValueError(f"unknown matrix kind {self.kind!r}")


@dataclass(frozen=True)
class StoppingRule:
    """How omp-stopping picks its threshold: a fixed value, or the
    noise-scaled formula sigma * sqrt((1 + alpha) ln p)."""

    rule: str = "noise-scaled"
    delta: float | None = None
    max_iterations: int | None = None

    def threshold(self, sigma: float, p: int, alpha: float) -> float:
        if self.rule == "explicit":
            if self.delta is None:
                raise ValueError("explicit stopping rule requires delta")
            return self.delta
        if self.rule == "noise-scaled":
            return stopping_threshold(sigma, p, alpha)
        raise ValueError(f"unknown stopping rule {self.rule!r}")


@dataclass(frozen=True)
class TrialConfig:
    """One experiment cell: everything needed to run its trials."""

    cell_id: str
    cell_index: int
    matrix_spec: MatrixSpec
    k: int
    sigma2: float
    alpha: float
    profile: SignalProfile
    solver: str
    stopping: StoppingRule
    debias: bool
    trials: int
    master_seed: int

    def __post_init__(self):
        if self.solver not in SOLVER_NAMES:
            raise ValueError(f"solver must be one of {SOLVER_NAMES}, got {self.solver!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")


@dataclass(frozen=True)
class TrialOutcome:
    """Scored result of one trial; ``error_sq`` is None without debiasing
    and on failed trials."""

    cell_id: str
    trial: int
    seed: int
    solver: str
    n: int
    p: int
    k: int
    sigma2: float
    alpha: float
    exact: bool
    partial_count: int
    topk_detected: int
    topk_flags: tuple[bool, ...]
    iterations: int
    error_sq: float | None
    termination: str


def _trial_seeds(config: TrialConfig, trial: int) -> tuple[int, int]:
    ss = np.random.SeedSequence((config.master_seed, config.cell_index, trial))
    state = ss.generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def _score_support(signal, selected_order: tuple[int, ...], k: int):
    """Exact/partial/top-k' scoring of a selection against the true signal."""
    true_set = set(signal.support)
    exact = set(selected_order) == true_set and len(selected_order) == len(true_set)
    partial = sum(1 for j in selected_order if j in true_set)
    mags = np.abs(signal.dense())
    true_desc = signal.magnitudes_descending()
    flags = []
    for kp in range(1, k + 1):
        if kp > len(selected_order):
            flags.append(False)
            continue
        prefix = selected_order[:kp]
        in_support = all(j in true_set for j in prefix)
        rank_threshold = true_desc[kp - 1] * (1.0 - MAGNITUDE_TIE_RTOL)
        large_enough = all(mags[j - 1] >= rank_threshold for j in prefix)
        flags.append(bool(in_support and large_enough))
    detected = 0
    for flag in flags:
        if not flag:
            break
        detected += 1
    return exact, partial, detected, tuple(flags)


def run_trial(config: TrialConfig, trial: int, matrix: SensingMatrix | None = None) -> TrialOutcome:
    """Generate, solve, and score one trial. Solver failures (numerically
    singular selections) become failed outcomes, never exceptions."""
    if matrix is None:
        matrix = config.matrix_spec.build()
    signal_seed, noise_seed = _trial_seeds(config, trial)
    signal = generate_signal(matrix.p, config.k, config.profile, seed=signal_seed)
    instance = synthesize_measurement(
        matrix, signal, NoiseModel(variance=config.sigma2), seed=noise_seed
    )
    sigma = math.sqrt(config.sigma2)
    common = dict(
        cell_id=config.cell_id,
        trial=trial,
        seed=signal_seed,
        solver=config.solver,
        n=matrix.n,
        p=matrix.p,
        k=config.k,
        sigma2=config.sigma2,
        alpha=config.alpha,
    )
    try:
        if config.solver == "omp-fixed":
            result = omp_fixed(matrix, instance.observation, config.k)
            order, iterations, termination = result.support.order, result.iterations, result.termination
        elif config.solver == "omp-stopping":
            delta = config.stopping.threshold(sigma, matrix.p, config.alpha)
            result = omp_stopping(
                matrix,
                instance.observation,
                delta,
                max_iterations=config.stopping.max_iterations,
            )
            order, iterations, termination = result.support.order, result.iterations, result.termination
        else:
            support = sost(matrix, instance.observation, config.k)
            order, iterations, termination = support.order, config.k, TERMINATION_MATCHED_FILTER
        error_sq = None
        if config.debias:
            if order and len(order) <= matrix.n:
                estimate = least_squares_debias(
                    matrix, SupportSet(order=order, p=matrix.p), instance.observation
                )
            else:
                estimate = np.zeros(matrix.p, dtype=np.complex128)
            error_sq = float(np.sum(np.abs(estimate - signal.dense()) ** 2))
    except (SingularSelectionError, np.linalg.LinAlgError):
        exact, partial, detected, flags = _score_support(signal, (), config.k)
        return TrialOutcome(
            **common,
            exact=exact,
            partial_count=partial,
            topk_detected=detected,
            topk_flags=flags,
            iterations=0,
            error_sq=None,
            termination=TERMINATION_FAILED,
        )
    exact, partial, detected, flags = _score_support(signal, order, config.k)
    return TrialOutcome(
        **common,
        exact=exact,
        partial_count=partial,
        topk_detected=detected,
        topk_flags=flags,
        iterations=iterations,
        error_sq=error_sq,
        termination=termination,
    )


def _run_cell(config: TrialConfig, matrix: SensingMatrix, workers: int) -> list[TrialOutcome]:
    indices = range(config.trials)
    if workers <= 1:
        return [run_trial(config, t, matrix) for t in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, config.trials // (workers * 4))
        return list(pool.map(_trial_task, [(config, t) for t in indices], chunksize=chunk))


def _trial_task(args) -> TrialOutcome:
    config, trial = args
    return run_trial(config, trial)


@dataclass(frozen=True)
class CellSummary:
    """Aggregates and bound values for one cell."""

    cell_id: str
    solver: str
    n: int
    p: int
    k: int
    sigma2: float
    alpha: float
    trials: int
    failed_trials: int
    success_rate: float
    success_se: float
    mean_partial_count: float
    mean_error_sq: float | None
    p95_error_sq: float | None
    reconstruction_error_bound: float
    fraction_within_bound_given_exact: float | None
    success_probability_fixed: float
    success_probability_stopping: float
    sparsity_cap_matrix: float
    sparsity_cap_combined: float
    mu: float
    strong_coherence: bool
    bounds_applicable: bool


@dataclass(frozen=True)
class ExperimentSummary:
    cells: tuple[CellSummary, ...]


def _summarize_cell(
    config: TrialConfig, matrix: SensingMatrix, outcomes: list[TrialOutcome]
) -> CellSummary:
    trials = len(outcomes)
    successes = sum(1 for o in outcomes if o.exact)
    rate = successes / trials
    se = math.sqrt(rate * (1.0 - rate) / trials)
    failed = sum(1 for o in outcomes if o.termination == TERMINATION_FAILED)
    errors = np.array([o.error_sq for o in outcomes if o.error_sq is not None])
    profile = coherence_profile(matrix)
    strong = check_strong_coherence(profile).satisfied
    sigma = math.sqrt(config.sigma2)
    bound = reconstruction_bound(config.k, sigma, config.alpha, matrix.p)
    exact_errors = np.array(
        [o.error_sq for o in outcomes if o.exact and o.error_sq is not None]
    )
    within = None
    if exact_errors.size:
        within = float(np.mean(exact_errors <= bound))
    # The combined cap needs SNR_min, a per-signal quantity; the cell profile
    # fixes it, so evaluate on one representative trial signal.
    rep_signal = generate_signal(matrix.p, config.k, config.profile, seed=_trial_seeds(config, 0)[0])
    stats = signal_stats(rep_signal, NoiseModel(variance=config.sigma2), matrix.n)
    cap_combined, _ = sparsity_cap_combined(
        matrix.n, stats.snr_min, profile.mu, profile.spectral_norm**2, matrix.p, config.alpha
    )
    return CellSummary(
        cell_id=config.cell_id,
        solver=config.solver,
        n=matrix.n,
        p=matrix.p,
        k=config.k,
        sigma2=config.sigma2,
        alpha=config.alpha,
        trials=trials,
        failed_trials=failed,
        success_rate=rate,
        success_se=se,
        mean_partial_count=float(np.mean([o.partial_count for o in outcomes])),
        mean_error_sq=float(np.mean(errors)) if errors.size else None,
        p95_error_sq=float(np.percentile(errors, 95)) if errors.size else None,
        reconstruction_error_bound=bound,
        fraction_within_bound_given_exact=within,
        success_probability_fixed=success_probability(config.k, matrix.p, config.alpha, "fixed").value,
        success_probability_stopping=success_probability(
            config.k, matrix.p, config.alpha, "stopping"
        ).value,
        sparsity_cap_matrix=sparsity_cap_matrix(profile),
        sparsity_cap_combined=cap_combined,
        mu=profile.mu,
        strong_coherence=strong,
        bounds_applicable=bool(strong and matrix.p >= 128),
    )


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_trials_csv(outcomes: list[TrialOutcome], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for o in outcomes:
            writer.writerow(_csv_value(getattr(o, column)) for column in CSV_COLUMNS)


def run_experiment(
    cells: list[TrialConfig], out_dir, workers: int = 1
) -> ExperimentSummary:
    """Execute every cell, write trials.csv / summary.json / manifest.json.

    Failures mid-run flush the completed rows and a manifest naming the
    completed cells before re-raising.
    """
    if not cells:
        raise ValueError("experiment grid is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_outcomes: list[TrialOutcome] = []
    summaries: list[CellSummary] = []
    completed: list[str] = []
    try:
        for config in cells:
            matrix = config.matrix_spec.build()
            outcomes = _run_cell(config, matrix, workers)
            all_outcomes.extend(outcomes)
            summaries.append(_summarize_cell(config, matrix, outcomes))
            completed.append(config.cell_id)
    finally:
        write_trials_csv(all_outcomes, out / "trials.csv")
        summary = ExperimentSummary(cells=tuple(summaries))
        with open(out / "summary.json", "w") as fh:
            json.dump({"cells": [asdict(c) for c in summaries]}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest = {
            "cells": [c.cell_id for c in cells],
            "completed": completed,
            "trials": {c.cell_id: c.trials for c in cells},
            "outputs": ["trials.csv", "summary.json"],
        }
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return summary


@dataclass(frozen=True)
class SolverComparison:
    """Paired-trial comparison of the three solvers on identical instances."""

    trials: int
    success_rates: dict[str, float]
    success_ses: dict[str, float]
    agreement_fraction: float
    agreement_in_k_fraction: float
    mean_error_sq: dict[str, float | None]


def compare_solvers(config: TrialConfig, matrix: SensingMatrix | None = None) -> SolverComparison:
    """Run omp-fixed, omp-stopping, and sost on identical (signal, noise)
    realizations so differences are attributable to the algorithm.

    ``agreement_in_k_fraction`` counts trials where omp-stopping used exactly
    k iterations and returned the same support set as omp-fixed.
    """
    if matrix is None:
        matrix = config.matrix_spec.build()
    sigma = math.sqrt(config.sigma2)
    delta = config.stopping.threshold(sigma, matrix.p, config.alpha)
    successes = {name: 0 for name in SOLVER_NAMES}
    errors = {name: [] for name in SOLVER_NAMES}
    agree = 0
    agree_in_k = 0
    for trial in range(config.trials):
        signal_seed, noise_seed = _trial_seeds(config, trial)
        signal = generate_signal(matrix.p, config.k, config.profile, seed=signal_seed)
        instance = synthesize_measurement(
            matrix, signal, NoiseModel(variance=config.sigma2), seed=noise_seed
        )
        y = instance.observation
        true_set = set(signal.support)
        orders = {}
        fixed = omp_fixed(matrix, y, config.k)
        orders["omp-fixed"] = fixed.support.order
        stopping = omp_stopping(matrix, y, delta, max_iterations=config.stopping.max_iterations)
        orders["omp-stopping"] = stopping.support.order
        orders["sost"] = sost(matrix, y, config.k).order
        for name, order in orders.items():
            if set(order) == true_set and len(order) == len(true_set):
                successes[name] += 1
            if config.debias and order and len(order) <= matrix.n:
                estimate = least_squares_debias(
                    matrix, SupportSet(order=order, p=matrix.p), y
                )
                errors[name].append(float(np.sum(np.abs(estimate - signal.dense()) ** 2)))
        same_support = set(orders["omp-fixed"]) == set(orders["omp-stopping"])
        if same_support:
            agree += 1
            if stopping.iterations == config.k:
                agree_in_k += 1
    trials = config.trials
    return SolverComparison(
        trials=trials,
        success_rates={name: successes[name] / trials for name in SOLVER_NAMES},
        success_ses={
            name: math.sqrt(
                (successes[name] / trials) * (1 - successes[name] / trials) / trials
            )
            for name in SOLVER_NAMES
        },
        agreement_fraction=agree / trials,
        agreement_in_k_fraction=agree_in_k / trials,
        mean_error_sq={
            name: (float(np.mean(errors[name])) if errors[name] else None)
            for name in SOLVER_NAMES
        },
    )


def _as_list(value) -> list:
    return value if isinstance(value, list) else [value]


def expand_config(raw: dict) -> list[TrialConfig]:
    """Expand a parsed config mapping into the grid of cells.

    ``k``, ``sigma2``, and ``solver`` may be lists; cells enumerate their
    Cartesian product in (k, sigma2, solver) order.
    """
    matrix_raw = raw.get("matrix")
    if not isinstance(matrix_raw, dict) or "kind" not in matrix_raw:
        raise ValueError("config requires a matrix section with a kind")
    spec = MatrixSpec(
        kind=matrix_raw["kind"],
        n=matrix_raw.get("n"),
        p=matrix_raw.get("p"),
        seed=matrix_raw.get("seed"),
        path=matrix_raw.get("path"),
    )
    signal_raw = raw.get("signal", {})
    profile = SignalProfile(
        kind=signal_raw.get("profile", "flat"),
        min_amplitude=float(signal_raw.get("min_amplitude", 1.0)),
        decay=signal_raw.get("decay"),
        phases=signal_raw.get("phases", "unit"),
        amplitudes=tuple(signal_raw["amplitudes"]) if signal_raw.get("amplitudes") else None,
    )
    stopping_raw = raw.get("stopping", {})
    stopping = StoppingRule(
        rule=stopping_raw.get("rule", "noise-scaled"),
        delta=stopping_raw.get("delta"),
        max_iterations=stopping_raw.get("max_iterations"),
    )
    alpha = float(raw.get("alpha", 1.0))
    debias = bool(raw.get("debias", True))
    trials = int(raw.get("trials", 1))
    master_seed = int(raw.get("master_seed", 0))
    cells = []
    index = 0
    for k in _as_list(raw.get("k", 1)):
        for sigma2 in _as_list(raw.get("sigma2", 0.0)):
            for solver in _as_list(raw.get("solver", "omp-fixed")):
                cells.append(
                    TrialConfig(
                        cell_id=f"c{index:03d}",
                        cell_index=index,
                        matrix_spec=spec,
                        k=int(k),
                        sigma2=float(sigma2),
                        alpha=alpha,
                        profile=profile,
                        solver=solver,
                        stopping=stopping,
                        debias=debias,
                        trials=trials,
                        master_seed=master_seed,
                    )
                )
                index += 1
    return cells


def load_experiment_config(path) -> list[TrialConfig]:
    """Read a YAML key-value config file and expand it into cells."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError("experiment config must be a mapping")
    return expand_config(raw)
