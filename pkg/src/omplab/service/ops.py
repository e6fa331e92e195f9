"""Service operations shared by the HTTP endpoints and the CLI client.

Each function maps a request model to a response model and contains no
domain logic of its own; everything delegates to the core package.
"""

from __future__ import annotations

from dataclasses import asdict

from .. import coherence, diagnostics, ensembles, guarantees, harness, model, solvers
from . import schemas


def analyze(req: schemas.AnalyzeRequest) -> schemas.AnalyzeResponse:
    matrix = req.matrix.to_domain()
    profile = coherence.coherence_profile(matrix)
    strong = coherence.check_strong_coherence(profile)
    return schemas.AnalyzeResponse(
        n=profile.n,
        p=profile.p,
        mu=profile.mu,
        nu=profile.nu,
        spectral_norm=profile.spectral_norm,
        mu_threshold=strong.mu_threshold,
        mu_margin=strong.mu_margin,
        nu_threshold=strong.nu_threshold,
        nu_margin=strong.nu_margin,
        satisfied=strong.satisfied,
        welch_bound=coherence.welch_bound(profile.n, profile.p),
    )


def generate_matrix(req: schemas.GenerateMatrixRequest) -> schemas.GenerateMatrixResponse:
    if req.kind == "gaussian":
        if req.p is None:
            raise ValueError("gaussian matrices require p")
        matrix = ensembles.gaussian_matrix(req.n, req.p, req.seed)
    else:
        matrix = ensembles.alltop_gabor(req.n)
    return schemas.GenerateMatrixResponse(matrix=schemas.MatrixModel.from_domain(matrix))


def generate_signal(req: schemas.GenerateSignalRequest) -> schemas.GenerateSignalResponse:
    signal = ensembles.generate_signal(req.p, req.k, req.profile.to_domain(), req.seed)
    return schemas.GenerateSignalResponse(signal=schemas.SignalModel.from_domain(signal))


def synthesize(req: schemas.SynthesizeRequest) -> schemas.SynthesizeResponse:
    instance = model.synthesize_measurement(
        req.matrix.to_domain(),
        req.signal.to_domain(),
        model.NoiseModel(variance=req.sigma2),
        seed=req.seed,
    )
    return schemas.SynthesizeResponse(
        observation=schemas.pair_list(instance.observation),
        noise=schemas.pair_list(instance.noise),
        seed=instance.seed,
    )


def wiggle(req: schemas.WiggleRequest) -> schemas.WiggleResponse:
    matrix = req.matrix.to_domain()
    flipped, signs = coherence.wiggle(matrix)
    nu_before = coherence.coherence_profile(matrix).nu if matrix.p >= 2 else 0.0
    nu_after = coherence.coherence_profile(flipped).nu if matrix.p >= 2 else 0.0
    return schemas.WiggleResponse(
        matrix=schemas.MatrixModel.from_domain(flipped),
        signs=[int(s) for s in signs],
        nu_before=nu_before,
        nu_after=nu_after,
    )


def solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
    matrix = req.matrix.to_domain()
    y = schemas.to_array(req.observation)
    modes = sum(1 for given in (req.k, req.delta, req.sigma) if given is not None)
    if modes != 1:
        raise ValueError("exactly one of k, delta, or (sigma, alpha) must be given")
    delta = None
    if req.k is not None:
        result = solvers.omp_fixed(matrix, y, req.k, debias=req.debias)
    else:
        if req.delta is not None:
            delta = req.delta
        else:
            if req.alpha is None:
                raise ValueError("sigma mode requires alpha")
            delta = solvers.stopping_threshold(req.sigma, matrix.p, req.alpha)
        result = solvers.omp_stopping(
            matrix, y, delta, max_iterations=req.max_iterations, debias=req.debias
        )
    return schemas.SolveResponse(
        support=list(result.support.order),
        iterations=result.iterations,
        residual_norms=list(result.residual_norms),
        correlation_peaks=list(result.correlation_peaks),
        termination=result.termination,
        delta=delta,
        debiased=schemas.pair_list(result.debiased) if result.debiased is not None else None,
    )


def _condition_model(check: guarantees.ConditionCheck) -> schemas.ConditionCheckModel:
    return schemas.ConditionCheckModel(**asdict(check))


def _probability_model(bound: guarantees.ProbabilityBound) -> schemas.ProbabilityBoundModel:
    return schemas.ProbabilityBoundModel(**asdict(bound))


def certify(req: schemas.CertifyRequest) -> schemas.CertifyResponse:
    matrix = req.matrix.to_domain()
    profile = coherence.coherence_profile(matrix)
    report = guarantees.build_guarantee_report(
        profile, req.signal.to_domain(), req.sigma, req.alpha
    )
    return schemas.CertifyResponse(
        alpha=report.alpha,
        k=report.k,
        n=report.n,
        p=report.p,
        mu=report.mu,
        spectral_norm=report.spectral_norm,
        strong_coherence=report.strong_coherence,
        stats=schemas.SignalStatsModel(
            k=report.stats.k,
            norm_sq=report.stats.norm_sq,
            mar=report.stats.mar,
            lar=list(report.stats.lar),
            snr=report.stats.snr,
            snr_min=report.stats.snr_min,
        ),
        sparsity_cap_matrix=report.sparsity_cap_matrix,
        sparsity_cap_matrix_vacuous=report.sparsity_cap_matrix_vacuous,
        sparsity_cap_combined=report.sparsity_cap_combined,
        sparsity_cap_combined_theta=report.sparsity_cap_combined_theta,
        sparsity_cap_combined_vacuous=report.sparsity_cap_combined_vacuous,
        per_rank_lar=[_condition_model(c) for c in report.per_rank_lar],
        mar=_condition_model(report.mar),
        decay=[_condition_model(c) for c in report.decay],
        success_fixed=_probability_model(report.success_fixed),
        success_stopping=_probability_model(report.success_stopping),
        reconstruction_error_bound=report.reconstruction_error_bound,
    )


def _stoc_case(label: str, report: diagnostics.StocReport) -> schemas.StocCaseModel:
    return schemas.StocCaseModel(
        label=label,
        k=report.k,
        epsilon=report.epsilon,
        epsilon_vacuous=report.epsilon_vacuous,
        trials=report.trials,
        violations_near_identity=report.violations_near_identity,
        violations_cross=report.violations_cross,
        joint_violations=report.joint_violations,
        empirical_delta=report.empirical_delta,
        delta_bound=report.delta_bound,
        applicable=report.applicable,
    )


def stoc(req: schemas.StocRequest) -> schemas.StocResponse:
    matrix = req.matrix.to_domain()
    if req.epsilon is not None:
        epsilon = req.epsilon
    else:
        profile = coherence.coherence_profile(matrix)
        epsilon = diagnostics.stoc_epsilon(profile.mu, matrix.p)
    if req.z is not None:
        probes = {"given": schemas.to_array(req.z)}
    else:
        probes = diagnostics.default_probe_vectors(req.k, req.seed)
    cases = []
    for label, z in probes.items():
        report = diagnostics.verify_stoc(matrix, req.k, z, epsilon, req.trials, req.seed)
        cases.append(_stoc_case(label, report))
    return schemas.StocResponse(cases=cases)


def conditioning(req: schemas.ConditioningRequest) -> schemas.ConditioningResponse:
    report = diagnostics.submatrix_conditioning(
        req.matrix.to_domain(), req.k, req.trials, req.seed
    )
    return schemas.ConditioningResponse(**asdict(report))


def noise_sup(req: schemas.NoiseSupRequest) -> schemas.NoiseSupResponse:
    matrix = req.matrix.to_domain()
    if (req.tau is None) == (req.alpha is None):
        raise ValueError("exactly one of tau or alpha must be given")
    tau = (
        req.tau
        if req.tau is not None
        else solvers.stopping_threshold(req.sigma, matrix.p, req.alpha)
    )
    report = diagnostics.noise_sup_check(
        matrix,
        req.sigma,
        tau,
        req.trials,
        req.seed,
        projection_support=req.support,
    )
    return schemas.NoiseSupResponse(**asdict(report))


def _experiment_cells(config: schemas.ExperimentConfigModel) -> list[harness.TrialConfig]:
    return harness.expand_config(config.to_raw())


def experiment(req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
    cells = _experiment_cells(req.config)
    summary = harness.run_experiment(cells, req.out_dir, workers=req.workers)
    return schemas.ExperimentResponse(
        out_dir=req.out_dir,
        cells=[schemas.CellSummaryModel(**asdict(c)) for c in summary.cells],
    )


def compare(req: schemas.CompareRequest) -> schemas.CompareResponse:
    cells = _experiment_cells(req.config)
    if len(cells) != 1:
        raise ValueError("solver comparison requires a single-cell config")
    result = harness.compare_solvers(cells[0])
    return schemas.CompareResponse(**asdict(result))
