"""Pydantic request/response models for the HTTP service and the CLI client.

Complex scalars travel as two-element ``[re, im]`` arrays. Support indices
are 1-based everywhere on the wire.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..ensembles import SignalProfile
from ..model import SensingMatrix, SparseSignal

ComplexPair = tuple[float, float]


def pair_list(values) -> list[ComplexPair]:
    arr = np.asarray(values, dtype=np.complex128).reshape(-1)
    return [(float(z.real), float(z.imag)) for z in arr]


def to_array(pairs: list[ComplexPair]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


class MatrixModel(BaseModel):
    n: int
    p: int
    entries: list[list[ComplexPair]]
    label: str = ""

    @classmethod
    def from_domain(cls, matrix: SensingMatrix) -> "MatrixModel":
        return cls(
            n=matrix.n,
            p=matrix.p,
            entries=[pair_list(row) for row in matrix.entries],
            label=matrix.label,
        )

    def to_domain(self) -> SensingMatrix:
        entries = np.array(
            [[complex(re, im) for re, im in row] for row in self.entries],
            dtype=np.complex128,
        )
        if entries.shape != (self.n, self.p):
            raise ValueError(f"entries shape {entries.shape} != ({self.n}, {self.p})")
        return SensingMatrix(entries=entries, label=self.label)


class SignalModel(BaseModel):
    p: int
    support: list[int]
    values: list[ComplexPair]

    @classmethod
    def from_domain(cls, signal: SparseSignal) -> "SignalModel":
        return cls(p=signal.p, support=list(signal.support), values=pair_list(signal.values))

    def to_domain(self) -> SparseSignal:
        return SparseSignal(p=self.p, support=tuple(self.support), values=to_array(self.values))


class ProfileModel(BaseModel):
    kind: Literal["flat", "linear-decay", "geometric-decay", "explicit"] = "flat"
    min_amplitude: float = 1.0
    decay: Optional[float] = None
    phases: Literal["unit", "random-uniform"] = "unit"
    amplitudes: Optional[list[float]] = None

    def to_domain(self) -> SignalProfile:
        return SignalProfile(
            kind=self.kind,
            min_amplitude=self.min_amplitude,
            decay=self.decay,
            phases=self.phases,
            amplitudes=tuple(self.amplitudes) if self.amplitudes else None,
        )


class AnalyzeRequest(BaseModel):
    matrix: MatrixModel


class AnalyzeResponse(BaseModel):
    n: int
    p: int
    mu: float
    nu: float
    spectral_norm: float
    mu_threshold: float
    mu_margin: float
    nu_threshold: float
    nu_margin: float
    satisfied: bool
    welch_bound: float


class GenerateMatrixRequest(BaseModel):
    kind: Literal["gaussian", "gabor"]
    n: int
    p: Optional[int] = None
    seed: int = 0


class GenerateMatrixResponse(BaseModel):
    matrix: MatrixModel


class GenerateSignalRequest(BaseModel):
    p: int
    k: int
    profile: ProfileModel = Field(default_factory=ProfileModel)
    seed: int = 0


class GenerateSignalResponse(BaseModel):
    signal: SignalModel


class SynthesizeRequest(BaseModel):
    matrix: MatrixModel
    signal: SignalModel
    sigma2: float = 0.0
    seed: int = 0


class SynthesizeResponse(BaseModel):
    observation: list[ComplexPair]
    noise: list[ComplexPair]
    seed: int


class WiggleRequest(BaseModel):
    matrix: MatrixModel


class WiggleResponse(BaseModel):
    matrix: MatrixModel
    signs: list[int]
    nu_before: float
    nu_after: float


class SolveRequest(BaseModel):
    matrix: MatrixModel
    observation: list[ComplexPair]
    k: Optional[int] = None
    delta: Optional[float] = None
    sigma: Optional[float] = None
    alpha: Optional[float] = None
    max_iterations: Optional[int] = None
    debias: bool = False


class SolveResponse(BaseModel):
    support: list[int]
    iterations: int
    residual_norms: list[float]
    correlation_peaks: list[float]
    termination: str
    delta: Optional[float] = None
    debiased: Optional[list[ComplexPair]] = None


class ConditionCheckModel(BaseModel):
    satisfied: bool
    vacuous: bool
    value: float
    threshold: float


class ProbabilityBoundModel(BaseModel):
    value: float
    vacuous: bool
    applicable: bool


class SignalStatsModel(BaseModel):
    k: int
    norm_sq: float
    mar: float
    lar: list[float]
    snr: float
    snr_min: float


class CertifyRequest(BaseModel):
    matrix: MatrixModel
    signal: SignalModel
    sigma: float
    alpha: float = 1.0


class CertifyResponse(BaseModel):
    alpha: float
    k: int
    n: int
    p: int
    mu: float
    spectral_norm: float
    strong_coherence: bool
    stats: SignalStatsModel
    sparsity_cap_matrix: float
    sparsity_cap_matrix_vacuous: bool
    sparsity_cap_combined: float
    sparsity_cap_combined_theta: float
    sparsity_cap_combined_vacuous: bool
    per_rank_lar: list[ConditionCheckModel]
    mar: ConditionCheckModel
    decay: list[ConditionCheckModel]
    success_fixed: ProbabilityBoundModel
    success_stopping: ProbabilityBoundModel
    reconstruction_error_bound: float


class StocRequest(BaseModel):
    matrix: MatrixModel
    k: int
    trials: int = 1000
    seed: int = 0
    epsilon: Optional[float] = None
    z: Optional[list[ComplexPair]] = None


class StocCaseModel(BaseModel):
    label: str
    k: int
    epsilon: float
    epsilon_vacuous: bool
    trials: int
    violations_near_identity: int
    violations_cross: int
    joint_violations: int
    empirical_delta: float
    delta_bound: float
    applicable: bool


class StocResponse(BaseModel):
    cases: list[StocCaseModel]


class ConditioningRequest(BaseModel):
    matrix: MatrixModel
    k: int
    trials: int = 1000
    seed: int = 0


class ConditioningResponse(BaseModel):
    k: int
    trials: int
    deviation_count: int
    empirical_probability: float
    probability_bound: float
    min_eigenvalue: float
    max_eigenvalue: float
    applicable: bool


class NoiseSupRequest(BaseModel):
    matrix: MatrixModel
    sigma: float
    trials: int = 1000
    seed: int = 0
    alpha: Optional[float] = None
    tau: Optional[float] = None
    support: Optional[list[int]] = None


class NoiseSupResponse(BaseModel):
    tau: float
    sigma: float
    trials: int
    satisfied_count: int
    empirical_probability: float
    analytic_bound: float


class MatrixSpecModel(BaseModel):
    kind: Literal["gaussian", "gabor", "file"]
    n: Optional[int] = None
    p: Optional[int] = None
    seed: Optional[int] = None
    path: Optional[str] = None


class StoppingModel(BaseModel):
    rule: Literal["explicit", "noise-scaled"] = "noise-scaled"
    delta: Optional[float] = None
    max_iterations: Optional[int] = None


class ExperimentConfigModel(BaseModel):
    matrix: MatrixSpecModel
    k: int | list[int] = 1
    sigma2: float | list[float] = 0.0
    alpha: float = 1.0
    signal: ProfileModel = Field(default_factory=ProfileModel)
    solver: str | list[str] = "omp-fixed"
    stopping: StoppingModel = Field(default_factory=StoppingModel)
    debias: bool = True
    trials: int = 1
    master_seed: int = 0

    def to_raw(self) -> dict:
        raw = self.model_dump()
        signal = raw.pop("signal")
        raw["signal"] = {
            "profile": signal["kind"],
            "min_amplitude": signal["min_amplitude"],
            "decay": signal["decay"],
            "phases": signal["phases"],
            "amplitudes": signal["amplitudes"],
        }
        return raw


class CellSummaryModel(BaseModel):
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
    mean_error_sq: Optional[float]
    p95_error_sq: Optional[float]
    reconstruction_error_bound: float
    fraction_within_bound_given_exact: Optional[float]
    success_probability_fixed: float
    success_probability_stopping: float
    sparsity_cap_matrix: float
    sparsity_cap_combined: float
    mu: float
    strong_coherence: bool
    bounds_applicable: bool


class ExperimentRequest(BaseModel):
    config: ExperimentConfigModel
    out_dir: str
    workers: int = 1


class ExperimentResponse(BaseModel):
    out_dir: str
    cells: list[CellSummaryModel]


class CompareRequest(BaseModel):
    config: ExperimentConfigModel


class CompareResponse(BaseModel):
    trials: int
    success_rates: dict[str, float]
    success_ses: dict[str, float]
    agreement_fraction: float
    agreement_in_k_fraction: float
    mean_error_sq: dict[str, Optional[float]]
