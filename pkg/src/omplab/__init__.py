"""omplab: coherence-based sparse recovery and verification.

Core building blocks:

* :mod:`omplab.model`        domain types, noise synthesis, seeding
* :mod:`omplab.formats`      text exchange formats
* :mod:`omplab.coherence`    mu / nu / spectral norm, wiggling, Welch bound
* :mod:`omplab.ensembles`    Gaussian matrices, Alltop Gabor frames, signals
* :mod:`omplab.solvers`      OMP (fixed / stopping), SOST, debiasing
* :mod:`omplab.guarantees`   closed-form recovery guarantees
* :mod:`omplab.diagnostics`  Monte Carlo checks of the probabilistic machinery
* :mod:`omplab.harness`      experiment runner and persistence

The HTTP service lives in :mod:`omplab.service`; the CLI in
:mod:`omplab.cli` is a thin client over the same operations layer.
"""

__version__ = "0.1.0"

from .model import (
    MeasurementInstance,
    NoiseModel,
    SensingMatrix,
    SparseSignal,
    SupportSet,
    synthesize_measurement,
)

__all__ = [
    "__version__",
    "MeasurementInstance",
    "NoiseModel",
    "SensingMatrix",
    "SparseSignal",
    "SupportSet",
    "synthesize_measurement",
]
