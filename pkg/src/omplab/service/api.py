"""FastAPI application exposing the sparse-recovery operations.

Domain validation failures surface as HTTP 400 with the error message;
malformed request bodies are FastAPI's usual 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from . import ops, schemas

app = FastAPI(
    title="omplab",
    version=__version__,
    description=(
        "Coherence-based sparse recovery: OMP solvers, sensing-matrix "
        "diagnostics, recovery guarantees, and Monte Carlo experiments."
    ),
)


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/analyze", response_model=schemas.AnalyzeResponse)
def analyze(req: schemas.AnalyzeRequest):
    return ops.analyze(req)


@app.post("/generate/matrix", response_model=schemas.GenerateMatrixResponse)
def generate_matrix(req: schemas.GenerateMatrixRequest):
    return ops.generate_matrix(req)


@app.post("/generate/signal", response_model=schemas.GenerateSignalResponse)
def generate_signal(req: schemas.GenerateSignalRequest):
    return ops.generate_signal(req)


@app.post("/synthesize", response_model=schemas.SynthesizeResponse)
def synthesize(req: schemas.SynthesizeRequest):
    return ops.synthesize(req)


@app.post("/wiggle", response_model=schemas.WiggleResponse)
def wiggle(req: schemas.WiggleRequest):
    return ops.wiggle(req)


@app.post("/solve", response_model=schemas.SolveResponse)
def solve(req: schemas.SolveRequest):
    return ops.solve(req)


@app.post("/certify", response_model=schemas.CertifyResponse)
def certify(req: schemas.CertifyRequest):
    return ops.certify(req)


@app.post("/stoc", response_model=schemas.StocResponse)
def stoc(req: schemas.StocRequest):
    return ops.stoc(req)


@app.post("/conditioning", response_model=schemas.ConditioningResponse)
def conditioning(req: schemas.ConditioningRequest):
    return ops.conditioning(req)


@app.post("/noise-sup", response_model=schemas.NoiseSupResponse)
def noise_sup(req: schemas.NoiseSupRequest):
    return ops.noise_sup(req)


@app.post("/experiment", response_model=schemas.ExperimentResponse)
def experiment(req: schemas.ExperimentRequest):
    return ops.experiment(req)


@app.post("/compare", response_model=schemas.CompareResponse)
def compare(req: schemas.CompareRequest):
    return ops.compare(req)
