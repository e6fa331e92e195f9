"""Command-line client for the sparse-recovery service.

Every subcommand parses files and flags into the service request models and
delegates to the shared operations layer, so the CLI and the HTTP API always
agree. JSON responses go to stdout or ``--out``; matrices and signals are
written in the text exchange formats.
"""

from __future__ import annotations

import sys

import click
import yaml

from . import formats
from .service import ops, schemas


def _emit(model, out: str | None) -> None:
    text = model.model_dump_json(indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_matrix(path: str) -> schemas.MatrixModel:
    return schemas.MatrixModel.from_domain(formats.read_matrix(path))


@click.group()
def main():
    """Coherence-based sparse recovery toolbox."""


@main.command()
@click.argument("matrix_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Write JSON here instead of stdout.")
def analyze(matrix_file, out):
    """Coherence profile and strong-coherence margins of a matrix file."""
    resp = ops.analyze(schemas.AnalyzeRequest(matrix=_load_matrix(matrix_file)))
    _emit(resp, out)


@main.group()
def generate():
    """Generate matrices and signals in the exchange formats."""


@generate.command("matrix")
@click.option("--kind", type=click.Choice(["gaussian", "gabor"]), required=True)
@click.option("--n", type=int, required=True, help="Rows (gabor: prime sequence length).")
@click.option("--p", type=int, default=None, help="Columns (gaussian only; gabor uses n^2).")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def generate_matrix(kind, n, p, seed, out):
    """Write a generated sensing matrix to OUT."""
    resp = ops.generate_matrix(schemas.GenerateMatrixRequest(kind=kind, n=n, p=p, seed=seed))
    formats.write_matrix(resp.matrix.to_domain(), out)
    click.echo(f"wrote {resp.matrix.n} x {resp.matrix.p} matrix to {out}")


@generate.command("signal")
@click.option("--p", type=int, required=True)
@click.option("--k", type=int, required=True)
@click.option(
    "--profile",
    type=click.Choice(["flat", "linear-decay", "geometric-decay", "explicit"]),
    default="flat",
)
@click.option("--min-amplitude", type=float, default=1.0)
@click.option("--decay", type=float, default=None, help="Geometric ratio or linear increment.")
@click.option("--phases", type=click.Choice(["unit", "random-uniform"]), default="unit")
@click.option("--amplitudes", type=str, default=None, help="Comma-separated explicit amplitudes.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def generate_signal(p, k, profile, min_amplitude, decay, phases, amplitudes, seed, out):
    """Write a generated sparse signal to OUT."""
    amps = [float(a) for a in amplitudes.split(",")] if amplitudes else None
    req = schemas.GenerateSignalRequest(
        p=p,
        k=k,
        profile=schemas.ProfileModel(
            kind=profile,
            min_amplitude=min_amplitude,
            decay=decay,
            phases=phases,
            amplitudes=amps,
        ),
        seed=seed,
    )
    resp = ops.generate_signal(req)
    formats.write_signal(resp.signal.to_domain(), out)
    click.echo(f"wrote {k}-sparse signal of dimension {p} to {out}")


@main.command()
@click.option("--matrix", "matrix_file", type=click.Path(exists=True), required=True)
@click.option("--signal", "signal_file", type=click.Path(exists=True), required=True)
@click.option("--sigma2", type=float, default=0.0, help="Noise power per complex entry.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True, help="Observation vector file.")
@click.option("--out-noise", type=click.Path(), default=None, help="Noise realization file.")
def synthesize(matrix_file, signal_file, sigma2, seed, out, out_noise):
    """Form y = X beta + eta and write the observation vector."""
    req = schemas.SynthesizeRequest(
        matrix=_load_matrix(matrix_file),
        signal=schemas.SignalModel.from_domain(formats.read_signal(signal_file)),
        sigma2=sigma2,
        seed=seed,
    )
    resp = ops.synthesize(req)
    formats.write_vector(schemas.to_array(resp.observation), out)
    if out_noise:
        formats.write_vector(schemas.to_array(resp.noise), out_noise)
    click.echo(f"wrote observation to {out}")


@main.command()
@click.argument("matrix_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), required=True, help="Sign-flipped matrix file.")
def wiggle(matrix_file, out):
    """Sign-flip columns to reduce average coherence; write the result."""
    resp = ops.wiggle(schemas.WiggleRequest(matrix=_load_matrix(matrix_file)))
    formats.write_matrix(resp.matrix.to_domain(), out)
    click.echo(f"nu: {resp.nu_before:.6g} -> {resp.nu_after:.6g}; wrote {out}")


@main.command()
@click.option("--matrix", "matrix_file", type=click.Path(exists=True), required=True)
@click.option("--observation", "observation_file", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, default=None, help="Run OMP for exactly k iterations.")
@click.option("--delta", type=float, default=None, help="Run OMP with this stopping threshold.")
@click.option("--sigma", type=float, default=None, help="Noise level for the scaled threshold.")
@click.option("--alpha", type=float, default=None, help="Confidence exponent (>= 1).")
@click.option("--max-iterations", type=int, default=None)
@click.option("--debias", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None)
def solve(matrix_file, observation_file, k, delta, sigma, alpha, max_iterations, debias, out):
    """Recover a sparse signal from an observation file."""
    req = schemas.SolveRequest(
        matrix=_load_matrix(matrix_file),
        observation=schemas.pair_list(formats.read_vector(observation_file)),
        k=k,
        delta=delta,
        sigma=sigma,
        alpha=alpha,
        max_iterations=max_iterations,
        debias=debias,
    )
    _emit(ops.solve(req), out)


@main.command()
@click.option("--matrix", "matrix_file", type=click.Path(exists=True), required=True)
@click.option("--signal", "signal_file", type=click.Path(exists=True), required=True)
@click.option("--sigma", type=float, required=True)
@click.option("--alpha", type=float, default=1.0)
@click.option("--out", type=click.Path(), default=None)
def certify(matrix_file, signal_file, sigma, alpha, out):
    """Evaluate every closed-form guarantee for a (matrix, signal, noise) triple."""
    req = schemas.CertifyRequest(
        matrix=_load_matrix(matrix_file),
        signal=schemas.SignalModel.from_domain(formats.read_signal(signal_file)),
        sigma=sigma,
        alpha=alpha,
    )
    _emit(ops.certify(req), out)


@main.command()
@click.option("--matrix", "matrix_file", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, required=True)
@click.option("--trials", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--z-file", type=click.Path(exists=True), default=None, help="Probe vector file.")
@click.option("--epsilon", type=float, default=None, help="Override the coherence-derived level.")
@click.option("--out", type=click.Path(), default=None)
def stoc(matrix_file, k, trials, seed, z_file, epsilon, out):
    """Empirical check of the statistical orthogonality condition."""
    z = schemas.pair_list(formats.read_vector(z_file)) if z_file else None
    req = schemas.StocRequest(
        matrix=_load_matrix(matrix_file), k=k, trials=trials, seed=seed, epsilon=epsilon, z=z
    )
    _emit(ops.stoc(req), out)


@main.command()
@click.option("--matrix", "matrix_file", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, required=True)
@click.option("--trials", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None)
def conditioning(matrix_file, k, trials, seed, out):
    """Empirical conditioning of random k-column submatrices."""
    req = schemas.ConditioningRequest(
        matrix=_load_matrix(matrix_file), k=k, trials=trials, seed=seed
    )
    _emit(ops.conditioning(req), out)


@main.command("noise-sup")
@click.option("--matrix", "matrix_file", type=click.Path(exists=True), required=True)
@click.option("--sigma", type=float, required=True)
@click.option("--alpha", type=float, default=None, help="Sets tau = sigma sqrt((1+alpha) ln p).")
@click.option("--tau", type=float, default=None, help="Explicit threshold.")
@click.option("--trials", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--support", type=str, default=None, help="Comma-separated 1-based indices.")
@click.option("--out", type=click.Path(), default=None)
def noise_sup(matrix_file, sigma, alpha, tau, trials, seed, support, out):
    """Empirical matched-filter noise sup bound against the analytic value."""
    indices = [int(i) for i in support.split(",")] if support else None
    req = schemas.NoiseSupRequest(
        matrix=_load_matrix(matrix_file),
        sigma=sigma,
        alpha=alpha,
        tau=tau,
        trials=trials,
        seed=seed,
        support=indices,
    )
    _emit(ops.noise_sup(req), out)


def _load_config_model(path: str) -> schemas.ExperimentConfigModel:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise click.ClickException("experiment config must be a YAML mapping")
    signal = raw.pop("signal", {})
    if signal:
        signal = dict(signal)
        if "profile" in signal:
            signal["kind"] = signal.pop("profile")
        raw["signal"] = signal
    return schemas.ExperimentConfigModel(**raw)


@main.command()
@click.option("--config", "config_file", type=click.Path(exists=True), required=True)
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1)
def experiment(config_file, out_dir, workers):
    """Run a Monte Carlo experiment grid from a YAML config."""
    req = schemas.ExperimentRequest(
        config=_load_config_model(config_file), out_dir=out_dir, workers=workers
    )
    resp = ops.experiment(req)
    for cell in resp.cells:
        click.echo(
            f"{cell.cell_id}: solver={cell.solver} k={cell.k} sigma2={cell.sigma2:g} "
            f"success={cell.success_rate:.4f} (se {cell.success_se:.4f})"
        )
    click.echo(f"wrote trials.csv, summary.json, manifest.json to {out_dir}")


@main.command()
@click.option("--config", "config_file", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
def compare(config_file, out):
    """Run all three solvers on identical realizations and compare."""
    req = schemas.CompareRequest(config=_load_config_model(config_file))
    _emit(ops.compare(req), out)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Serve the HTTP API."""
    import uvicorn

    uvicorn.run("omplab.service.api:app", host=host, port=port)


if __name__ == "__main__":
    main()
