import math

import pytest
from fastapi.testclient import TestClient

from omplab.ensembles import gaussian_matrix
from omplab.service.api import app
from omplab.service.schemas import MatrixModel

client = TestClient(app)


def matrix_payload(matrix) -> dict:
    return MatrixModel.from_domain(matrix).model_dump()


@pytest.fixture(scope="module")
def small_matrix():
    return gaussian_matrix(6, 12, seed=0)


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_analyze_endpoint(small_matrix):
    resp = client.post("/analyze", json={"matrix": matrix_payload(small_matrix)})
    assert resp.status_code == 200
    body = resp.json()
    for field in ("mu", "nu", "spectral_norm", "mu_threshold", "nu_threshold", "satisfied", "welch_bound"):
        assert field in body
    assert body["nu"] <= body["mu"]
    assert body["welch_bound"] == pytest.approx(math.sqrt((12 - 6) / (6 * 11)))


def test_generate_and_solve_roundtrip():
    gen = client.post("/generate/matrix", json={"kind": "gabor", "n": 5})
    assert gen.status_code == 200
    matrix = gen.json()["matrix"]
    assert matrix["n"] == 5 and matrix["p"] == 25

    sig = client.post(
        "/generate/signal",
        json={"p": 25, "k": 2, "profile": {"kind": "flat"}, "seed": 3},
    )
    assert sig.status_code == 200
    signal = sig.json()["signal"]

    syn = client.post(
        "/synthesize",
        json={"matrix": matrix, "signal": signal, "sigma2": 0.0, "seed": 1},
    )
    assert syn.status_code == 200
    observation = syn.json()["observation"]

    sol = client.post(
        "/solve",
        json={"matrix": matrix, "observation": observation, "k": 2, "debias": True},
    )
    assert sol.status_code == 200
    body = sol.json()
    assert sorted(body["support"]) == sorted(signal["support"])
    assert body["termination"] == "reached-k"
    assert body["iterations"] == 2
    assert len(body["residual_norms"]) == 3
    assert body["debiased"] is not None


def test_solve_stopping_mode(small_matrix):
    resp = client.post(
        "/solve",
        json={
            "matrix": matrix_payload(small_matrix),
            "observation": [[0.0, 0.0]] * 6,
            "sigma": 0.1,
            "alpha": 1.0,
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["iterations"] == 0
    assert body["termination"] == "threshold"
    assert body["delta"] == pytest.approx(0.1 * math.sqrt(2 * math.log(12)))


def test_solve_mode_validation(small_matrix):
    resp = client.post(
        "/solve",
        json={
            "matrix": matrix_payload(small_matrix),
            "observation": [[0.0, 0.0]] * 6,
            "k": 2,
            "delta": 0.1,
        },
    )
    assert resp.status_code == 400
    assert "exactly one" in resp.json()["detail"]


def test_bad_matrix_rejected():
    entries = [[[1.0, 0.0], [0.5, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    resp = client.post(
        "/analyze", json={"matrix": {"n": 2, "p": 2, "entries": entries}}
    )
    assert resp.status_code == 400
    assert "column 2" in resp.json()["detail"]


def test_certify_endpoint():
    gen = client.post("/generate/matrix", json={"kind": "gabor", "n": 5}).json()
    sig = client.post(
        "/generate/signal", json={"p": 25, "k": 2, "profile": {"kind": "flat"}, "seed": 0}
    ).json()
    resp = client.post(
        "/certify",
        json={"matrix": gen["matrix"], "signal": sig["signal"], "sigma": 0.05, "alpha": 1.0},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["k"] == 2
    assert len(body["per_rank_lar"]) == 2
    assert len(body["decay"]) == 2
    assert body["stats"]["mar"] == pytest.approx(1.0)
    assert body["success_fixed"]["value"] < 1.0
    assert body["reconstruction_error_bound"] == pytest.approx(
        4 * 2 * 2 * 0.05**2 * math.log(25)
    )


def test_wiggle_endpoint():
    matrix = gaussian_matrix(8, 16, seed=7)
    resp = client.post("/wiggle", json={"matrix": matrix_payload(matrix)})
    assert resp.status_code == 200
    body = resp.json()
    assert body["nu_after"] <= body["nu_before"]
    assert set(body["signs"]).issubset({-1, 1})


def test_stoc_endpoint_default_probes(small_matrix):
    resp = client.post(
        "/stoc",
        json={"matrix": matrix_payload(small_matrix), "k": 2, "trials": 50, "seed": 4},
    )
    assert resp.status_code == 200
    cases = resp.json()["cases"]
    assert [case["label"] for case in cases] == ["all-ones", "single-spike", "gaussian"]
    for case in cases:
        assert case["trials"] == 50
        assert 0 <= case["empirical_delta"] <= 1


def test_conditioning_endpoint(small_matrix):
    resp = client.post(
        "/conditioning",
        json={"matrix": matrix_payload(small_matrix), "k": 2, "trials": 100, "seed": 0},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["trials"] == 100
    assert 0 <= body["empirical_probability"] <= 1
    assert body["min_eigenvalue"] <= body["max_eigenvalue"]


def test_noise_sup_endpoint(small_matrix):
    resp = client.post(
        "/noise-sup",
        json={
            "matrix": matrix_payload(small_matrix),
            "sigma": 0.5,
            "alpha": 1.0,
            "trials": 200,
            "seed": 1,
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["tau"] == pytest.approx(0.5 * math.sqrt(2 * math.log(12)))
    assert 0 <= body["empirical_probability"] <= 1

    both = client.post(
        "/noise-sup",
        json={
            "matrix": matrix_payload(small_matrix),
            "sigma": 0.5,
            "alpha": 1.0,
            "tau": 1.0,
            "trials": 10,
            "seed": 1,
        },
    )
    assert both.status_code == 400


def test_experiment_endpoint(tmp_path):
    resp = client.post(
        "/experiment",
        json={
            "config": {
                "matrix": {"kind": "gabor", "n": 5},
                "k": 1,
                "sigma2": 0.0,
                "signal": {"kind": "flat", "phases": "random-uniform"},
                "solver": "omp-fixed",
                "trials": 5,
                "master_seed": 1,
            },
            "out_dir": str(tmp_path),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["cells"]) == 1
    assert body["cells"][0]["success_rate"] == 1.0
    assert (tmp_path / "trials.csv").exists()
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "manifest.json").exists()


def test_compare_endpoint():
    resp = client.post(
        "/compare",
        json={
            "config": {
                "matrix": {"kind": "gabor", "n": 5},
                "k": 1,
                "sigma2": 0.0,
                "signal": {"kind": "flat", "phases": "random-uniform"},
                "solver": "omp-fixed",
                "stopping": {"rule": "explicit", "delta": 0.0},
                "trials": 10,
                "master_seed": 4,
            }
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert set(body["success_rates"]) == {"omp-fixed", "omp-stopping", "sost"}
    assert body["success_rates"]["omp-fixed"] == 1.0
    assert body["agreement_in_k_fraction"] == 1.0
