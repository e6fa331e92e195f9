import numpy as np
import pytest

from omplab.model import (
    MeasurementInstance,
    NoiseModel,
    SensingMatrix,
    SparseSignal,
    SupportSet,
    complex_gaussian,
    spawn_rng,
    synthesize_measurement,
)


def test_matrix_rejects_nonunit_columns():
    bad = np.eye(3, dtype=complex)
    bad[0, 0] = 0.5
    with pytest.raises(ValueError, match="column 1"):
        SensingMatrix(bad)


def test_matrix_rejects_nonfinite():
    bad = np.eye(2, dtype=complex)
    bad[0, 1] = np.nan
    with pytest.raises(ValueError, match="finite"):
        SensingMatrix(bad)


def test_matrix_entries_are_immutable(identity2):
    with pytest.raises(ValueError):
        identity2.entries[0, 0] = 2.0


def test_signal_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        SparseSignal(p=4, support=(2, 2), values=np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="1..4"):
        SparseSignal(p=4, support=(0, 2), values=np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="nonzero"):
        SparseSignal(p=4, support=(1, 2), values=np.array([1.0, 0.0]))


def test_densify_sparsify_roundtrip():
    signal = SparseSignal(p=6, support=(2, 3, 5), values=np.array([1.0, -2.0j, 0.5 + 0.5j]))
    again = SparseSignal.from_dense(signal.dense())
    assert again.support == signal.support
    assert np.array_equal(again.values, signal.values)


def test_support_set_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        SupportSet(order=(1, 1), p=4)
    with pytest.raises(ValueError, match="1..4"):
        SupportSet(order=(5,), p=4)


def test_noiseless_identity_synthesis(identity2):
    signal = SparseSignal(p=2, support=(1,), values=np.array([1.0]))
    inst = synthesize_measurement(identity2, signal, NoiseModel(0.0), seed=0)
    assert np.array_equal(inst.observation, np.array([1.0, 0.0], dtype=complex))

    signal = SparseSignal(p=2, support=(2,), values=np.array([3.0j]))
    inst = synthesize_measurement(identity2, signal, NoiseModel(0.0), seed=0)
    assert np.array_equal(inst.observation, np.array([0.0, 3.0j], dtype=complex))


def test_noiseless_measurement_is_exact(gabor5):
    signal = SparseSignal(p=25, support=(3, 11), values=np.array([1.0, -2.0]))
    inst = synthesize_measurement(gabor5, signal, NoiseModel(0.0), seed=9)
    clean = gabor5.entries @ signal.dense()
    assert np.linalg.norm(inst.observation - clean) == 0.0


def test_dimension_mismatch_rejected(identity2):
    signal = SparseSignal(p=3, support=(1,), values=np.array([1.0]))
    with pytest.raises(ValueError, match="dimension"):
        synthesize_measurement(identity2, signal, NoiseModel(0.0), seed=0)


def test_negative_variance_rejected():
    with pytest.raises(ValueError, match="variance"):
        NoiseModel(-1.0)


def test_noise_energy_monte_carlo():
    # E||eta||^2 = n sigma^2; estimated over 1e5 draws at n=4, sigma^2=1.
    rng = spawn_rng(42)
    draws = complex_gaussian(rng, (100_000, 4), 1.0)
    mean_energy = float(np.mean(np.sum(np.abs(draws) ** 2, axis=1)))
    assert abs(mean_energy - 4.0) < 0.02 * 4.0


def test_noise_energy_through_synthesis(identity4):
    # Same check through the synthesis op itself, at a smaller trial count.
    signal = SparseSignal(p=4, support=(1,), values=np.array([1.0]))
    clean = identity4.entries @ signal.dense()
    energies = []
    for seed in range(4000):
        inst = synthesize_measurement(identity4, signal, NoiseModel(0.5), seed=seed)
        energies.append(float(np.sum(np.abs(inst.observation - clean) ** 2)))
    assert abs(np.mean(energies) - 4 * 0.5) < 0.1


def test_seeded_noise_is_deterministic(identity4):
    signal = SparseSignal(p=4, support=(2,), values=np.array([1.0 + 1.0j]))
    a = synthesize_measurement(identity4, signal, NoiseModel(0.3), seed=7)
    b = synthesize_measurement(identity4, signal, NoiseModel(0.3), seed=7)
    assert np.array_equal(a.noise, b.noise)
    assert a.seed == 7


def test_instance_consistency_enforced(identity2):
    signal = SparseSignal(p=2, support=(1,), values=np.array([1.0]))
    with pytest.raises(ValueError, match="reproducible"):
        MeasurementInstance(
            matrix=identity2,
            signal=signal,
            noise=np.zeros(2, dtype=complex),
            observation=np.array([2.0, 0.0], dtype=complex),
            seed=0,
        )


def test_spawn_rng_distinct_paths_differ():
    a = spawn_rng(1, 2).standard_normal(4)
    b = spawn_rng(1, 3).standard_normal(4)
    c = spawn_rng(1, 2).standard_normal(4)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)
