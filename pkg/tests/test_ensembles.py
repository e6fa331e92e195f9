import math

import numpy as np
import pytest

from oracles import gabor_mu_bruteforce

from omplab.coherence import coherence_profile, welch_bound
from omplab.ensembles import SignalProfile, alltop_gabor, gaussian_matrix, generate_signal
from omplab.guarantees import signal_stats
from omplab.model import NoiseModel


def test_gaussian_columns_unit_norm():
    matrix = gaussian_matrix(12, 40, seed=4)
    norms = np.linalg.norm(matrix.entries, axis=0)
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_gaussian_deterministic_for_seed():
    a = gaussian_matrix(6, 10, seed=9)
    b = gaussian_matrix(6, 10, seed=9)
    c = gaussian_matrix(6, 10, seed=10)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)


def test_gaussian_exceeds_welch(gaussian_64_128):
    profile = coherence_profile(gaussian_64_128)
    assert profile.mu >= welch_bound(64, 128) - 1e-12


def test_gabor_values(gabor5):
    assert gabor5.n == 5 and gabor5.p == 25
    assert abs(coherence_profile(gabor5).mu - 1 / math.sqrt(5)) < 1e-10
    assert abs(gabor_mu_bruteforce(gabor5.entries) - 1 / math.sqrt(5)) < 1e-10
    seven = alltop_gabor(7)
    assert abs(gabor_mu_bruteforce(seven.entries) - 1 / math.sqrt(7)) < 1e-10


def test_gabor_rejects_nonprime():
    with pytest.raises(ValueError, match="prime"):
        alltop_gabor(4)
    with pytest.raises(ValueError, match="prime"):
        alltop_gabor(3)


def test_gabor_is_tight_frame(gabor5, gabor31):
    for matrix in (gabor5, gabor31):
        spectral_sq = coherence_profile(matrix).spectral_norm ** 2
        assert abs(spectral_sq - matrix.p / matrix.n) < 1e-8


def test_gaussian_coherence_concentrates():
    # Loose sanity band, recorded rather than claimed: mean mu over 50 seeds.
    mus = []
    for seed in range(50):
        mus.append(coherence_profile(gaussian_matrix(256, 512, seed)).mu)
    assert 0.15 <= float(np.mean(mus)) <= 0.35


def test_flat_profile_has_unit_mar():
    signal = generate_signal(40, 5, SignalProfile(kind="flat", min_amplitude=1.0), seed=0)
    stats = signal_stats(signal, NoiseModel(1.0), n=10)
    assert abs(stats.mar - 1.0) < 1e-12
    assert all(abs(v - 1.0) < 1e-12 for v in stats.lar)


def test_geometric_profile_amplitudes():
    profile = SignalProfile(kind="geometric-decay", min_amplitude=1.0, decay=0.5)
    signal = generate_signal(20, 3, profile, seed=1)
    assert np.allclose(signal.magnitudes_descending(), [4.0, 2.0, 1.0])
    stats = signal_stats(signal, NoiseModel(1.0), n=10)
    assert abs(stats.mar - 1.0 / 7.0) < 1e-12


def test_explicit_profile_mar():
    profile = SignalProfile(kind="explicit", amplitudes=(3.0, 4.0))
    signal = generate_signal(10, 2, profile, seed=2)
    stats = signal_stats(signal, NoiseModel(1.0), n=10)
    assert abs(stats.mar - 0.72) < 1e-12


def test_linear_decay_profile():
    profile = SignalProfile(kind="linear-decay", min_amplitude=2.0, decay=1.0)
    signal = generate_signal(12, 3, profile, seed=3)
    assert np.allclose(signal.magnitudes_descending(), [6.0, 4.0, 2.0])


def test_sorting_reproduces_amplitude_sequence():
    for kind, kwargs in (
        ("flat", {}),
        ("geometric-decay", {"decay": 0.25}),
        ("linear-decay", {"decay": 0.5}),
    ):
        profile = SignalProfile(kind=kind, min_amplitude=1.5, phases="random-uniform", **kwargs)
        for seed in range(5):
            signal = generate_signal(30, 4, profile, seed=seed)
            assert np.allclose(
                signal.magnitudes_descending(), profile.amplitude_sequence(4), rtol=1e-12
            )
            assert abs(signal.min_magnitude - 1.5) < 1e-12


def test_signal_support_is_random_and_seeded():
    profile = SignalProfile(kind="flat")
    a = generate_signal(50, 4, profile, seed=11)
    b = generate_signal(50, 4, profile, seed=11)
    c = generate_signal(50, 4, profile, seed=12)
    assert a.support == b.support
    assert a.support != c.support
    assert all(1 <= i <= 50 for i in a.support)


def test_signal_k_exceeding_p_rejected():
    with pytest.raises(ValueError, match="k <= p"):
        generate_signal(4, 5, SignalProfile(kind="flat"), seed=0)


def test_profile_validation():
    with pytest.raises(ValueError, match="ratio"):
        SignalProfile(kind="geometric-decay", decay=1.5).amplitude_sequence(3)
    with pytest.raises(ValueError, match="amplitudes"):
        SignalProfile(kind="explicit")
    with pytest.raises(ValueError, match="kind"):
        SignalProfile(kind="exotic")
