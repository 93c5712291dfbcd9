import math

import numpy as np
import pytest

from ubmlab.errors import ContractViolationError, InvalidInputError
from ubmlab.rng import derive_stream
from ubmlab.simulator import SimConfig, sample_endpoint, sample_endpoint_ensemble
from ubmlab.spectral import (
    AngleSample,
    CircleMeasure,
    eigenangles,
    eigenangles_batch,
    empirical_measure,
    geodesic_distance_identity,
    geodesic_distance_identity_batch,
    pool_measures,
    rotate_measure,
    trace_moment,
)


def _random_unitary(n, seed):
    cfg = SimConfig(n=n, t_final=1.0, master_seed=seed)
    return sample_endpoint(cfg, 0)


def test_eigenangles_identity():
    sample = eigenangles(np.eye(5, dtype=np.complex128))
    assert np.allclose(sample.angles, 0.0)


def test_eigenangles_diagonal_with_tie_at_minus_pi():
    sample = eigenangles(np.diag([1.0 + 0j, -1.0 + 0j]))
    assert np.allclose(sample.angles, [0.0, np.pi])


def test_eigenangles_match_matrix_power_traces():
    u = _random_unitary(12, seed=1)
    sample = eigenangles(u)
    power = np.eye(12, dtype=np.complex128)
    for k in (1, 2, 3):
        power = power @ u
        direct = np.trace(power) / 12
        assert abs(trace_moment(sample, k) - direct) < 1e-8


def test_trace_moments_match_matrix_powers_up_to_k5():
    u = _random_unitary(32, seed=7)
    sample = eigenangles(u)
    power = np.eye(32, dtype=np.complex128)
    for k in range(1, 6):
        power = power @ u
        assert abs(trace_moment(sample, k) - np.trace(power) / 32) < 1e-8


def test_angle_sum_matches_determinant_argument():
    u = _random_unitary(9, seed=8)
    total = eigenangles(u).angles.sum()
    det_arg = np.angle(np.linalg.det(u))
    assert abs(np.exp(1j * total) - np.exp(1j * det_arg)) < 1e-8


def test_eigenangles_conjugation_invariance():
    u = _random_unitary(10, seed=2)
    v = _random_unitary(10, seed=3)
    a = eigenangles(u).angles
    b = eigenangles(v @ u @ v.conj().T).angles
    assert np.max(np.abs(a - b)) < 1e-8


def test_eigenangles_rejects_non_unitary():
    with pytest.raises(ContractViolationError):
        eigenangles(np.diag([2.0 + 0j, 1.0]))


def test_empirical_measure_merges_duplicates():
    mu = empirical_measure(AngleSample(np.array([0.0, 0.0, np.pi])))
    assert np.allclose(mu.atoms, [0.0, np.pi])
    assert np.allclose(mu.weights, [2 / 3, 1 / 3])
    assert abs(mu.weights.sum() - 1.0) < 1e-12


def test_empirical_measure_real_part_integral():
    mu = empirical_measure(eigenangles(np.diag([1.0 + 0j, -1.0 + 0j])))
    assert abs(mu.integrate(np.cos)) < 1e-12


def test_pool_single_measure_is_identity():
    mu = empirical_measure(AngleSample(np.array([-1.0, 0.3])))
    pooled = pool_measures([mu])
    assert np.allclose(pooled.atoms, mu.atoms)
    assert np.allclose(pooled.weights, mu.weights)


def test_pool_two_diracs():
    d0 = CircleMeasure(np.array([0.0]), np.array([1.0]))
    dpi = CircleMeasure(np.array([np.pi]), np.array([1.0]))
    pooled = pool_measures([d0, dpi])
    assert np.allclose(pooled.atoms, [0.0, np.pi])
    assert np.allclose(pooled.weights, [0.5, 0.5])


def test_pool_empty_rejected():
    with pytest.raises(InvalidInputError):
        pool_measures([])


def test_pooled_first_moment_matches_decay():
    n, t, reps = 16, 1.0, 2000
    cfg = SimConfig(n=n, t_final=t, replicas=reps, master_seed=31)
    angles = eigenangles_batch(sample_endpoint_ensemble(cfg))
    measures = [empirical_measure(AngleSample(row)) for row in angles]
    pooled = pool_measures(measures)
    per = np.cos(angles).mean(axis=1)
    se = per.std(ddof=1) / math.sqrt(reps)
    assert abs(pooled.integrate(np.cos) - math.exp(-t / 2)) <= 3 * se


def test_trace_moment_basics():
    sample = AngleSample(np.array([0.0, 0.0]))
    assert trace_moment(sample, 0) == 1.0
    assert trace_moment(sample, 5) == 1.0
    half_turns = eigenangles(np.diag([1j, -1j]))
    assert abs(trace_moment(half_turns, 2) - (-1.0)) < 1e-12


def test_geodesic_distance_identity_values():
    assert geodesic_distance_identity(np.eye(3, dtype=np.complex128)) == 0.0
    d = geodesic_distance_identity(-np.eye(2, dtype=np.complex128))
    assert abs(d - 2 * np.pi) < 1e-10


def test_geodesic_distance_bounded_by_n_pi():
    for seed in range(5):
        u = _random_unitary(8, seed=40 + seed)
        assert geodesic_distance_identity(u) <= 8 * np.pi + 1e-9


def test_small_time_mean_square_displacement():
    # d(U_t, I)^2 ~ ||sqrt(t) X||^2 with mean n^2 t for small t
    n, t, reps = 8, 1e-4, 2000
    cfg = SimConfig(n=n, t_final=t, step_count=5, replicas=reps, master_seed=43)
    angles = eigenangles_batch(sample_endpoint_ensemble(cfg))
    d2 = geodesic_distance_identity_batch(angles) ** 2
    assert abs(d2.mean() - n ** 2 * t) <= 0.05 * n ** 2 * t


def test_rotate_measure_wraps_and_sorts():
    mu = CircleMeasure(np.array([0.0, np.pi / 2]), np.array([0.25, 0.75]))
    rot = rotate_measure(mu, np.pi)
    assert np.all(np.diff(rot.atoms) >= 0)
    assert abs(rot.weights.sum() - 1.0) < 1e-12
    # mass that was at pi/2 lands at -pi/2
    idx = np.argmin(np.abs(rot.atoms + np.pi / 2))
    assert abs(rot.weights[idx] - 0.75) < 1e-12
