import numpy as np
import pytest

from ubmlab.errors import InvalidDimensionError
from ubmlab.lie import gaussian_su, gaussian_u, metric_inner, metric_norm_sq, trace_direction
from ubmlab.rng import derive_stream


def test_skew_hermitian_exact_bit_level():
    s = derive_stream(1, 0)
    for n in (1, 2, 5, 8, 17):
        for sampler in (gaussian_u, gaussian_su):
            x = sampler(n, s)
            assert np.max(np.abs(x + x.conj().T)) == 0.0


def test_invalid_dimension():
    s = derive_stream(1, 0)
    with pytest.raises(InvalidDimensionError):
        gaussian_u(0, s)
    with pytest.raises(InvalidDimensionError):
        gaussian_su(0, s)


@pytest.mark.parametrize("n", [2, 8, 32])
def test_norm_matches_dimension_u(n):
    # E <X, X> equals dim u(n) = n^2; check within 3 empirical SEs
    s = derive_stream(2, n)
    draws = 10_000
    norms = np.array([metric_norm_sq(gaussian_u(n, s)) for _ in range(draws)])
    se = norms.std(ddof=1) / np.sqrt(draws)
    assert abs(norms.mean() - n ** 2) <= 3 * se


@pytest.mark.parametrize("n", [2, 8, 32])
def test_norm_matches_dimension_su(n):
    # dim su(n) = n^2 - 1
    s = derive_stream(3, n)
    draws = 10_000
    norms = np.array([metric_norm_sq(gaussian_su(n, s)) for _ in range(draws)])
    se = norms.std(ddof=1) / np.sqrt(draws)
    assert abs(norms.mean() - (n ** 2 - 1)) <= 3 * se


def test_trace_coefficient_standard_normal():
    # <X, xi_0> with xi_0 = i I / n is a unit-variance coordinate
    n, draws = 8, 10_000
    s = derive_stream(4, 0)
    xi0 = trace_direction(n)
    assert abs(metric_norm_sq(xi0) - 1.0) < 1e-12
    coeffs = np.array([metric_inner(gaussian_u(n, s), xi0) for _ in range(draws)])
    assert abs(coeffs.mean()) <= 3 / np.sqrt(draws)
    var = coeffs.var(ddof=1)
    assert abs(var - 1.0) <= 3 * np.sqrt(2.0 / draws)


def test_su_traceless_and_orthogonal_to_trace_direction():
    n = 8
    s = derive_stream(5, 0)
    xi0 = trace_direction(n)
    for _ in range(50):
        x = gaussian_su(n, s)
        assert abs(np.trace(x)) < 1e-13
        assert abs(metric_inner(x, xi0)) < 1e-13
