"""Gaussian sampling in the Lie algebras u(n) and su(n).

The algebras carry the scaled real inner product ``<X, Y> = n Re tr(X Y*)``,
under which ``dim u(n) = n^2`` and ``dim su(n) = n^2 - 1``.  A standard
Gaussian on u(n) is realized entrywise: draw a Hermitian H with independent
real N(0,1) diagonal entries and complex off-diagonal entries whose real and
imaginary parts each have variance 1/2, then set ``X = i H / sqrt(n)``.  This
is equivalent to expanding over an orthonormal basis with i.i.d. normal
coefficients but costs O(n^2) draws instead of O(n^4) basis work.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidDimensionError
from .rng import RngStream

#: unit-norm direction of the trace component, i*I/n; su(n) is its orthogonal
#: complement inside u(n).
def trace_direction(n: int) -> np.ndarray:
    return 1j * np.eye(n, dtype=np.complex128) / n


def hermitian_from_normals(normals: np.ndarray) -> np.ndarray:
    """Assemble the Hermitian matrix H from a (2, n, n) block of standard
    normals: H = (A + A*)/2 with A = normals[0] + i*normals[1].

    Both the diagonal (real, variance 1) and off-diagonal (complex, component
    variance 1/2) entry laws follow from the symmetrization, and Hermitian
    symmetry holds exactly in floating point.
    """
    a = normals[0] + 1j * normals[1]
    return (a + a.conj().T) / 2.0


def gaussian_u(n: int, rng: RngStream) -> np.ndarray:
    """Sample a standard Gaussian element of u(n): skew-Hermitian, with
    ``E <X, xi>^2 = 1`` for every unit vector xi of the scaled inner product.
    """
    if n < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {n}")
    h = hermitian_from_normals(rng.standard_normal((2, n, n)))
    return 1j * h / np.sqrt(n)


def gaussian_su(n: int, rng: RngStream) -> np.ndarray:
    """Sample a standard Gaussian element of su(n): the u(n) sample with its
    trace component projected out, hence exactly traceless."""
    if n < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {n}")
    x = gaussian_u(n, rng)
    return project_su(x)


def project_su(x: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a u(n) element onto su(n)."""
    n = x.shape[0]
    out = x.copy()
    out[np.diag_indices(n)] -= np.trace(x) / n
    return out


def metric_inner(x: np.ndarray, y: np.ndarray) -> float:
    """Scaled real inner product ``n Re tr(X Y*)`` on matrices of size n."""
    n = x.shape[0]
    return float(n * np.real(np.sum(x * y.conj())))


def metric_norm_sq(x: np.ndarray) -> float:
    return metric_inner(x, x)


def is_skew_hermitian(x: np.ndarray, tol: float = 0.0) -> bool:
    """Check X + X* = 0; with the default tol this is a bit-level check,
    which the samplers satisfy by construction."""
    return bool(np.max(np.abs(x + x.conj().T)) <= tol)
