"""Hot inner loops of the SDE integrators, with two interchangeable backends.

The default backend compiles the per-replica evolution loops with numba
(``@njit(cache=True, nogil=True)``).  A pure-numpy fallback evolves whole
replica batches through stacked LAPACK calls instead.  Both consume the same
pre-drawn normal increments, so a replica's trajectory does not depend on the
backend beyond floating-point roundoff.

Select the backend with the environment variable ``UBMLAB_BACKEND`` set to
``numba`` or ``numpy`` (default: numba when importable), or programmatically
via :func:`set_backend`.  ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f

        return wrap


# ---------------------------------------------------------------------------
# numba backend: loop over replicas, one matrix at a time
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _evolve_geodesic_nb(u, normals, scales, traceless):
    # u: (B, n, n) complex, updated in place
    # normals: (B, S, 2, n, n) float
    # scales: (S,) = sqrt(dt_s / n); the step is U <- U exp(i scale H)
    B, S = normals.shape[0], normals.shape[1]
    n = u.shape[1]
    for b in range(B):
        ub = u[b].copy()
        for s in range(S):
            a = normals[b, s, 0] + 1j * normals[b, s, 1]
            h = (a + a.conj().T) / 2.0
            if traceless:
                tr = 0.0
                for i in range(n):
                    tr += h[i, i].real
                tr /= n
                for i in range(n):
                    h[i, i] = h[i, i] - tr
            w, q = np.linalg.eigh(h)
            phase = np.exp(1j * (scales[s] * w))
            e = (q * phase) @ q.conj().T
            ub = ub @ e
        u[b] = ub


@njit(cache=True, nogil=True)
def _evolve_euler_nb(u, normals, dts):
    # Euler step U <- U (I + sqrt(dt) X - dt/2 I), X = i H / sqrt(n),
    # re-unitarized by the polar factor (computed via SVD).
    B, S = normals.shape[0], normals.shape[1]
    n = u.shape[1]
    for b in range(B):
        ub = u[b].copy()
        for s in range(S):
            a = normals[b, s, 0] + 1j * normals[b, s, 1]
            h = (a + a.conj().T) / 2.0
            x = (1j / np.sqrt(n)) * h
            up = ub + np.sqrt(dts[s]) * (ub @ x) - (0.5 * dts[s]) * ub
            w, _, vh = np.linalg.svd(up)
            ub = w @ vh
        u[b] = ub


# ---------------------------------------------------------------------------
# numpy backend: loop over steps, stacked LAPACK over the replica batch
# ---------------------------------------------------------------------------


def _evolve_geodesic_np(u, normals, scales, traceless):
    B, S = normals.shape[0], normals.shape[1]
    n = u.shape[1]
    idx = np.arange(n)
    for s in range(S):
        a = normals[:, s, 0] + 1j * normals[:, s, 1]
        h = (a + a.conj().transpose(0, 2, 1)) / 2.0
        if traceless:
            tr = np.trace(h, axis1=1, axis2=2).real / n
            h[:, idx, idx] -= tr[:, None]
        w, q = np.linalg.eigh(h)
        phase = np.exp(1j * (scales[s] * w))
        e = (q * phase[:, None, :]) @ q.conj().transpose(0, 2, 1)
        u[:] = u @ e


def _evolve_euler_np(u, normals, dts):
    B, S = normals.shape[0], normals.shape[1]
    n = u.shape[1]
    for s in range(S):
        a = normals[:, s, 0] + 1j * normals[:, s, 1]
        h = (a + a.conj().transpose(0, 2, 1)) / 2.0
        x = (1j / np.sqrt(n)) * h
        up = u + np.sqrt(dts[s]) * (u @ x) - (0.5 * dts[s]) * u
        w, _, vh = np.linalg.svd(up)
        u[:] = w @ vh


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_env = os.environ.get("UBMLAB_BACKEND", "").strip().lower()
if _env in ("numba", "numpy"):
    _BACKEND = _env if (_env == "numpy" or _HAVE_NUMBA) else "numpy"
else:
    _BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def active_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    """Switch backend at runtime ('numba' or 'numpy')."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND = name


def evolve_geodesic(u: np.ndarray, normals: np.ndarray, scales: np.ndarray,
                    traceless: bool = False) -> None:
    """Advance the batch ``u`` of unitary states in place.

    ``normals`` has shape (B, S, 2, n, n); step s applies
    ``U <- U exp(i * scales[s] * H_s)`` where H_s is the Hermitian matrix
    assembled from the normals (projected to traceless for the su(n) flow).
    """
    u_c = np.ascontiguousarray(u)
    normals_c = np.ascontiguousarray(normals)
    scales_c = np.ascontiguousarray(scales, dtype=np.float64)
    if _BACKEND == "numba":
        _evolve_geodesic_nb(u_c, normals_c, scales_c, traceless)
    else:
        _evolve_geodesic_np(u_c, normals_c, scales_c, traceless)
    if u_c is not u:
        u[:] = u_c


def evolve_euler(u: np.ndarray, normals: np.ndarray, dts: np.ndarray) -> None:
    """Advance the batch ``u`` in place with the projected Euler scheme."""
    u_c = np.ascontiguousarray(u)
    normals_c = np.ascontiguousarray(normals)
    dts_c = np.ascontiguousarray(dts, dtype=np.float64)
    if _BACKEND == "numba":
        _evolve_euler_nb(u_c, normals_c, dts_c)
    else:
        _evolve_euler_np(u_c, normals_c, dts_c)
    if u_c is not u:
        u[:] = u_c
