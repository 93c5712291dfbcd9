"""Eigenvalue angles, spectral measures, trace moments, geodesic distance.

A unitary matrix has n eigenvalues of modulus one, ``exp(i theta_j)``; its
empirical spectral measure puts mass 1/n on each angle (principal branch
(-pi, pi], ties at -pi mapped to +pi).  Pooling the measures of many i.i.d.
replicas gives the Monte Carlo proxy for the ensemble-averaged measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InvalidInputError, NumericError
from .simulator import UNITARY_TOL, unitarity_defect

#: angles closer than this merge into one atom (below eigensolver noise,
#: above double-precision accumulation)
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class AngleSample:
    """Sorted eigenvalue angles of one unitary matrix, in (-pi, pi]."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        object.__setattr__(self, "angles", a)
        if a.ndim != 1 or a.size == 0:
            raise InvalidInputError("angles must be a nonempty 1-d array")
        if np.any(np.diff(a) < 0):
            raise InvalidInputError("angles must be sorted ascending")
        if np.any(a <= -np.pi) or np.any(a > np.pi):
            raise InvalidInputError("angles must lie in (-pi, pi]")

    @property
    def n(self) -> int:
        return self.angles.size


@dataclass(frozen=True)
class CircleMeasure:
    """Finitely supported probability measure on the circle: sorted atom
    angles in (-pi, pi] with positive weights summing to 1."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if atoms.shape != weights.shape or atoms.ndim != 1 or atoms.size == 0:
            raise InvalidInputError("atoms and weights must be matching nonempty 1-d arrays")
        if np.any(np.diff(atoms) < 0):
            raise InvalidInputError("atoms must be sorted")
        if np.any(weights <= 0):
            raise InvalidInputError("weights must be positive")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise InvalidInputError(f"weights must sum to 1, got {weights.sum()!r}")

    @property
    def size(self) -> int:
        return self.atoms.size

    def integrate(self, f) -> float:
        """Integral of f(angle) against the measure."""
        return float(np.sum(self.weights * f(self.atoms)))


def principal_angles(values: np.ndarray) -> np.ndarray:
    """Principal arguments of complex numbers with the -pi tie sent to +pi."""
    theta = np.angle(values)
    theta[theta <= -np.pi] = np.pi
    return theta


def eigenangles(u: np.ndarray, tol: float = UNITARY_TOL) -> AngleSample:
    """Sorted principal-branch eigenvalue angles of a unitary matrix."""
    defect = unitarity_defect(u)
    if defect > tol:
        raise ContractViolationError(
            f"eigenangles requires a unitary input: defect {defect:.3e} > {tol:.1e}")
    try:
        vals = np.linalg.eigvals(u)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(
            f"eigensolver failed on a {u.shape[0]}x{u.shape[0]} matrix with "
            f"unitarity defect {defect:.3e}") from exc
    return AngleSample(np.sort(principal_angles(vals)))


def eigenangles_batch(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Angles for a stack (m, n, n) of unitaries, shape (m, n), rows sorted."""
    defect = unitarity_defect(u)
    if defect > tol:
        raise ContractViolationError(
            f"eigenangles requires unitary inputs: defect {defect:.3e} > {tol:.1e}")
    vals = np.linalg.eigvals(u)
    return np.sort(principal_angles(vals), axis=1)


def _merge_atoms(atoms: np.ndarray, weights: np.ndarray,
                 tol: float = MERGE_TOL) -> tuple:
    """Merge sorted atoms closer than tol, summing their weights."""
    if atoms.size == 1:
        return atoms, weights
    new_group = np.empty(atoms.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(atoms) > tol
    starts = np.flatnonzero(new_group)
    merged_w = np.add.reduceat(weights, starts)
    return atoms[starts], merged_w


def empirical_measure(sample: AngleSample) -> CircleMeasure:
    """Uniform weight 1/n on each angle; duplicate angles merge."""
    n = sample.n
    atoms, weights = _merge_atoms(sample.angles, np.full(n, 1.0 / n))
    return CircleMeasure(atoms, weights / weights.sum())


def pool_measures(measures) -> CircleMeasure:
    """Equal-weight mixture of the given measures (the Monte Carlo proxy for
    the ensemble average: it converges weakly to it as the count grows)."""
    measures = list(measures)
    if not measures:
        raise InvalidInputError("cannot pool an empty list of measures")
    m = len(measures)
    atoms = np.concatenate([mu.atoms for mu in measures])
    weights = np.concatenate([mu.weights for mu in measures]) / m
    order = np.argsort(atoms, kind="stable")
    atoms, weights = _merge_atoms(atoms[order], weights[order])
    return CircleMeasure(atoms, weights / weights.sum())


def rotate_measure(mu: CircleMeasure, angle: float) -> CircleMeasure:
    """Push the measure forward by a rigid rotation of the circle."""
    atoms = np.mod(mu.atoms + angle + np.pi, 2 * np.pi) - np.pi
    atoms[atoms <= -np.pi] = np.pi
    order = np.argsort(atoms, kind="stable")
    return CircleMeasure(atoms[order], mu.weights[order])


def trace_moment(sample: AngleSample, k: int) -> complex:
    """(1/n) sum_j exp(i k theta_j) = (1/n) tr(U^k)."""
    if k < 0:
        raise InvalidInputError("moment order must be >= 0")
    return complex(np.mean(np.exp(1j * k * sample.angles)))


def trace_moments_batch(angles: np.ndarray, k: int) -> np.ndarray:
    """Per-replica (1/n) tr(U^k) from a stack (m, n) of angle rows."""
    return np.exp(1j * k * angles).mean(axis=1)


def geodesic_distance_identity(u: np.ndarray, tol: float = UNITARY_TOL) -> float:
    """Bi-invariant Riemannian distance to the identity under the scaled
    inner product: sqrt(n * sum_j theta_j^2) with principal-branch angles.
    Bounded by n*pi, attained at -I."""
    sample = eigenangles(u, tol)
    return float(np.sqrt(sample.n * np.sum(sample.angles ** 2)))


def geodesic_distance_identity_batch(angles: np.ndarray) -> np.ndarray:
    """Distances for a stack (m, n) of precomputed angle rows."""
    n = angles.shape[1]
    return np.sqrt(n * np.sum(angles ** 2, axis=1))
