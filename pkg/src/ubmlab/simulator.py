"""Time integration of Brownian motion on the unitary group U(n).

The process solves the Ito equation ``dU = U dW - (1/2) U dt`` started at the
identity, with W a standard Brownian motion on u(n) under the scaled inner
product.  Two one-step schemes are provided:

* ``geodesic`` (default): ``U <- U exp(sqrt(dt) X)`` with X a standard
  Gaussian on u(n).  The exponential is computed by unitary diagonalization
  of the Hermitian generator, so the update is exactly unitary up to
  eigensolver roundoff, and the Ito drift emerges automatically because the
  basis elements satisfy ``sum_j xi_j^2 = -I``.
* ``euler_projected``: first-order Euler step followed by re-unitarization
  with the polar factor; kept as an independent cross-check of integrator
  bias.

Replicas are embarrassingly parallel: each owns an :class:`~ubmlab.rng.RngStream`
and results are reduced in replica-index order, so worker count never changes
any output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractViolationError, InvalidDimensionError, InvalidGridError
from .rng import RngStream, derive_stream

#: default tolerance on ||U*U - I||_max for unitarity contracts
UNITARY_TOL = 1e-10

INTEGRATORS = ("geodesic", "euler_projected")


def default_step_count(t_final: float) -> int:
    """Step-count policy keeping dt <= 0.01: max(100, ceil(100 t))."""
    return max(100, int(math.ceil(100.0 * t_final)))


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one Monte Carlo simulation."""

    n: int
    t_final: float
    step_count: int | None = None
    integrator: str = "geodesic"
    replicas: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {self.n}")
        if self.t_final < 0:
            raise ValueError(f"t_final must be >= 0, got {self.t_final}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.step_count is not None and self.step_count < 1:
            raise ValueError("step_count must be >= 1")

    @property
    def steps(self) -> int:
        return self.step_count if self.step_count is not None else default_step_count(self.t_final)


@dataclass(frozen=True)
class PathSample:
    """One Brownian path evaluated on a fixed time grid (grid[0] = 0)."""

    grid: np.ndarray
    states: list = field(default_factory=list)


def unitarity_defect(u: np.ndarray) -> float:
    """max |U*U - I| over entries; batched input uses the worst replica."""
    if u.ndim == 2:
        u = u[None]
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(u.conj().transpose(0, 2, 1) @ u - eye)))


def _require_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    defect = unitarity_defect(u)
    if defect > tol:
        raise ContractViolationError(
            f"input is not unitary within tolerance: defect {defect:.3e} > {tol:.1e}")


def step(u: np.ndarray, dt: float, rng: RngStream, integrator: str = "geodesic",
         tol: float = UNITARY_TOL) -> np.ndarray:
    """Advance one state by one time step of size dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if integrator not in INTEGRATORS:
        raise ValueError(f"unknown integrator {integrator!r}")
    _require_unitary(u, tol)
    n = u.shape[0]
    out = np.ascontiguousarray(u[None].astype(np.complex128))
    normals = rng.standard_normal((1, 1, 2, n, n))
    if integrator == "geodesic":
        kernels.evolve_geodesic(out, normals, np.array([math.sqrt(dt / n)]))
    else:
        kernels.evolve_euler(out, normals, np.array([dt]))
    return out[0]


# ---------------------------------------------------------------------------
# endpoint sampling
# ---------------------------------------------------------------------------


def _batch_size(n: int, steps: int, replicas: int) -> int:
    # keep per-batch normals under ~64 MB
    per_replica = max(1, steps * 2 * n * n)
    return max(1, min(replicas, (8 << 20) // per_replica, 512))


def _draw_endpoint_normals(cfg: SimConfig, sids, steps: int) -> np.ndarray:
    n = cfg.n
    normals = np.empty((len(sids), steps, 2, n, n))
    for i, sid in enumerate(sids):
        normals[i] = derive_stream(cfg.master_seed, sid).standard_normal((steps, 2, n, n))
    return normals


def _run_batches(job, replicas: int, batch: int, workers: int):
    spans = [(lo, min(lo + batch, replicas)) for lo in range(0, replicas, batch)]
    if workers <= 1 or len(spans) == 1:
        for span in spans:
            job(span)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, spans))


def sample_endpoint_ensemble(cfg: SimConfig, stream_ids=None, workers: int = 1) -> np.ndarray:
    """Sample ``cfg.replicas`` independent endpoints U_{t_final}, stacked
    (replicas, n, n) in replica-index order."""
    n, t = cfg.n, cfg.t_final
    if stream_ids is None:
        stream_ids = range(cfg.replicas)
    stream_ids = list(stream_ids)
    m = len(stream_ids)
    out = np.empty((m, n, n), dtype=np.complex128)
    if t == 0:
        out[:] = np.eye(n)
        return out
    steps = cfg.steps
    dt = t / steps
    dts = np.full(steps, dt)
    scales = np.sqrt(dts / n)

    def job(span):
        lo, hi = span
        normals = _draw_endpoint_normals(cfg, stream_ids[lo:hi], steps)
        u = np.broadcast_to(np.eye(n, dtype=np.complex128), (hi - lo, n, n)).copy()
        if cfg.integrator == "geodesic":
            kernels.evolve_geodesic(u, normals, scales)
        else:
            kernels.evolve_euler(u, normals, dts)
        out[lo:hi] = u

    _run_batches(job, m, _batch_size(n, steps, m), workers)
    return out


def sample_endpoint(cfg: SimConfig, stream_id: int = 0) -> np.ndarray:
    """Sample U_{t_final} for a single replica (its law converges weakly to
    the heat kernel measure as step_count grows)."""
    return sample_endpoint_ensemble(cfg, [stream_id])[0]


def sample_endpoint_coupled_ensemble(cfg: SimConfig, stream_ids=None,
                                     workers: int = 1) -> np.ndarray:
    """Endpoints built from the circle x SU(n) coupling: z_t V_t with
    ``z_t = exp(i b_t / n)`` for a scalar Brownian walk b and V a Brownian
    motion on SU(n) driven by traceless Gaussian increments.  Same law as
    :func:`sample_endpoint_ensemble` at equal times."""
    n, t = cfg.n, cfg.t_final
    if stream_ids is None:
        stream_ids = range(cfg.replicas)
    stream_ids = list(stream_ids)
    m = len(stream_ids)
    out = np.empty((m, n, n), dtype=np.complex128)
    if t == 0:
        out[:] = np.eye(n)
        return out
    steps = cfg.steps
    dt = t / steps
    scales = np.sqrt(np.full(steps, dt) / n)

    def job(span):
        lo, hi = span
        b = hi - lo
        normals = np.empty((b, steps, 2, n, n))
        walks = np.empty(b)
        for i, sid in enumerate(stream_ids[lo:hi]):
            stream = derive_stream(cfg.master_seed, sid)
            normals[i] = stream.standard_normal((steps, 2, n, n))
            walks[i] = math.sqrt(dt) * np.sum(stream.standard_normal(steps))
        v = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()
        kernels.evolve_geodesic(v, normals, scales, traceless=True)
        out[lo:hi] = np.exp(1j * walks / n)[:, None, None] * v

    _run_batches(job, m, _batch_size(n, steps, m), workers)
    return out


def sample_endpoint_coupled(cfg: SimConfig, stream_id: int = 0) -> np.ndarray:
    return sample_endpoint_coupled_ensemble(cfg, [stream_id])[0]


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------


def _segment_plan(cfg: SimConfig, grid) -> list:
    """Split each grid gap into uniform sub-steps no longer than
    t_final/step_count.  Returns [(n_sub, sub_dt), ...] per gap."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0:
        raise InvalidGridError("grid must be a 1-d list of times starting at 0")
    if np.any(np.diff(grid) <= 0):
        raise InvalidGridError("grid must be strictly increasing")
    if grid[-1] > cfg.t_final * (1 + 1e-12):
        raise InvalidGridError(
            f"grid ends at {grid[-1]} beyond the configured horizon {cfg.t_final}")
    dt_max = cfg.t_final / cfg.steps if cfg.t_final > 0 else 1.0
    plan = []
    for gap in np.diff(grid):
        n_sub = max(1, int(math.ceil(gap / dt_max - 1e-12)))
        plan.append((n_sub, gap / n_sub))
    return plan


def sample_paths_states(cfg: SimConfig, grid, stream_ids=None,
                        workers: int = 1) -> np.ndarray:
    """States of independent Brownian paths at all grid times, stacked
    (replicas, len(grid), n, n).  Each path draws its whole increment block
    from its own stream in one call, so results are grid-refinement
    independent only in law, but replica/worker independent exactly."""
    n = cfg.n
    grid = np.asarray(grid, dtype=float)
    plan = _segment_plan(cfg, grid)
    if stream_ids is None:
        stream_ids = range(cfg.replicas)
    stream_ids = list(stream_ids)
    m = len(stream_ids)
    g = grid.size
    total_sub = sum(ns for ns, _ in plan)
    out = np.empty((m, g, n, n), dtype=np.complex128)

    def job(span):
        lo, hi = span
        b = hi - lo
        normals = np.empty((b, max(total_sub, 1), 2, n, n))
        for i, sid in enumerate(stream_ids[lo:hi]):
            if total_sub:
                normals[i] = derive_stream(cfg.master_seed, sid).standard_normal(
                    (total_sub, 2, n, n))
        u = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()
        out[lo:hi, 0] = u
        pos = 0
        for gi, (n_sub, sub_dt) in enumerate(plan):
            seg = np.ascontiguousarray(normals[:, pos:pos + n_sub])
            if cfg.integrator == "geodesic":
                kernels.evolve_geodesic(u, seg, np.sqrt(np.full(n_sub, sub_dt / n)))
            else:
                kernels.evolve_euler(u, seg, np.full(n_sub, sub_dt))
            pos += n_sub
            out[lo:hi, gi + 1] = u

    batch = _batch_size(n, max(total_sub, 1), m)
    _run_batches(job, m, batch, workers)
    return out


def sample_path(cfg: SimConfig, grid, stream_id: int = 0) -> PathSample:
    """One Brownian path evaluated at all grid times (grid increasing from 0,
    within the configured horizon).  Increments between grid points are
    independent and stationary in law."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 1:
        if grid[0] != 0.0:
            raise InvalidGridError("grid must start at 0")
        return PathSample(grid=grid, states=[np.eye(cfg.n, dtype=np.complex128)])
    states = sample_paths_states(cfg, grid, [stream_id])[0]
    return PathSample(grid=grid, states=[states[i] for i in range(grid.size)])
