"""Monte Carlo experiments confronting simulation with the convergence bounds.

Every experiment reduces to a list of :class:`ExperimentRecord` rows that are
persisted as CSV (plus a JSON config sidecar) and are bit-for-bit reproducible
from the seed.  Theorem constants that the theory leaves unspecified are
handled by single-constant feasibility: one constant per bound, fitted on the
grid, must make the bound hold at every grid point simultaneously; rate
exponents are additionally checked through log-log slopes.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .freebm import model_for, moment, w1_to_uniform
from .rng import substream_id
from .simulator import SimConfig, sample_endpoint_coupled_ensemble, \
    sample_endpoint_ensemble, sample_paths_states
from .spectral import eigenangles_batch, geodesic_distance_identity_batch
from .transport import quantile_discretize, w1_atoms_geodesic
from .errors import InvalidInputError

CSV_HEADER = "experiment,n,t,replicas,estimate,std_error,paper_bound,bound_satisfied,seed,wall_time_s"

#: stream-id derivation tags, one per experiment family
EXP_CODES = {
    "exact_mean": 1,
    "coupling": 2,
    "rate_avg_to_avg": 3,
    "moment_convergence": 4,
    "avg_to_limit": 5,
    "concentration_tail": 6,
    "path_sup": 7,
    "bm_tail": 8,
    "limit_to_uniform": 9,
}


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of a rate/tail/path experiment."""

    experiment: str
    n: int
    t: float
    replicas: int
    estimate: float
    std_error: float
    paper_bound: float
    bound_satisfied: bool
    seed: int
    wall_time: float  # measured seconds; reported on stdout, not in the CSV


@dataclass(frozen=True)
class PowerLawFit:
    """OLS fit of log y against log x."""

    points: tuple
    slope: float
    intercept: float
    r_squared: float


def fit_power_law(points) -> PowerLawFit:
    """Least-squares power-law exponent through positive (x, y) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise InvalidInputError("power-law fit needs at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise InvalidInputError("power-law fit requires positive coordinates")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return PowerLawFit(tuple(pts), float(slope), float(intercept), r2)


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

_CHUNK = 128  # replicas simulated per chunk to bound peak memory


def _mean_se(values: np.ndarray):
    m = values.size
    se = float(values.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return float(values.mean()), se


def _ensemble_angles(n, t, replicas, seed, exp_code, point, steps=None,
                     integrator="geodesic", workers=1, coupled=False) -> np.ndarray:
    """Eigenangles (replicas, n) of independent endpoints, replica-indexed."""
    cfg = SimConfig(n=n, t_final=t, step_count=steps, integrator=integrator,
                    replicas=replicas, master_seed=seed)
    sampler = sample_endpoint_coupled_ensemble if coupled else sample_endpoint_ensemble
    out = np.empty((replicas, n))
    for lo in range(0, replicas, _CHUNK):
        hi = min(lo + _CHUNK, replicas)
        sids = [substream_id(exp_code, point, r) for r in range(lo, hi)]
        out[lo:hi] = eigenangles_batch(sampler(cfg, sids, workers=workers))
    return out


def _w1_each_to_pool(angles: np.ndarray) -> np.ndarray:
    """Geodesic W1 of each replica's spectral measure to the pooled measure."""
    m, n = angles.shape
    pooled = np.sort(angles.ravel())
    w_pool = np.full(pooled.size, 1.0 / pooled.size)
    w_rep = np.full(n, 1.0 / n)
    return np.array([
        w1_atoms_geodesic(angles[i], w_rep, pooled, w_pool) for i in range(m)
    ])


def _pooled_w1_to_atoms(angles, target_atoms, target_weights):
    """W1(pooled measure, target) plus a split-half spread estimate."""
    m = angles.shape[0]
    pool = angles.ravel()
    w = np.full(pool.size, 1.0 / pool.size)
    value = w1_atoms_geodesic(pool, w, target_atoms, target_weights)
    half = m // 2
    if half >= 1 and m >= 2:
        a = angles[:half].ravel()
        b = angles[half:].ravel()
        va = w1_atoms_geodesic(a, np.full(a.size, 1.0 / a.size), target_atoms, target_weights)
        vb = w1_atoms_geodesic(b, np.full(b.size, 1.0 / b.size), target_atoms, target_weights)
        spread = abs(va - vb) / 2.0
    else:
        spread = 0.0
    return value, spread


def _complex_moment_stats(angles: np.ndarray, k: int):
    """Mean and standard error of the per-replica moments (1/n) tr(U^k)."""
    per = np.exp(1j * k * angles).mean(axis=1)
    mean = complex(per.mean())
    m = per.size
    var = per.real.var(ddof=1) + per.imag.var(ddof=1) if m > 1 else 0.0
    return mean, math.sqrt(var / m) if m > 1 else 0.0


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def run_exact_mean(n_list, t_list, replicas=4000, seed=0, steps=None,
                   integrator="geodesic", workers=1) -> list:
    """Sample mean of Re((1/n) tr U_t) against the exact identity e^{-t/2}.

    The bound column carries the integrator-bias allowance 0.01 t; the
    statistical 3*SE band enters through the shared satisfied rule."""
    records = []
    code = EXP_CODES["exact_mean"]
    for point, (n, t) in enumerate((n, t) for n in n_list for t in t_list):
        tic = time.perf_counter()
        ang = _ensemble_angles(n, t, replicas, seed, code, point, steps, integrator, workers)
        mean, se = _mean_se(np.cos(ang).mean(axis=1))
        estimate = abs(mean - math.exp(-t / 2.0))
        bound = 0.01 * t
        records.append(ExperimentRecord(
            "exact_mean", n, float(t), replicas, estimate, se, bound,
            estimate <= bound + 3 * se, seed, time.perf_counter() - tic))
    return records


def run_coupling_check(n=8, t_list=(0.5, 2.0), k_list=(1, 2, 3), replicas=4000,
                       seed=0, workers=1) -> list:
    """Two-sample agreement of trace moments between the direct U(n) simulator
    and the circle x SU(n) coupled construction (same law)."""
    records = []
    code = EXP_CODES["coupling"]
    for it, t in enumerate(t_list):
        tic = time.perf_counter()
        ang_d = _ensemble_angles(n, t, replicas, seed, code, 2 * it, workers=workers)
        ang_c = _ensemble_angles(n, t, replicas, seed, code, 2 * it + 1,
                                 workers=workers, coupled=True)
        wall = time.perf_counter() - tic
        for k in k_list:
            md, sd = _complex_moment_stats(ang_d, k)
            mc, sc = _complex_moment_stats(ang_c, k)
            se = math.hypot(sd, sc)
            estimate = abs(md - mc)
            records.append(ExperimentRecord(
                f"coupling_k{k}", n, float(t), replicas, estimate, se, 0.0,
                estimate <= 3 * se, seed, wall))
            wall = 0.0
    return records


def run_rate_avg_to_avg(n_list=(8, 16, 32, 64, 128), t_list=(1.0,), replicas=500,
                        seed=0, workers=1) -> list:
    """Mean geodesic W1 of one replica to the pooled ensemble proxy, with the
    (t/n^2)^(1/3) single-constant bound and the log-log slope across n."""
    records = []
    code = EXP_CODES["rate_avg_to_avg"]
    results = {}
    walls = {}
    point = 0
    for t in t_list:
        for n in n_list:
            tic = time.perf_counter()
            ang = _ensemble_angles(n, t, replicas, seed, code, point, workers=workers)
            results[(n, t)] = _mean_se(_w1_each_to_pool(ang))
            walls[(n, t)] = time.perf_counter() - tic
            point += 1
    rates = {(n, t): (t / n ** 2) ** (1.0 / 3.0) for (n, t) in results}
    c_fit = max(results[p][0] / rates[p] for p in results)
    for t in t_list:
        for n in n_list:
            est, se = results[(n, t)]
            bound = c_fit * rates[(n, t)]
            # second regime of the a.s. theorem: for t past the mixing scale
            # the bound loses its t dependence
            if t >= 8 * math.log(n) ** 2:
                bound = min(bound, c_fit * n ** (-2.0 / 3.0))
            records.append(ExperimentRecord(
                "rate_avg_to_avg", n, float(t), replicas, est, se, bound,
                est <= bound + 3 * se, seed, walls[(n, t)]))
        if len(n_list) >= 3:
            fit = fit_power_law([(n, results[(n, t)][0]) for n in n_list])
            records.append(ExperimentRecord(
                "rate_avg_to_avg_slope", 0, float(t), replicas, fit.slope, 0.0,
                -0.6, fit.slope <= -0.6, seed, 0.0))
    return records


def run_moment_convergence(n_list=(16, 32), t=1.0, k_max=4, replicas=4000,
                           seed=0, workers=1) -> list:
    """|MC mean of (1/n) tr(U^k) - limit moment| against t^2 k^4 / n^2."""
    if k_max > 8:
        raise InvalidInputError("desk-scale moment check supports k_max <= 8")
    records = []
    code = EXP_CODES["moment_convergence"]
    for point, n in enumerate(n_list):
        tic = time.perf_counter()
        ang = _ensemble_angles(n, t, replicas, seed, code, point, workers=workers)
        wall = time.perf_counter() - tic
        for k in range(1, k_max + 1):
            mc, se = _complex_moment_stats(ang, k)
            estimate = abs(mc - moment(k, t))
            bound = t ** 2 * k ** 4 / n ** 2
            records.append(ExperimentRecord(
                f"moment_k{k}", n, float(t), replicas, estimate, se, bound,
                estimate <= bound + 3 * se, seed, wall))
            wall = 0.0
    return records


def run_avg_to_limit(n_list=(16, 64), t_list=(1.0,), replicas=1000, seed=0,
                     m_atoms=4096, workers=1) -> list:
    """Geodesic W1 between the pooled ensemble proxy and the limit-measure
    discretization, with the t^{2/5} log(n) / n^{2/5} single-constant bound;
    for t >= 8 the route through the uniform measure is recorded as well."""
    records = []
    code = EXP_CODES["avg_to_limit"]
    results = {}
    walls = {}
    unif_results = {}
    point = 0
    disc_u, _ = quantile_discretize("uniform", m_atoms)
    for t in t_list:
        disc_t, _ = quantile_discretize(model_for(float(t)), m_atoms)
        for n in n_list:
            tic = time.perf_counter()
            ang = _ensemble_angles(n, t, replicas, seed, code, point, workers=workers)
            results[(n, t)] = _pooled_w1_to_atoms(ang, disc_t.atoms, disc_t.weights)
            if t >= 8:
                unif_results[(n, t)] = _pooled_w1_to_atoms(ang, disc_u.atoms, disc_u.weights)
            walls[(n, t)] = time.perf_counter() - tic
            point += 1
    rates = {(n, t): t ** 0.4 * math.log(n) / n ** 0.4 for (n, t) in results}
    c_fit = max(results[p][0] / rates[p] for p in results)
    for t in t_list:
        for n in n_list:
            est, se = results[(n, t)]
            records.append(ExperimentRecord(
                "avg_to_limit", n, float(t), replicas, est, se,
                c_fit * rates[(n, t)], est <= c_fit * rates[(n, t)] + 3 * se,
                seed, walls[(n, t)]))
        ns = sorted(n_list)
        for n1, n2 in zip(ns, ns[1:]):
            # rate -2/5 with 0.1 slack for Monte Carlo noise
            ratio = results[(n2, t)][0] / results[(n1, t)][0]
            bound = (n1 / n2) ** 0.3
            records.append(ExperimentRecord(
                "avg_to_limit_ratio", n2, float(t), replicas, ratio, 0.0, bound,
                ratio <= bound, seed, 0.0))
    for (n, t), (est, se) in sorted(unif_results.items()):
        bound = math.exp(-t / (8 * math.log(n))) + 2 * math.pi / n
        records.append(ExperimentRecord(
            "avg_to_uniform", n, float(t), replicas, est, se, bound,
            est <= bound + 3 * se, seed, 0.0))
        # triangle route: distance to the limit through the uniform measure
        tri = est + w1_to_uniform(float(t), max(m_atoms, 1024)).upper
        direct, dse = results[(n, t)]
        records.append(ExperimentRecord(
            "avg_to_limit_triangle", n, float(t), replicas, direct, dse, tri,
            direct <= tri + 3 * dse, seed, 0.0))
    for n in n_list:
        ts = sorted(t for (nn, t) in unif_results if nn == n)
        for t1, t2 in zip(ts, ts[1:]):
            v1, s1 = unif_results[(n, t1)]
            v2, s2 = unif_results[(n, t2)]
            records.append(ExperimentRecord(
                "avg_to_uniform_monotone", n, float(t2), replicas, v2 - v1,
                s1 + s2, 0.0, v2 - v1 <= 3 * (s1 + s2), seed, 0.0))
    return records


def run_concentration_tail(n=16, t=1.0, replicas=2000, x_grid=(0.05, 0.1, 0.2),
                           seed=0, workers=1) -> list:
    """Empirical exceedance of W1(mu, pooled) over its mean by x, against the
    sub-Gaussian tail 2 exp(-n^2 x^2 / t).  The geodesic cost makes the check
    conservative; the (2/pi)-scaled chordal proxy is logged alongside."""
    records = []
    code = EXP_CODES["concentration_tail"]
    tic = time.perf_counter()
    ang = _ensemble_angles(n, t, replicas, seed, code, 0, workers=workers)
    w1s = _w1_each_to_pool(ang)
    wall = time.perf_counter() - tic
    for name, vals in (("concentration_tail", w1s),
                       ("concentration_tail_chordal", (2.0 / math.pi) * w1s)):
        mean = float(vals.mean())
        for x in x_grid:
            bound = 2.0 * math.exp(-n ** 2 * x ** 2 / t)
            b = min(bound, 1.0)
            se = math.sqrt(b * (1.0 - b) / replicas)
            p_hat = float(np.mean(vals > mean + x))
            records.append(ExperimentRecord(
                name, n, float(t), replicas, p_hat, se, bound,
                p_hat <= bound + 3 * se, seed, wall))
            wall = 0.0
    return records


def run_path_sup(n_list=(16, 64), t_horizon=4.0, grid_points=100, paths=20,
                 seed=0, m_atoms=1024, workers=1, free_floor=0.5) -> list:
    """Per-path sup over the time grid of W1(mu_t, limit measure at t), with
    the comparison starting at the model floor; grid times below the floor are
    compared against the floor-time measure and recorded separately."""
    if grid_points < 50:
        raise InvalidInputError("path experiment requires grid_points >= 50")
    records = []
    code = EXP_CODES["path_sup"]
    grid = np.linspace(0.0, t_horizon, grid_points)
    main_idx = [i for i, tt in enumerate(grid) if tt >= free_floor]
    floor_idx = [i for i, tt in enumerate(grid) if tt < free_floor]
    discs = {}
    for i in main_idx:
        m_model = model_for(float(grid[i]))
        discs[i] = quantile_discretize(m_model, m_atoms)[0]
    disc_floor = quantile_discretize(model_for(float(free_floor)), m_atoms)[0]
    medians = {}
    spreads = {}
    maxima = {}
    floor_medians = {}
    walls = {}
    for pn, n in enumerate(n_list):
        tic = time.perf_counter()
        cfg = SimConfig(n=n, t_final=t_horizon, replicas=paths, master_seed=seed)
        w_rep = np.full(n, 1.0 / n)
        sup_main = np.empty(paths)
        sup_floor = np.empty(paths)
        batch = max(1, (2 << 20) // (grid_points * n * n))
        for lo in range(0, paths, batch):
            hi = min(lo + batch, paths)
            sids = [substream_id(code, pn, r) for r in range(lo, hi)]
            states = sample_paths_states(cfg, grid, sids, workers=workers)
            for b in range(hi - lo):
                ang = eigenangles_batch(states[b])
                sup_main[lo + b] = max(
                    w1_atoms_geodesic(ang[i], w_rep, discs[i].atoms, discs[i].weights)
                    for i in main_idx)
                sup_floor[lo + b] = max(
                    w1_atoms_geodesic(ang[i], w_rep, disc_floor.atoms, disc_floor.weights)
                    for i in floor_idx) if floor_idx else 0.0
        walls[n] = time.perf_counter() - tic
        medians[n] = float(np.median(sup_main))
        maxima[n] = float(sup_main.max())
        floor_medians[n] = float(np.median(sup_floor)) if floor_idx else 0.0
        half = paths // 2
        spreads[n] = abs(float(np.median(sup_main[:half])) -
                         float(np.median(sup_main[half:]))) / 2.0 if half >= 1 else 0.0
    rate = {n: t_horizon ** 0.4 * math.log(n) / n ** 0.4 for n in n_list}
    c_fit = max(medians[n] / rate[n] for n in n_list)
    for n in n_list:
        bound = c_fit * rate[n]
        records.append(ExperimentRecord(
            "path_sup_median", n, float(t_horizon), paths, medians[n], spreads[n],
            bound, medians[n] <= bound + 3 * spreads[n], seed, walls[n]))
        # diagnostic rows: no bound applies, recorded with an infinite bound
        records.append(ExperimentRecord(
            "path_sup_max", n, float(t_horizon), paths, maxima[n], 0.0,
            math.inf, True, seed, 0.0))
        if floor_idx:
            records.append(ExperimentRecord(
                "path_sup_floor_median", n, float(t_horizon), paths,
                floor_medians[n], 0.0, math.inf, True, seed, 0.0))
    ns = sorted(n_list)
    for n1, n2 in zip(ns, ns[1:]):
        diff = medians[n2] - medians[n1]
        records.append(ExperimentRecord(
            "path_sup_ordering", n2, float(t_horizon), paths, diff, 0.0, 0.0,
            diff < 0.0, seed, 0.0))
    return records


def run_bm_tail(n=4, delta=0.01, r_grid=(2.0,), s_scale=0.5, paths=2000,
                substeps=50, seed=0, workers=1) -> list:
    """Tail of the geodesic displacement sup_{t < delta} d(U_t, I) against
    16 (1 + r/s)^{n^2} exp(-r^2 / 2 delta).  The sup is under-approximated on
    a finite grid, which only makes the check conservative.  Configurations
    where every bound is >= 1 are vacuous and flagged as such."""
    records = []
    code = EXP_CODES["bm_tail"]
    grid = np.linspace(0.0, delta, substeps + 1)
    cfg = SimConfig(n=n, t_final=delta, step_count=substeps, replicas=paths,
                    master_seed=seed)
    tic = time.perf_counter()
    sups = np.empty(paths)
    batch = max(1, (2 << 20) // ((substeps + 1) * n * n))
    for lo in range(0, paths, batch):
        hi = min(lo + batch, paths)
        sids = [substream_id(code, 0, r) for r in range(lo, hi)]
        states = sample_paths_states(cfg, grid, sids, workers=workers)
        flat = states.reshape(-1, n, n)
        d = geodesic_distance_identity_batch(eigenangles_batch(flat))
        sups[lo:hi] = d.reshape(hi - lo, -1).max(axis=1)
    wall = time.perf_counter() - tic
    bounds = {}
    for r in r_grid:
        s = r * s_scale
        log_bound = math.log(16.0) + n ** 2 * math.log1p(r / s) - r ** 2 / (2 * delta)
        bounds[r] = math.exp(min(log_bound, 50.0))
    if all(b >= 1.0 for b in bounds.values()):
        warnings.warn(
            f"all displacement-tail bounds are vacuous (>= 1) for n={n}, "
            f"delta={delta}, r_grid={tuple(r_grid)}", stacklevel=2)
    for r in r_grid:
        s = r * s_scale
        bound = bounds[r]
        b = min(bound, 1.0)
        se = math.sqrt(b * (1.0 - b) / paths)
        p_hat = float(np.mean(sups >= r + 2 * s))
        records.append(ExperimentRecord(
            "bm_tail_vacuous" if bound >= 1.0 else "bm_tail", n, float(delta),
            paths, p_hat, se, bound, p_hat <= bound + 3 * se, seed, wall))
        wall = 0.0
    return records


def run_limit_to_uniform(t_list=(4.0, 6.0, 8.0, 10.0, 16.0), m_atoms=4096,
                         seed=0) -> list:
    """Decay of W1(limit measure at t, uniform): values against the
    t^{3/2} e^{-t/4} envelope (single fitted constant), strict decrease along
    the grid, and consecutive ratios <= 0.95 from t >= 6 on."""
    records = []
    ts = sorted(float(t) for t in t_list)
    tic = time.perf_counter()
    vals = {t: w1_to_uniform(t, m_atoms).value for t in ts}
    wall = time.perf_counter() - tic
    envelope = {t: t ** 1.5 * math.exp(-t / 4.0) for t in ts}
    c_fit = max(vals[t] / envelope[t] for t in ts)
    for t in ts:
        records.append(ExperimentRecord(
            "limit_to_uniform", 0, t, 0, vals[t], 0.0, c_fit * envelope[t],
            vals[t] <= c_fit * envelope[t], seed, wall))
        wall = 0.0
    for t1, t2 in zip(ts, ts[1:]):
        ratio = vals[t2] / vals[t1] if vals[t1] > 0 else math.inf
        bound = 0.95 if t1 >= 6.0 else 1.0
        ok = ratio <= bound if t1 >= 6.0 else ratio < bound
        records.append(ExperimentRecord(
            "limit_to_uniform_ratio", 0, t2, 0, ratio, 0.0, bound, ok, seed, 0.0))
    return records


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def record_csv_row(rec: ExperimentRecord) -> str:
    # wall time is measured, hence nondeterministic; the CSV column is pinned
    # to 0.0 so reruns with one seed/config are byte-identical
    return ",".join([
        rec.experiment, str(rec.n), _fmt(rec.t), str(rec.replicas),
        _fmt(rec.estimate), _fmt(rec.std_error), _fmt(rec.paper_bound),
        "true" if rec.bound_satisfied else "false", str(rec.seed), _fmt(0.0),
    ])


def write_records_csv(records, path) -> None:
    lines = [CSV_HEADER] + [record_csv_row(r) for r in records]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_config_json(config: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def all_bounds_satisfied(records) -> bool:
    return all(r.bound_satisfied for r in records)


def format_record(rec: ExperimentRecord) -> str:
    return (f"[{rec.experiment}] n={rec.n} t={rec.t:g} replicas={rec.replicas} "
            f"estimate={rec.estimate:.6g} se={rec.std_error:.3g} "
            f"bound={rec.paper_bound:.6g} "
            f"satisfied={'yes' if rec.bound_satisfied else 'NO'} "
            f"({rec.wall_time:.2f}s)")
