"""Gradient flow on the potential landscape and collapse measurements.

The flow x' = -grad ||P(x)||^2 is integrated with an embedded
Dormand-Prince 5(4) pair; the potential is enforced to be non-increasing
along accepted steps.  On top of the integrator: multistart attractor
search with Newton polishing, collapse-time measurement from a fixed
geodesic start angle, the log-log scaling fit of collapse time against
perturbation size, basin decomposition of the initial sphere, restricted
potential scans, and a retract check that every started trajectory is
captured by an attractor.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import tolerances as tol
from .algebra import AlgebraElement, AlgebraTag
from .manifolds import (
    Sphere,
    central_root_set,
    numerical_rank,
    sample_stratum,
)
from .poly import (
    DAPolynomial,
    Deformation,
    evaluate_coords,
    gradient_coords_batch,
    jacobian_coords,
    newton_polish,
    potential_coords,
    value_gradient_fn,
)


@dataclass(frozen=True)
class FlowConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_time: float = 1e7
    stop_grad: float = 1e-9
    stop_radius: float = 0.05
    max_steps: int = 5_000_000
    record_every: int = 1          # archive every k-th accepted sample

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "max_time", "stop_grad", "stop_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class Terminal:
    kind: str                      # converged | max_time | stalled
    attractor_index: int | None = None
    detail: str = ""


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray             # (n, d)
    potentials: np.ndarray
    terminal: Terminal

    @property
    def final_point(self) -> np.ndarray:
        return self.points[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def integrate(P: DAPolynomial, x0, cfg: FlowConfig | None = None,
              attractors=None) -> Trajectory:
    """Integrate the gradient flow from x0.

    Stops when the gradient norm drops below ``cfg.stop_grad``, when the
    state enters ``cfg.stop_radius`` of one of the supplied attractors, or
    at ``cfg.max_time``.  Accepted steps keep the potential non-increasing
    (up to a relative slack); repeated failures report a stalled terminal.
    """
    cfg = cfg or FlowConfig()
    y = np.array(x0.coords if isinstance(x0, AlgebraElement) else x0, dtype=float)
    att = None
    if attractors:
        att = np.stack([a.coords if isinstance(a, AlgebraElement) else np.asarray(a)
                        for a in attractors])

    val_grad = value_gradient_fn(P)

    def rhs(v: np.ndarray) -> np.ndarray:
        return -val_grad(v)[1]

    t = 0.0
    pv, g = val_grad(y)
    f = -g
    v0 = float(pv @ pv)
    slack = tol.LYAPUNOV_SLACK_REL * max(v0, 1.0e-300)
    times = [t]
    points = [y.copy()]
    pots = [v0]
    v_prev = v0

    gnorm = float(np.linalg.norm(f))
    terminal = None
    idx = _capture_index(y, att, cfg.stop_radius)
    if gnorm < cfg.stop_grad or idx is not None:
        terminal = Terminal("converged", idx, "stopped at start")
    h = _initial_step(y, f, cfg)
    n_stages = 7
    k = np.zeros((n_stages, y.size))
    steps = 0
    accepted = 0
    lyapunov_fails = 0
    plateau = 0
    v_plateau_start = v0
    just_rejected = False
    h_limit = np.inf                # stability limiter learned from rejections
    since_reject = 0
    while terminal is None:
        if steps >= cfg.max_steps:
            terminal = Terminal("max_time", None, "step budget exhausted")
            break
        if t >= cfg.max_time:
            terminal = Terminal("max_time", None, "")
            break
        h = min(h, cfg.max_time - t)
        k[0] = f
        for i in range(1, n_stages - 1):
            yi = y + h * (_DP_A[i] @ k[:i])
            k[i] = rhs(yi)
        y5 = y + h * (_DP_A[6] @ k[:6])       # 5th-order solution (FSAL pair)
        pv_new, g_new = val_grad(y5)
        k[6] = -g_new
        y4 = y + h * (_DP_B4 @ k)
        err = y5 - y4
        sc = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err_norm = float(np.sqrt(np.mean((err / sc) ** 2)))
        steps += 1
        if err_norm <= 1.0:
            v_new = float(pv_new @ pv_new)
            if v_new > v_prev + slack:
                # accuracy says fine but the Lyapunov property failed: shrink
                lyapunov_fails += 1
                h *= 0.5
                just_rejected = True
                if h < 1e-14 * max(1.0, t) or lyapunov_fails > 60:
                    terminal = Terminal("stalled", None,
                                        f"step underflow at t={t:.6g}")
                    break
                continue
            lyapunov_fails = 0
            # plateau guard: along the flow dV/dt = -|grad V|^2, so accepted
            # steps that stop delivering a fraction of h |g|^2 while V no
            # longer moves have hit the integrator's accuracy floor
            if v_prev - v_new < 0.25 * h * gnorm * gnorm:
                if plateau == 0:
                    v_plateau_start = v_prev
                plateau += 1
            else:
                plateau = 0
            t += h
            y = y5
            f = k[6]                           # FSAL: stage 7 is rhs(y5)
            v_prev = v_new
            accepted += 1
            if accepted % cfg.record_every == 0:
                times.append(t)
                points.append(y.copy())
                pots.append(v_new)
            gnorm = float(np.linalg.norm(f))
            idx = _capture_index(y, att, cfg.stop_radius)
            if idx is not None:
                terminal = Terminal("converged", idx, "captured")
                break
            if gnorm < cfg.stop_grad:
                terminal = Terminal("converged", None, "gradient below threshold")
                break
            if plateau >= 25:
                if v_plateau_start - v_new <= 0.01 * v_plateau_start:
                    terminal = Terminal("converged", None, "potential plateau")
                    break
                plateau = 0
            grow = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
            if just_rejected:
                grow = min(grow, 1.0)
                just_rejected = False
            # two-rate limiter recovery: crawl near a live stability bound,
            # recover quickly once the stiff transient has passed
            since_reject += 1
            h_limit *= 1.05 if since_reject > 40 else 1.002
            h = min(h * min(5.0, max(0.2, grow)), h_limit)
        else:
            h_limit = 0.9 * h
            since_reject = 0
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            just_rejected = True
            if h < 1e-16:
                terminal = Terminal("stalled", None, "step underflow")
                break
    if times[-1] != t:
        times.append(t)
        points.append(y.copy())
        pots.append(v_prev)
    return Trajectory(np.asarray(times), np.stack(points), np.asarray(pots), terminal)


def _capture_index(y: np.ndarray, att: np.ndarray | None, radius: float):
    if att is None:
        return None
    d2 = np.sum((att - y) ** 2, axis=1)
    i = int(np.argmin(d2))
    return i if d2[i] < radius * radius else None


def _initial_step(y: np.ndarray, f: np.ndarray, cfg: FlowConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * float(np.max(np.abs(y)))
    fn = float(np.linalg.norm(f))
    if fn == 0.0:
        return 1e-6
    return max(1e-10, min(0.01 * (1.0 + float(np.linalg.norm(y))) / fn, 0.1))


def attractors_from_starts(P: DAPolynomial, starts,
                           cfg: FlowConfig | None = None) -> list[AlgebraElement]:
    """Flow each start to rest, Newton-polish, keep clean isolated roots.

    The flow only needs to deliver each start into a Newton basin, so the
    default gradient stop is loose; the residual and full-rank filters on
    the polished points carry the actual guarantee.
    """
    cfg = cfg or FlowConfig(stop_grad=1e-4, max_time=1e4)
    found: list[np.ndarray] = []
    for s in starts:
        s = np.asarray(s, dtype=float)
        traj = integrate(P, s, cfg)
        res = newton_polish(P, traj.final_point)
        if not res.converged or res.residual >= tol.NEWTON_RESIDUAL:
            continue
        rk = numerical_rank(jacobian_coords(P, res.point))
        if rk.rank < P.tag.dimension:
            continue
        if all(np.linalg.norm(res.point - q) > tol.ATTRACTOR_DEDUP for q in found):
            found.append(res.point)
    found.sort(key=lambda p: tuple(np.round(p, 9)))
    return [AlgebraElement(P.tag, p) for p in found]


def find_attractors(P: DAPolynomial, n_starts: int = 32, seed: int = 0,
                    cfg: FlowConfig | None = None,
                    start_scale: float = 1.5) -> list[AlgebraElement]:
    """Multistart gradient flow + Newton polish; deduplicated isolated roots.

    Central polynomials legitimately return an empty list: their minima
    form spheres, which the full-rank filter rejects.
    """
    rng = np.random.default_rng(seed)
    starts = rng.normal(scale=start_scale, size=(n_starts, P.tag.dimension))
    return attractors_from_starts(P, starts, cfg)


def _newton_attractors(P: DAPolynomial, D: Deformation, seed: int) -> list[AlgebraElement]:
    # Cheap attractor location for stiff small-epsilon flows: Newton from
    # restricted-potential extrema on the base sphere plus Gaussian starts.
    rng = np.random.default_rng(seed)
    sphere = _first_sphere(D)
    samples = sample_stratum(sphere, 128, rng)
    vals = [float(potential_coords(D.direction, s.coords)) for s in samples]
    order = np.argsort(vals)
    guesses = [samples[order[0]].coords, -samples[order[0]].coords,
               samples[order[-1]].coords, -samples[order[-1]].coords]
    guesses.extend(rng.normal(scale=1.5, size=(16, P.tag.dimension)))
    found: list[np.ndarray] = []
    for g in guesses:
        res = newton_polish(P, np.asarray(g, dtype=float))
        if not res.converged or res.residual >= tol.NEWTON_RESIDUAL:
            continue
        if numerical_rank(jacobian_coords(P, res.point)).rank < P.tag.dimension:
            continue
        if all(np.linalg.norm(res.point - q) > tol.ATTRACTOR_DEDUP for q in found):
            found.append(res.point)
    found.sort(key=lambda p: tuple(np.round(p, 9)))
    return [AlgebraElement(P.tag, p) for p in found]


def _first_sphere(D: Deformation) -> Sphere:
    for s in central_root_set(D.base).strata:
        if isinstance(s, Sphere):
            return s
    raise ValueError("deformation base has no sphere stratum")


def _attracting_axis(D: Deformation, rng: np.random.Generator,
                     n_probe: int = 256) -> tuple[Sphere, np.ndarray]:
    """Unit imaginary direction of the restricted-potential minimizer."""
    sphere = _first_sphere(D)
    samples = sample_stratum(sphere, n_probe, rng)
    vals = [float(potential_coords(D.direction, s.coords)) for s in samples]
    u = samples[int(np.argmin(vals))].coords.copy()
    u[0] = 0.0
    u /= np.linalg.norm(u)
    return sphere, u


def _axis_from_attractors(attractors, sphere: Sphere) -> np.ndarray:
    """Imaginary direction of the attractor the sphere collapses onto.

    The attractor closest to the original sphere pins the separatrix
    orientation exactly, unlike a sampled restricted-potential minimizer.
    """
    center = np.zeros(attractors[0].tag.dimension)
    center[0] = sphere.re
    best = min(attractors,
               key=lambda a: abs(float(np.linalg.norm(a.coords - center))
                                 - sphere.radius))
    u = best.coords.copy()
    u[0] = 0.0
    n = np.linalg.norm(u)
    if n == 0.0:
        raise RuntimeError("attractor has no imaginary part; no axis defined")
    return u / n


@dataclass(frozen=True)
class CollapseSample:
    epsilon: float
    time: float
    censored: bool
    attractor: AlgebraElement | None
    start: np.ndarray


def collapse_time(D: Deformation, eps: float, cfg: FlowConfig | None = None,
                  seed: int = 0, phi0: float = math.pi / 3) -> CollapseSample:
    """Time for a sphere start at geodesic angle phi0 to reach an attractor.

    The attracting axis is located as the restricted-potential minimizer
    over stratum samples; the start sits at angle phi0 from it along a
    deterministic transverse direction.  Collapse time is the first
    integration time within ``cfg.stop_radius`` of the nearest attractor.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    cfg = cfg or FlowConfig(max_time=5e7, record_every=64)
    P = D.at(eps)
    rng = np.random.default_rng(seed)
    sphere, u_min = _attracting_axis(D, rng)
    # transverse unit imaginary direction, deterministic given the seed
    w = np.zeros_like(u_min)
    w[1:] = rng.normal(size=w.size - 1)
    w -= np.dot(w, u_min) * u_min
    w[0] = 0.0
    w /= np.linalg.norm(w)
    x0 = np.zeros(P.tag.dimension)
    x0[0] = sphere.re
    x0 += sphere.radius * (math.cos(phi0) * u_min + math.sin(phi0) * w)
    attractors = _newton_attractors(P, D, seed)
    if not attractors:
        raise RuntimeError(f"no attractors found at eps={eps}")
    traj = integrate(P, x0, cfg, attractors=attractors)
    censored = traj.terminal.kind != "converged"
    idx = traj.terminal.attractor_index
    att = attractors[idx] if idx is not None else None
    return CollapseSample(eps, traj.final_time, censored, att, x0)


@dataclass(frozen=True)
class CollapseMeasurement:
    epsilons: np.ndarray
    times: np.ndarray
    censored: np.ndarray
    fit_slope: float
    fit_intercept: float
    r_squared: float


def _collapse_worker(payload) -> tuple[float, float, bool]:
    dim, base_rows, dir_rows, eps, seed, cfg_fields = payload
    tag = AlgebraTag(dim)
    D = Deformation(DAPolynomial.from_coords(tag, base_rows),
                    DAPolynomial.from_coords(tag, dir_rows))
    cfg = FlowConfig(**cfg_fields) if cfg_fields else None
    s = collapse_time(D, eps, cfg, seed)
    return s.epsilon, s.time, s.censored


def measure_collapse(D: Deformation, epsilons, cfg: FlowConfig | None = None,
                     seed: int = 0, workers: int | None = None) -> CollapseMeasurement:
    """Collapse times over an epsilon list plus the log-log fit.

    The per-epsilon runs are independent and deterministic given the seed,
    so they distribute over a process pool (slowest run first); results
    merge in epsilon order regardless of completion order.
    """
    eps = np.sort(np.asarray(list(epsilons), dtype=float))
    if np.any(eps <= 0):
        raise ValueError("epsilons must be positive")
    if workers is None:
        workers = min(eps.size, os.cpu_count() or 1)
    cfg_fields = None
    if cfg is not None:
        cfg_fields = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if workers > 1:
        payloads = [(D.base.tag.dimension, D.base.to_coords(),
                     D.direction.to_coords(), float(e), seed, cfg_fields)
                    for e in eps]          # ascending eps: slowest job first
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_collapse_worker, payloads))
        by_eps = {r[0]: r for r in rows}
        times = np.array([by_eps[float(e)][1] for e in eps])
        censored = np.array([by_eps[float(e)][2] for e in eps])
    else:
        samples = [collapse_time(D, e, cfg, seed) for e in eps]
        times = np.array([s.time for s in samples])
        censored = np.array([s.censored for s in samples])
    if np.any(censored):
        warnings.warn("censored collapse measurements excluded from fit")
    slope, intercept, r2 = scaling_fit(eps[~censored], times[~censored])
    return CollapseMeasurement(eps, times, censored, slope, intercept, r2)


def scaling_fit(epsilons, times) -> tuple[float, float, float]:
    """Least squares of log T against log eps -> (slope, intercept, r^2)."""
    eps = np.asarray(epsilons, dtype=float)
    t = np.asarray(times, dtype=float)
    if eps.size < 4:
        raise ValueError("need at least 4 uncensored (eps, T) pairs")
    if np.max(eps) / np.min(eps) < 10.0 * (1.0 - 1e-12):
        raise ValueError("epsilon range must span at least one decade")
    lx = np.log(eps)
    ly = np.log(t)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    fit = A @ np.array([slope, intercept])
    ss_res = float(np.sum((ly - fit) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass
class BasinReport:
    starts: np.ndarray
    labels: np.ndarray             # attractor index, -1 if unconverged
    attractors: list[AlgebraElement]
    axis: np.ndarray               # unit imaginary reference direction
    fractions: dict[int, float]
    band_mask: np.ndarray          # True where |axis component| <= band
    max_residual: float
    unconverged: list[int]


EQUATOR_BAND = 0.05


def ensemble_labels(P: DAPolynomial, starts: np.ndarray, attractors,
                    capture_radius: float = 0.05, h: float = 0.25,
                    max_time: float = 1e5) -> tuple[np.ndarray, np.ndarray]:
    """Capture labels for a batch of starts, integrated in lockstep.

    Fixed-step classical Runge-Kutta on the whole ensemble; a row freezes
    as soon as it enters the capture radius of an attractor.  Labels agree
    with per-trajectory adaptive integration (checked in tests) at a small
    fraction of the cost.  Returns (labels, final points); -1 marks rows
    still free at max_time.
    """
    X = np.array(starts, dtype=float)
    n = X.shape[0]
    att = np.stack([a.coords if isinstance(a, AlgebraElement) else np.asarray(a)
                    for a in attractors])
    labels = np.full(n, -1, dtype=int)
    active = np.ones(n, dtype=bool)

    def check_capture() -> None:
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return
        d2 = np.sum((X[idx, None, :] - att[None, :, :]) ** 2, axis=-1)
        nearest = np.argmin(d2, axis=1)
        hit = d2[np.arange(idx.size), nearest] < capture_radius ** 2
        labels[idx[hit]] = nearest[hit]
        active[idx[hit]] = False

    check_capture()
    t = 0.0
    while t < max_time and np.any(active):
        Y = X[active]
        k1 = -gradient_coords_batch(P, Y)
        k2 = -gradient_coords_batch(P, Y + 0.5 * h * k1)
        k3 = -gradient_coords_batch(P, Y + 0.5 * h * k2)
        k4 = -gradient_coords_batch(P, Y + h * k3)
        X[active] = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        check_capture()
    return labels, X


def basin_decomposition(D: Deformation, eps: float, n_samples: int,
                        seed: int = 0, cfg: FlowConfig | None = None) -> BasinReport:
    """Label sphere starts by the attractor that captures them."""
    P = D.at(eps)
    attractors = find_attractors(P, 16, seed)
    if not attractors:
        raise RuntimeError("basin decomposition needs a nonempty attractor list")
    cfg = cfg or FlowConfig(max_time=max(1e4, 400.0 / eps ** 2))
    rng = np.random.default_rng(seed)
    sphere = _first_sphere(D)
    axis = _axis_from_attractors(attractors, sphere)
    starts = sample_stratum(sphere, n_samples, rng)
    X0 = np.stack([s.coords for s in starts])
    unit = X0 / np.maximum(np.linalg.norm(X0, axis=1, keepdims=True), 1e-300)
    band = np.abs(unit @ axis) <= EQUATOR_BAND
    labels, finals = ensemble_labels(P, X0, attractors,
                                     capture_radius=cfg.stop_radius,
                                     max_time=cfg.max_time)
    captured = labels >= 0
    max_res = 0.0
    if np.any(captured):
        res = np.linalg.norm(evaluate_coords(P, finals[captured]), axis=1)
        max_res = float(np.max(res))
    unconverged = list(np.flatnonzero(~captured))
    fractions = {
        j: float(np.mean(labels == j)) for j in range(len(attractors))
    }
    return BasinReport(X0, labels, attractors, axis, fractions, band,
                       max_res, unconverged)


@dataclass(frozen=True)
class RestrictedScan:
    points: np.ndarray             # (n, d) stratum samples
    values: np.ndarray             # potential at scan epsilon
    exponents: np.ndarray          # log2 f(2 eps) / f(eps) per point
    min_point: np.ndarray
    max_point: np.ndarray


def restricted_potential_scan(D: Deformation, eps: float, n_points: int = 20,
                              seed: int = 0) -> RestrictedScan:
    """Potential of the deformed polynomial on base-stratum samples.

    Reports per-point values, the growth exponent from doubling epsilon,
    and the extremal sample points (the Morse data of the restriction).
    """
    rng = np.random.default_rng(seed)
    sphere = _first_sphere(D)
    pts = np.stack([s.coords for s in sample_stratum(sphere, n_points, rng)])
    f1 = potential_coords(D.at(eps), pts)
    if eps == 0.0:
        return RestrictedScan(pts, f1, np.full(n_points, np.nan),
                              pts[0], pts[0])
    f2 = potential_coords(D.at(2.0 * eps), pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = np.log2(f2 / f1)
    return RestrictedScan(pts, f1, expo,
                          pts[int(np.argmin(f1))], pts[int(np.argmax(f1))])


@dataclass(frozen=True)
class RetractReport:
    total: int
    captured: int
    excluded_band: int
    max_potential_increase: float
    all_captured: bool


def retract_check(D: Deformation, eps: float, n_samples: int,
                  seed: int = 0, cfg: FlowConfig | None = None,
                  off_manifold: int = 0) -> RetractReport:
    """Every non-separatrix start must be captured by some attractor.

    Also records the worst potential increase seen along any trajectory
    (monotonicity evidence).  A trajectory that leaves a large ball raises:
    the potential is coercive, so divergence indicates a bug.
    """
    P = D.at(eps)
    rng = np.random.default_rng(seed)
    if eps == 0.0:
        sphere = _first_sphere(D)
        starts = [s.coords for s in sample_stratum(sphere, n_samples, rng)]
        # already minima: verify nothing moves
        max_disp = 0.0
        for s in starts:
            traj = integrate(P, s, cfg or FlowConfig(max_time=10.0))
            max_disp = max(max_disp, float(np.linalg.norm(traj.final_point - s)))
        return RetractReport(len(starts), len(starts), 0, max_disp, True)
    attractors = find_attractors(P, 16, seed)
    cfg = cfg or FlowConfig(max_time=max(1e4, 200.0 / eps ** 2))
    sphere = _first_sphere(D)
    axis = _axis_from_attractors(attractors, sphere)
    starts = [s.coords for s in sample_stratum(sphere, n_samples, rng)]
    if off_manifold > 0:
        starts.extend(rng.normal(scale=2.0, size=(off_manifold, P.tag.dimension)))
    bound = 10.0 * (1.0 + max(a.norm() for a in attractors))
    captured = 0
    excluded = 0
    max_increase = 0.0
    for i, s in enumerate(starts):
        in_band = False
        if i < n_samples:
            unit = s / max(np.linalg.norm(s), 1e-300)
            in_band = abs(float(np.dot(unit, axis))) <= EQUATOR_BAND
        traj = integrate(P, s, cfg, attractors=attractors)
        if float(np.max(np.linalg.norm(traj.points, axis=1))) > bound:
            raise RuntimeError("diverging trajectory: coercivity violated")
        increase = float(np.max(traj.potentials - traj.potentials[0]))
        max_increase = max(max_increase, increase)
        if traj.terminal.kind == "converged" and traj.terminal.attractor_index is not None:
            captured += 1
        elif in_band:
            excluded += 1
    total = len(starts)
    return RetractReport(total, captured, excluded, max_increase,
                         captured + excluded == total)


def trajectory_to_csv(traj: Trajectory, path) -> None:
    d = traj.points.shape[1]
    header = "t," + ",".join(f"x{i}" for i in range(d)) + ",V"
    rows = [header]
    for t, x, v in zip(traj.times, traj.points, traj.potentials):
        rows.append(f"{t:.12g}," + ",".join(f"{c:.12g}" for c in x) + f",{v:.12g}")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def measurement_to_json(m: CollapseMeasurement, path) -> None:
    payload = {
        "epsilons": [float(e) for e in m.epsilons],
        "times": [float(t) for t in m.times],
        "slope": m.fit_slope,
        "intercept": m.fit_intercept,
        "r2": m.r_squared,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
