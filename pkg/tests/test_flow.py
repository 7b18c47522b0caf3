"""Gradient-flow integration, attractors, collapse scaling, basins."""

import json

import numpy as np
import pytest

from rootlab import flow as fl
from rootlab.algebra import QUATERNIONS, element, real_element
from rootlab.flow import (
    FlowConfig,
    basin_decomposition,
    collapse_time,
    ensemble_labels,
    find_attractors,
    integrate,
    measure_collapse,
    restricted_potential_scan,
    retract_check,
    scaling_fit,
)
from rootlab.poly import DAPolynomial, Deformation, potential

BETA = (np.sqrt(5.0) - 1.0) / 2.0


def benchmark(tag=QUATERNIONS):
    base = DAPolynomial.from_real(tag, [1, 0, 1])
    direction = DAPolynomial.from_coords(tag, [[1, 0, 0, 0], [0, 1, 0, 0]])
    return Deformation(base, direction)


def canonical(tag=QUATERNIONS):
    return DAPolynomial.from_coords(tag, [[1, 0, 0, 0], [0, 1, 0, 0], [1, 0, 0, 0]])


def test_integrate_from_root_stops_immediately():
    P = canonical()
    root = element(QUATERNIONS, [0, BETA, 0, 0])
    traj = integrate(P, root)
    assert traj.terminal.kind == "converged"
    assert traj.times.size == 1
    assert np.allclose(traj.final_point, root.coords)


def test_real_axis_flow_matches_euler_reduction():
    # on the real axis the flow of x^2 + 1 reduces to xdot = -4 x (x^2 + 1)
    P = DAPolynomial.from_real(QUATERNIONS, [1, 0, 1])
    x0 = 1.5
    traj = integrate(P, real_element(QUATERNIONS, x0),
                     FlowConfig(max_time=1.0, stop_grad=1e-16))
    assert np.max(np.abs(traj.points[:, 1:])) < 1e-13
    dt = 1e-5
    n = int(1.0 / dt) + 1
    euler = np.empty(n)
    euler[0] = x0
    for i in range(1, n):
        x = euler[i - 1]
        euler[i] = x + dt * (-4.0 * x * (x * x + 1.0))
    worst = 0.0
    for t, pt in zip(traj.times, traj.points):
        k = int(round(t / dt))
        if k < n:
            worst = max(worst, abs(pt[0] - euler[k]))
    assert worst < 1e-4


def test_potential_monotone_along_trajectory():
    P = canonical()
    traj = integrate(P, element(QUATERNIONS, [0.5, -0.8, 1.1, 0.3]),
                     FlowConfig(max_time=1e3))
    v0 = traj.potentials[0]
    assert np.all(np.diff(traj.potentials) <= 1e-12 * max(v0, 1.0))


def test_integrate_max_time_terminal():
    P = DAPolynomial.from_real(QUATERNIONS, [1, 0, 1])
    traj = integrate(P, real_element(QUATERNIONS, 2.0),
                     FlowConfig(max_time=1e-4, stop_grad=1e-18))
    assert traj.terminal.kind == "max_time"


def test_find_attractors_benchmark():
    D = benchmark()
    att = find_attractors(D.at(0.5), 16, seed=1)
    assert len(att) == 2
    pts = sorted([a.coords for a in att], key=lambda c: c[1])
    assert np.allclose(pts[0], [0, -1.5, 0, 0], atol=1e-8)
    assert np.allclose(pts[1], [0, 1.0, 0, 0], atol=1e-8)


def test_find_attractors_canonical_roots():
    att = find_attractors(canonical(), 16, seed=2)
    assert len(att) == 2
    vals = sorted(a.coords[1] for a in att)
    assert vals[0] == pytest.approx(-(np.sqrt(5) + 1) / 2, abs=1e-9)
    assert vals[1] == pytest.approx(BETA, abs=1e-9)
    for a in att:
        assert potential(canonical(), a) < 1e-28


def test_find_attractors_central_returns_empty():
    P = DAPolynomial.from_real(QUATERNIONS, [1, 0, 1])
    assert find_attractors(P, 8, seed=3) == []


def test_collapse_time_quartering_and_sign_flip():
    D = benchmark()
    t1 = collapse_time(D, 0.1, seed=3)
    t2 = collapse_time(D, 0.05, seed=3)
    assert not t1.censored and not t2.censored
    assert 3.6 <= t2.time / t1.time <= 4.4
    # the restricted potential is even in the perturbation sign, so the
    # timescale (and here the reached attractor) is unchanged
    t3 = collapse_time(Deformation(D.base, _negate(D.direction)), 0.1, seed=3)
    assert t3.time == pytest.approx(t1.time, rel=0.05)
    assert t3.attractor.coords[1] == pytest.approx(t1.attractor.coords[1], abs=0.05)


def _negate(P):
    return DAPolynomial(P.tag, tuple(-1.0 * c for c in P.coefficients))


def test_sign_flip_mirrors_roots_of_odd_direction():
    # for a parity-odd perturbation the root set mirrors under the flip
    tag = QUATERNIONS
    pos = sorted(a.coords[1] for a in find_attractors(
        DAPolynomial.from_coords(tag, [[1, 0, 0, 0], [0, 0.5, 0, 0],
                                       [1, 0, 0, 0]]), 12, seed=3))
    neg = sorted(a.coords[1] for a in find_attractors(
        DAPolynomial.from_coords(tag, [[1, 0, 0, 0], [0, -0.5, 0, 0],
                                       [1, 0, 0, 0]]), 12, seed=3))
    assert len(pos) == 2 and len(neg) == 2
    assert np.allclose(pos, sorted(-v for v in neg), atol=1e-9)


def test_collapse_time_insensitive_to_tolerances():
    D = benchmark()
    loose = collapse_time(D, 0.05, FlowConfig(max_time=5e7), seed=4)
    tight = collapse_time(D, 0.05, FlowConfig(rel_tol=5e-10, abs_tol=5e-13,
                                              max_time=5e7), seed=4)
    assert tight.time == pytest.approx(loose.time, rel=1e-3)


def test_scaling_fit_synthetic():
    eps = np.geomspace(0.01, 0.1, 5)
    slope, intercept, r2 = scaling_fit(eps, 3.0 / eps ** 2)
    assert slope == pytest.approx(-2.0, abs=1e-12)
    assert np.exp(intercept) == pytest.approx(3.0)
    assert r2 == pytest.approx(1.0)
    slope1, _, _ = scaling_fit(eps, 3.0 / eps)
    assert slope1 == pytest.approx(-1.0, abs=1e-12)


def test_scaling_fit_preconditions():
    with pytest.raises(ValueError):
        scaling_fit([0.01, 0.02, 0.04], [1, 2, 3])
    with pytest.raises(ValueError):
        scaling_fit([0.01, 0.02, 0.04, 0.05], [1, 2, 3, 4])


def test_measure_collapse_slope_short():
    D = benchmark()
    m = measure_collapse(D, np.geomspace(0.02, 0.2, 4), seed=5)
    assert -2.15 <= m.fit_slope <= -1.85
    assert m.r_squared > 0.99


def test_restricted_potential_values_and_scaling():
    D = benchmark()
    eps = 0.07
    # south pole of the unit sphere: value 4 eps^2 exactly
    south = element(QUATERNIONS, [0, -1, 0, 0])
    assert potential(D.at(eps), south) == pytest.approx(4 * eps ** 2, rel=1e-12)
    scan = restricted_potential_scan(D, eps, n_points=20, seed=6)
    assert np.allclose(2.0 ** scan.exponents, 4.0, rtol=1e-6)
    # minimum sits near the north pole, maximum near the south pole
    assert scan.min_point[1] > 0.5
    assert scan.max_point[1] < -0.5
    zero = restricted_potential_scan(D, 0.0, n_points=5, seed=6)
    assert np.max(zero.values) < 1e-30


def test_hemisphere_examples_and_equator_flag():
    D = benchmark()
    eps = 0.3
    P = D.at(eps)
    att = find_attractors(P, 12, seed=7)
    north = np.array([0.0, np.cos(np.pi / 4), np.sin(np.pi / 4), 0.0])
    south = np.array([0.0, np.cos(3 * np.pi / 4), np.sin(3 * np.pi / 4), 0.0])
    for start, sign in ((north, 1.0), (south, -1.0)):
        traj = integrate(P, start, FlowConfig(max_time=1e4), attractors=att)
        idx = traj.terminal.attractor_index
        assert idx is not None
        assert np.sign(att[idx].coords[1]) == sign
    rep = basin_decomposition(D, eps, 64, seed=7)
    equator_like = np.abs(rep.starts[:, 1]) <= fl.EQUATOR_BAND
    assert np.array_equal(rep.band_mask, equator_like)


def test_ensemble_labels_agree_with_adaptive_integrator():
    D = benchmark()
    eps = 0.2
    P = D.at(eps)
    att = find_attractors(P, 12, seed=8)
    rng = np.random.default_rng(8)
    from rootlab.manifolds import central_root_set, sample_stratum
    sphere = central_root_set(D.base).strata[0]
    starts = np.stack([s.coords for s in sample_stratum(sphere, 12, rng)])
    labels, _ = ensemble_labels(P, starts, att, max_time=1e4)
    for i, s in enumerate(starts):
        traj = integrate(P, s, FlowConfig(max_time=1e4), attractors=att)
        assert traj.terminal.attractor_index == labels[i]


def test_retract_check_captures_everything():
    D = benchmark()
    rep = retract_check(D, 0.3, 80, seed=9, off_manifold=20)
    assert rep.all_captured
    assert rep.captured >= 95
    assert rep.max_potential_increase <= 1e-10


def test_retract_check_static_at_zero():
    D = benchmark()
    rep = retract_check(D, 0.0, 30, seed=10)
    assert rep.all_captured
    assert rep.max_potential_increase < 1e-6   # displacement, not potential


def test_trajectory_csv_and_measurement_json(tmp_path):
    P = canonical()
    traj = integrate(P, element(QUATERNIONS, [0.4, 0.2, -0.3, 0.1]),
                     FlowConfig(max_time=50.0))
    path = tmp_path / "traj.csv"
    fl.trajectory_to_csv(traj, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,x0,x1,x2,x3,V"
    assert len(lines) == 1 + traj.times.size

    D = benchmark()
    m = measure_collapse(D, np.geomspace(0.05, 0.5, 4), seed=11)
    jpath = tmp_path / "m.json"
    fl.measurement_to_json(m, jpath)
    data = json.loads(jpath.read_text())
    assert set(data) == {"epsilons", "times", "slope", "intercept", "r2"}
    assert len(data["times"]) == 4
