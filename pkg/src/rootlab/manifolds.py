"""Root sets of central polynomials as strata of points and spheres.

A central polynomial over an algebra of dimension d reduces to a real
auxiliary polynomial: each real auxiliary root is an isolated point on the
real axis, and each complex-conjugate pair a +- b i opens into the sphere
{a + b u : u unit imaginary} of dimension d - 2.  The module computes the
strata (via an Aberth-Ehrlich simultaneous root finder), samples them,
checks the cyclic symmetry of lacunary complex polynomials and orbit
invariance under automorphisms, and scans the Hausdorff dimension of a
deformation family across epsilon = 0.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .algebra import (
    COMPLEX,
    AlgebraElement,
    AlgebraTag,
    LinearMap,
)
from .poly import DAPolynomial, Deformation, jacobian_coords, potential


class RootFindingError(RuntimeError):
    """Simultaneous iteration failed to reach the residual target."""


@dataclass(frozen=True)
class IsolatedReal:
    """A root on the real axis."""

    value: float
    tag: AlgebraTag

    @property
    def dimension(self) -> int:
        return 0

    def as_element(self) -> AlgebraElement:
        c = np.zeros(self.tag.dimension)
        c[0] = self.value
        return AlgebraElement(self.tag, c)


@dataclass(frozen=True)
class IsolatedPoint:
    """A single non-real root."""

    point: AlgebraElement

    @property
    def tag(self) -> AlgebraTag:
        return self.point.tag

    @property
    def dimension(self) -> int:
        return 0


@dataclass(frozen=True)
class Sphere:
    """Stratum {re + radius * u : u unit imaginary}, dimension d - 2."""

    re: float
    radius: float
    tag: AlgebraTag

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")

    @property
    def dimension(self) -> int:
        return self.tag.dimension - 2


RootStratum = IsolatedReal | IsolatedPoint | Sphere


@dataclass(frozen=True)
class RootSet:
    strata: tuple[RootStratum, ...]
    hausdorff_dimension: int


def aberth_roots(coeffs, max_sweeps: int = tol.ABERTH_MAX_SWEEPS,
                 residual_target: float = tol.ABERTH_RESIDUAL) -> np.ndarray:
    """All roots of a complex-coefficient polynomial, simultaneous iteration.

    Coefficients are indexed by exponent.  Starts from a perturbed circle,
    applies Aberth-Ehrlich corrections until every residual |p(z_i)| falls
    below the (scale-adjusted) target, then runs a few Newton sweeps.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.size == 0 or c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    n = c.size - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    c = c / c[-1]
    # roots at zero split off exactly
    n_zero = 0
    while c[n_zero] == 0:
        n_zero += 1
    core = c[n_zero:]
    m = core.size - 1
    roots = np.zeros(n, dtype=complex)
    if m > 0:
        roots[n_zero:] = _aberth_core(core, max_sweeps, residual_target)
    return roots


def _aberth_core(c: np.ndarray, max_sweeps: int, residual_target: float) -> np.ndarray:
    n = c.size - 1
    cabs = np.abs(c)
    center = -c[n - 1] / n
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n + 0.4
    z = center + radius * np.exp(1j * angles)
    dc = c[1:] * np.arange(1, n + 1)
    for _ in range(max_sweeps):
        p = np.polyval(c[::-1], z)
        # backward-style criterion: residual relative to sum |c_k| |z|^k,
        # the only target reachable in floating point for large roots
        bound = np.polyval(cabs[::-1], np.abs(z))
        if np.max(np.abs(p) / bound) < residual_target:
            break
        dp = np.polyval(dc[::-1], z)
        dp = np.where(dp == 0, 1e-300, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        z = z - w / denom
    else:
        worst = float(np.max(np.abs(np.polyval(c[::-1], z))
                             / np.polyval(cabs[::-1], np.abs(z))))
        raise RootFindingError(
            f"no convergence after {max_sweeps} sweeps; worst relative residual {worst:.3e}"
        )
    # Newton sweeps tighten well-separated roots to machine precision
    for _ in range(3):
        p = np.polyval(c[::-1], z)
        dp = np.polyval(dc[::-1], z)
        step = np.where(dp != 0, p / np.where(dp == 0, 1, dp), 0)
        z_new = z - step
        improved = np.abs(np.polyval(c[::-1], z_new)) <= np.abs(p)
        z = np.where(improved, z_new, z)
    return z


def complex_roots_real_poly(coeffs) -> list[complex]:
    """Roots of a real-coefficient polynomial, conjugate-paired.

    Roots with relatively tiny imaginary part are snapped to the real
    axis; the rest are matched into a +- b i pairs and symmetrized.
    """
    c = np.asarray(coeffs, dtype=float)
    roots = aberth_roots(c.astype(complex))
    if roots.size == 0:
        return []
    pair_tol = tol.CONJUGATE_PAIR_REL * (1.0 + np.max(np.abs(roots)))
    reals = []
    complexes = []
    for z in roots:
        if abs(z.imag) <= pair_tol:
            reals.append(complex(z.real, 0.0))
        else:
            complexes.append(z)
    upper = sorted((z for z in complexes if z.imag > 0), key=lambda z: (z.real, z.imag))
    lower = sorted((z for z in complexes if z.imag < 0), key=lambda z: (z.real, -z.imag))
    if len(upper) != len(lower):
        raise RootFindingError("conjugate pairing failed for real-coefficient input")
    paired: list[complex] = []
    for zu, zl in zip(upper, lower):
        if abs(zu - zl.conjugate()) > 1e4 * pair_tol:
            raise RootFindingError("conjugate pairing failed for real-coefficient input")
        z = 0.5 * (zu + zl.conjugate())
        paired.extend([z, z.conjugate()])
    return reals + paired


def central_root_set(P: DAPolynomial) -> RootSet:
    """Strata of a central polynomial over an algebra of dimension >= 2."""
    if not P.is_central:
        raise ValueError("central_root_set requires a central polynomial")
    if P.tag.dimension < 2:
        raise ValueError("root strata need an algebra of dimension >= 2")
    if P.is_zero:
        raise ValueError("zero polynomial has no meaningful root set")
    aux = [c.real for c in P.coefficients]
    roots = complex_roots_real_poly(aux)
    strata: list[RootStratum] = []
    seen: list[complex] = []
    dedup = 1e-9 * (1.0 + max((abs(z) for z in roots), default=0.0))
    for z in roots:
        if any(abs(z - w) <= dedup for w in seen):
            continue
        seen.append(z)
        if z.imag == 0.0:
            strata.append(IsolatedReal(z.real, P.tag))
        elif z.imag > 0.0:
            strata.append(Sphere(re=z.real, radius=z.imag, tag=P.tag))
    dim = max((s.dimension for s in strata), default=0)
    return RootSet(tuple(strata), dim)


def sample_stratum(stratum: RootStratum, n: int, seed_or_rng) -> list[AlgebraElement]:
    """n points of a stratum; spheres are sampled uniformly."""
    if n < 1:
        raise ValueError("need n >= 1 samples")
    rng = _as_rng(seed_or_rng)
    if isinstance(stratum, IsolatedReal):
        return [stratum.as_element()] * n
    if isinstance(stratum, IsolatedPoint):
        return [stratum.point] * n
    d = stratum.tag.dimension
    g = rng.normal(size=(n, d - 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    out = []
    for row in g:
        c = np.zeros(d)
        c[0] = stratum.re
        c[1:] = stratum.radius * row
        out.append(AlgebraElement(stratum.tag, c))
    return out


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass(frozen=True)
class CdSymmetryReport:
    order: int
    n_roots: int
    max_mismatch: float
    passed: bool


def cd_symmetry_check(P: DAPolynomial) -> CdSymmetryReport:
    """Rotate the roots of a complex polynomial by 2 pi / d.

    d is the gcd of the exponents carrying nonzero coefficients; rotation
    by that angle must permute the root set.
    """
    if P.tag != COMPLEX:
        raise ValueError("cyclic symmetry check runs over the complex numbers")
    d = max(P.lacunary_gcd, 1)
    coeffs = [complex(c.coords[0], c.coords[1]) for c in P.coefficients]
    roots = aberth_roots(coeffs)
    if roots.size == 0:
        return CdSymmetryReport(d, 0, 0.0, True)
    omega = cmath.exp(2j * cmath.pi / d)
    rotated = roots * omega
    dist = np.abs(rotated[:, None] - roots[None, :])
    mismatch = float(np.max(np.min(dist, axis=1)))
    threshold = tol.CD_ROTATION_MATCH * (1.0 + float(np.max(np.abs(roots))))
    return CdSymmetryReport(d, roots.size, mismatch, mismatch <= threshold)


def orbit_invariance_check(P: DAPolynomial, g: LinearMap, x: AlgebraElement,
                           rng: np.random.Generator | None = None) -> float:
    """Potential of P at g(x); near zero when the orbit of a root stays a root."""
    if potential(P, x) >= 1e-16:
        raise ValueError("x must be a root to high accuracy")
    if not g.is_automorphism(rng):
        raise ValueError("g does not satisfy the automorphism invariants")
    return potential(P, g.apply(x))


@dataclass(frozen=True)
class RankResult:
    rank: int
    ambiguous: bool


def numerical_rank(matrix: np.ndarray,
                   rel_cutoff: float = tol.RANK_REL_CUTOFF) -> RankResult:
    """Rank by SVD with a relative cutoff; flags near-threshold spectra."""
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return RankResult(0, False)
    cut = rel_cutoff * s[0]
    rank = int(np.sum(s > cut))
    ambiguous = bool(np.any((s > 0.1 * cut) & (s < 10.0 * cut)))
    return RankResult(rank, ambiguous)


@dataclass(frozen=True)
class DimensionScanRow:
    epsilon: float
    dimension: int
    n_roots: int
    flagged: bool
    note: str


def hausdorff_dimension_scan(D: Deformation, epsilons,
                             seed: int = 0) -> list[DimensionScanRow]:
    """Dimension of the root set along a deformation family.

    epsilon = 0 reads the strata of the central base directly; elsewhere
    isolated roots are located by multistart gradient flow plus Newton
    (64 starts on the base strata, 16 Gaussian) and the dimension is 0
    when every root is isolated with a clean full-rank Jacobian.
    """
    from . import flow as _flow  # deferred: flow builds on this module

    base_set = central_root_set(D.base)
    if not any(isinstance(s, Sphere) for s in base_set.strata):
        raise ValueError("scan expects a base with a non-real stratum")
    rows = []
    for eps in epsilons:
        eps = float(eps)
        if eps == 0.0:
            rows.append(DimensionScanRow(0.0, base_set.hausdorff_dimension,
                                         len(base_set.strata), False, "central"))
            continue
        P = D.at(eps)
        rng = np.random.default_rng(seed)
        starts = []
        strata = list(base_set.strata)
        per = max(1, 64 // len(strata))
        for s in strata:
            starts.extend(p.coords for p in sample_stratum(s, per, rng))
        starts.extend(rng.normal(scale=1.5, size=(16, P.tag.dimension)))
        roots = _flow.attractors_from_starts(P, starts)
        flagged = False
        note = ""
        if not roots:
            note = "no isolated roots found"
            rows.append(DimensionScanRow(eps, P.tag.dimension - 2, 0, True, note))
            continue
        pts = np.stack([r.coords for r in roots])
        isolated = True
        for i, r in enumerate(roots):
            rk = numerical_rank(jacobian_coords(P, r.coords))
            if rk.ambiguous:
                flagged = True
                note = "rank near threshold"
            if rk.rank < P.tag.dimension:
                isolated = False
        if len(roots) > 1:
            dists = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
            np.fill_diagonal(dists, np.inf)
            if np.min(dists) <= tol.ISOLATED_SEPARATION:
                isolated = False
        dim = 0 if isolated else P.tag.dimension - 2
        rows.append(DimensionScanRow(eps, dim, len(roots), flagged, note))
    return rows
