"""Differential identities of homogeneous and scaling-invariant fields.

Euler's identity alpha p(x) = grad p(x) . x for positively homogeneous p, its
generalization grad f(x) . x = alpha phi'(p(x)) p(x) through a decomposition,
constancy of grad f(z) . z on level sets, the paired-level solver for the
Gaussian bump (two distinct levels sharing one grad f . z value), saddle-shell
verification, and positive-gradient neighborhood certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .decomposition import Decomposition
from .field import GradientSpec, ScalarField
from .levelsets import ray_level_radius
from .rays import SamplingPlan, classify_ray


@dataclass
class EulerReport:
    """Residuals of a homogeneity identity over seeded samples."""

    max_residual: float
    residuals: np.ndarray
    alpha: float
    grad_mode: str  # "analytic" | "central-difference"
    h: float
    n_samples: int
    excluded: int
    seed: int
    notes: dict = dataclass_field(default_factory=dict)

    def to_dict(self) -> dict:
        finite = self.residuals[np.isfinite(self.residuals)]
        return {"max_residual": self.max_residual,
                "mean_residual": float(finite.mean()) if finite.size else np.nan,
                "alpha": self.alpha, "grad_mode": self.grad_mode, "h": self.h,
                "n_samples": self.n_samples, "excluded": self.excluded,
                "seed": self.seed, "notes": self.notes}


def _grad_mode(field: ScalarField, spec: Optional[GradientSpec]) -> str:
    spec = spec or GradientSpec()
    if field.has_analytic_gradient and not spec.force_numerical:
        return "analytic"
    return "central-difference"


def _floored_box_points(plan: SamplingPlan, n: int, floor: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Box samples with every coordinate at least ``floor`` in magnitude.

    Central differences lose accuracy on fields with axis singularities
    (square-root cusps and the like), so the Euler probes sample away from
    the coordinate hyperplanes.
    """
    target = plan.n_samples
    rows = []
    got = 0
    for _ in range(64):
        X = plan.box_points(n, count=2 * target, rng=rng)
        X = X[np.abs(X).min(axis=1) >= floor]
        rows.append(X)
        got += X.shape[0]
        if got >= target:
            break
    out = np.vstack(rows)
    return out[:target]


def euler_residual(p: ScalarField, alpha: float,
                   plan: Optional[SamplingPlan] = None,
                   grad_spec: Optional[GradientSpec] = None,
                   coord_floor: float = 0.1) -> EulerReport:
    """Max over samples of |alpha p(x) - grad p(x) . (x - x_star)|.

    ``p`` should be positively homogeneous of degree ``alpha`` and
    differentiable away from the reference point; samples keep every
    coordinate at least ``coord_floor`` from the reference to keep the
    difference stencil well conditioned.
    """
    plan = plan or SamplingPlan()
    spec = grad_spec or GradientSpec()
    rng = plan.rng()
    Z = _floored_box_points(plan, p.n, coord_floor, rng)
    X = p.x_star + Z
    vals = p.values(X)
    grads = p.gradient_values(X, spec)
    residuals = np.abs(alpha * vals - np.einsum("ij,ij->i", grads, Z))
    finite = np.isfinite(residuals)
    max_res = float(residuals[finite].max()) if finite.any() else np.nan
    return EulerReport(max_residual=max_res, residuals=residuals, alpha=alpha,
                       grad_mode=_grad_mode(p, spec), h=spec.h,
                       n_samples=int(X.shape[0]),
                       excluded=int((~finite).sum()), seed=plan.seed,
                       notes={"coord_floor": coord_floor})


def general_euler_residual(field: ScalarField, d: Decomposition,
                           plan: Optional[SamplingPlan] = None,
                           grad_spec: Optional[GradientSpec] = None,
                           phi_step: float = 1e-6,
                           p_floor_frac: float = 0.01) -> EulerReport:
    """Residual of grad f(x) . (x - x_star) = alpha phi'(p(x)) p(x).

    phi' comes from central differences on the one-dimensional profile with
    its own step — never from differentiating f, which is ill conditioned
    where phi' blows up.  Samples with |p| below ``p_floor_frac`` times the
    sample maximum are excluded for the same reason.
    """
    plan = plan or SamplingPlan()
    spec = grad_spec or GradientSpec()
    rng = plan.rng()
    Z = plan.box_points(field.n, rng=rng)
    X = field.x_star + Z
    p_vals = d.p_values(X)
    finite = np.isfinite(p_vals)
    scale = np.abs(p_vals[finite]).max() if finite.any() else 0.0
    keep = finite & (np.abs(p_vals) >= p_floor_frac * scale)
    excluded = int((~keep).sum())
    Zk, Xk, pk = Z[keep], X[keep], p_vals[keep]

    step = phi_step * (1.0 + np.abs(pk))
    if d.case == "one-sided":
        # keep the stencil inside the profile's domain t >= 0
        step = np.minimum(step, 0.5 * pk)
    phi_prime = (d.phi_values(pk + step) - d.phi_values(pk - step)) / (2.0 * step)

    grads = field.gradient_values(Xk, spec)
    lhs = np.einsum("ij,ij->i", grads, Zk)
    residuals = np.abs(lhs - d.alpha * phi_prime * pk)
    finite_r = np.isfinite(residuals)
    max_res = float(residuals[finite_r].max()) if finite_r.any() else np.nan
    return EulerReport(max_residual=max_res, residuals=residuals, alpha=d.alpha,
                       grad_mode=_grad_mode(field, spec), h=spec.h,
                       n_samples=int(Xk.shape[0]), excluded=excluded,
                       seed=plan.seed,
                       notes={"phi_step": phi_step, "p_floor_frac": p_floor_frac})


# -----------------------------------------------------------------------------
# level-set constancy of grad f . z


@dataclass
class SpreadReport:
    """Values of grad f(z) . (z - x_star) over one sampled level set."""

    level: float
    values: np.ndarray
    spread: float
    mean: float
    passed: bool
    tol: float
    skipped: int
    n_points: int
    seed: int

    def to_dict(self) -> dict:
        return {"level": self.level, "spread": self.spread, "mean": self.mean,
                "passed": self.passed, "tol": self.tol, "skipped": self.skipped,
                "n_points": self.n_points, "seed": self.seed}


def levelset_gradient_constancy(field: ScalarField, c: float,
                                n_points: int = 64,
                                grad_spec: Optional[GradientSpec] = None,
                                seed: int = 0, tol: float = 1e-6) -> SpreadReport:
    """Spread of grad f(z) . (z - x_star) over points of the level set {f = c}.

    Level points come from per-direction ray radii over seeded sphere
    directions; directions whose ray misses the level (or defeats the
    classifier) are skipped and counted.
    """
    plan = SamplingPlan(seed=seed)
    dirs = plan.sphere_points(field.n, n_points)
    pts = []
    skipped = 0
    for dvec in dirs:
        try:
            hit = ray_level_radius(field, dvec, c)
        except ValueError:
            skipped += 1
            continue
        if hit.status != "ok":
            skipped += 1
            continue
        pts.append(hit.radius * dvec)
    if not pts:
        return SpreadReport(level=c, values=np.array([]), spread=np.nan,
                            mean=np.nan, passed=False, tol=tol, skipped=skipped,
                            n_points=n_points, seed=seed)
    Z = np.array(pts)
    grads = field.gradient_values(field.x_star + Z, grad_spec)
    dots = np.einsum("ij,ij->i", grads, Z)
    finite = dots[np.isfinite(dots)]
    spread = float(finite.max() - finite.min()) if finite.size else np.nan
    return SpreadReport(level=c, values=dots, spread=spread,
                        mean=float(finite.mean()) if finite.size else np.nan,
                        passed=bool(np.isfinite(spread) and spread <= tol),
                        tol=tol, skipped=skipped, n_points=n_points, seed=seed)


# -----------------------------------------------------------------------------
# paired levels of the Gaussian bump


@dataclass
class PairedLevels:
    """Radii r < 1 < s whose Gaussian-bump level sets share one value of
    grad f(z) . z, i.e. r² e^{−r²} = s² e^{−s²}."""

    r: float
    s: float
    shared_value: float  # the common t e^{-t} value at t = r², s²
    residual: float

    def to_dict(self) -> dict:
        return {"r": self.r, "s": self.s, "shared_value": self.shared_value,
                "residual": self.residual}


def paired_level_solver(r: float, tol: float = 1e-10) -> PairedLevels:
    """The unique s > 1 with r² e^{−r²} = s² e^{−s²}, for 0 < r < 1.

    The map t ↦ t e^{−t} increases up to its peak at t = 1 and decreases
    after, so each value below the peak is taken exactly twice; bisection on
    u = s² ∈ (1, B] with doubling B finds the second preimage.  r outside
    (0, 1) is rejected — in particular feeding an s back in is invalid.
    """
    r = float(r)
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie strictly inside (0, 1): the paired level "
                         "exists only below the peak of t e^{-t} at t = 1")
    target = r ** 2 * np.exp(-(r ** 2))

    def g(u):
        return u * np.exp(-u) - target

    hi = 2.0
    while g(hi) > 0.0:
        hi *= 2.0
    u = brentq(g, 1.0, hi, xtol=1e-15, rtol=8.9e-16)
    s = float(np.sqrt(u))
    residual = abs(u * np.exp(-u) - target)
    if residual > tol:
        raise ArithmeticError(f"paired-level residual {residual} above {tol}")
    return PairedLevels(r=r, s=s, shared_value=float(target), residual=residual)


# -----------------------------------------------------------------------------
# saddle shells


@dataclass
class SaddleReport:
    radii: list
    max_grad_norms: list
    grad_tol: float
    monotone_ok: bool
    passed: bool
    points_per_shell: int
    seed: int

    def to_dict(self) -> dict:
        return {"radii": self.radii, "max_grad_norms": self.max_grad_norms,
                "grad_tol": self.grad_tol, "monotone_ok": self.monotone_ok,
                "passed": self.passed, "points_per_shell": self.points_per_shell,
                "seed": self.seed}


def saddle_levels(field: ScalarField, k_max: int = 3, tol: float = 1e-6,
                  points_per_shell: int = 16, seed: int = 0) -> SaddleReport:
    """Verify the saddle shells: the gradient vanishes on every sphere of
    radius sqrt(k pi) while rays stay strictly increasing across them.

    The radii are known analytically for the saddle gallery entry (the
    profile's derivative is sin² of the squared radius), so this is a residual
    verification, not a search — root-finding on the gradient norm would be
    ill posed at an inflection.
    """
    if field.meta.name != "saddle_si":
        raise ValueError("saddle shell verification applies to the saddle_si "
                         "gallery entry")
    plan = SamplingPlan(seed=seed)
    radii = [float(np.sqrt(k * np.pi)) for k in range(1, k_max + 1)]
    max_norms = []
    for radius in radii:
        U = plan.sphere_points(field.n, points_per_shell)
        grads = field.gradient_values(field.x_star + radius * U)
        max_norms.append(float(np.linalg.norm(grads, axis=1).max()))

    grid = np.linspace(0.05, radii[-1] + 0.5, 64)
    monotone_ok = True
    for dvec in np.vstack([np.eye(field.n), plan.sphere_points(field.n, 4)]):
        if classify_ray(field, dvec, grid=grid).kind != "strictly-increasing":
            monotone_ok = False
    passed = monotone_ok and all(v <= tol for v in max_norms)
    return SaddleReport(radii=radii, max_grad_norms=max_norms, grad_tol=tol,
                        monotone_ok=monotone_ok, passed=passed,
                        points_per_shell=points_per_shell, seed=seed)


# -----------------------------------------------------------------------------
# positive-gradient neighborhood certificate


@dataclass
class NeighborhoodCertificate:
    """A point z0 in the closed unit ball whose level set carries
    grad f(z) . z >= epsilon > 0, together with a fattening radius delta that
    keeps the product above epsilon / 2 on sampled offsets.

    epsilon is an estimate from below over samples only: the true level set
    may attain a smaller minimum between sampled rays.  delta stops growing at
    the first sampled violation or at the hard cap, whichever comes first.
    """

    ok: bool
    z0: Optional[np.ndarray]
    level: float
    epsilon: float
    delta: float
    stop_reason: str  # "violation" | "cap" | "failed"
    n_level_points: int
    n_fattened: int
    skipped_directions: int
    seed: int
    scan: list = dataclass_field(default_factory=list)
    violation: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "z0": None if self.z0 is None else self.z0.tolist(),
                "level": self.level, "epsilon": self.epsilon,
                "delta": self.delta, "stop_reason": self.stop_reason,
                "n_level_points": self.n_level_points,
                "n_fattened": self.n_fattened,
                "skipped_directions": self.skipped_directions,
                "seed": self.seed, "scan": self.scan,
                "violation": self.violation}


def positive_gradient_region(field: ScalarField,
                             plan: Optional[SamplingPlan] = None,
                             grad_spec: Optional[GradientSpec] = None,
                             n_level_points: int = 24, n_offsets: int = 16,
                             derivative_floor: float = 1e-3,
                             delta_start: float = 1e-4,
                             delta_cap: float = 0.5) -> NeighborhoodCertificate:
    """Certificate that grad f(z) . (z - x_star) stays positive near a level set.

    Picks s = sampled argmin of f on the unit sphere, scans t from 1 downward
    for a ray derivative above ``derivative_floor`` (which automatically
    avoids saddle shells, where the derivative vanishes), sets z0 = t s,
    samples the level set through z0 by ray radii, takes epsilon as the
    sampled minimum of the gradient product, then doubles delta from
    ``delta_start`` while every offset sample of the fattened level set keeps
    the product at or above epsilon / 2.
    """
    plan = plan or SamplingPlan()
    rng = plan.rng()
    n = field.n
    sphere = plan.sphere_points(n, 128, rng=rng)
    svals = field.values(field.x_star + sphere)
    finite = np.isfinite(svals)
    if not finite.any():
        return NeighborhoodCertificate(ok=False, z0=None, level=np.nan,
                                       epsilon=np.nan, delta=0.0,
                                       stop_reason="failed", n_level_points=0,
                                       n_fattened=0, skipped_directions=0,
                                       seed=plan.seed,
                                       scan=[["sphere", "non-finite"]])
    s = sphere[int(np.argmin(np.where(finite, svals, np.inf)))]

    scan = []
    t_found = None
    for t in np.linspace(1.0, 0.05, 20):
        h = 1e-4 * (1.0 + t)
        deriv = (field.value(field.x_star + (t + h) * s)
                 - field.value(field.x_star + (t - h) * s)) / (2.0 * h)
        scan.append([float(t), float(deriv)])
        if np.isfinite(deriv) and deriv > derivative_floor:
            t_found = float(t)
            break
    if t_found is None:
        return NeighborhoodCertificate(ok=False, z0=None, level=np.nan,
                                       epsilon=np.nan, delta=0.0,
                                       stop_reason="failed", n_level_points=0,
                                       n_fattened=0, skipped_directions=0,
                                       seed=plan.seed, scan=scan)
    z0 = t_found * s
    level = float(field.value(field.x_star + z0))

    dirs = np.vstack([s, plan.sphere_points(n, n_level_points, rng=rng)])
    pts = []
    skipped = 0
    for dvec in dirs:
        try:
            hit = ray_level_radius(field, dvec, level)
        except ValueError:
            skipped += 1
            continue
        if hit.status != "ok":
            skipped += 1
            continue
        pts.append(hit.radius * dvec)
    Z = np.array(pts)
    grads = field.gradient_values(field.x_star + Z, grad_spec)
    dots = np.einsum("ij,ij->i", grads, Z)
    finite_dots = dots[np.isfinite(dots)]
    epsilon = float(finite_dots.min()) if finite_dots.size else np.nan
    if not (np.isfinite(epsilon) and epsilon > 0):
        return NeighborhoodCertificate(ok=False, z0=z0, level=level,
                                       epsilon=epsilon, delta=0.0,
                                       stop_reason="failed",
                                       n_level_points=len(pts), n_fattened=0,
                                       skipped_directions=skipped,
                                       seed=plan.seed, scan=scan)

    offsets = plan.sphere_points(n, n_offsets, rng=rng)
    radial = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    delta = 0.0
    stop_reason = "cap"
    violation = None
    n_fattened = 0
    candidate = delta_start
    while True:
        # offset bank per level point: shared unit offsets plus +-radial
        Y = np.concatenate([
            (Z[:, None, :] + candidate * offsets[None, :, :]).reshape(-1, n),
            Z + candidate * radial,
            Z - candidate * radial,
        ])
        g2 = field.gradient_values(field.x_star + Y, grad_spec)
        dots2 = np.einsum("ij,ij->i", g2, Y)
        n_fattened += Y.shape[0]
        bad = ~(dots2 >= epsilon / 2.0)  # catches nan too
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            violation = {"delta": float(candidate), "point": Y[i].tolist(),
                         "dot": float(dots2[i])}
            stop_reason = "violation"
            break
        delta = candidate
        if candidate >= delta_cap:
            stop_reason = "cap"
            break
        candidate = min(2.0 * candidate, delta_cap)
    return NeighborhoodCertificate(ok=True, z0=z0, level=level, epsilon=epsilon,
                                   delta=float(delta), stop_reason=stop_reason,
                                   n_level_points=len(pts), n_fattened=n_fattened,
                                   skipped_directions=skipped, seed=plan.seed,
                                   scan=scan, violation=violation)
