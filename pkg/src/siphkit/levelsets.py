"""Level-set geometry probes.

Ray intersection radii (each half-line from the reference point meets a level
set of a strictly-monotone-ray field at most once), unit-sphere extrema of a
homogeneous part, the ball sandwich bounds they induce, a compactness probe
for sublevel sets, and a Monte Carlo shell probe for measure negligibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Sequence

import numpy as np

from .decomposition import Decomposition
from .field import ScalarField
from .rays import MAX_WITNESSES, SamplingPlan, classify_ray, default_directions
from .rootfind import (BELOW_START, NONFINITE, OK, UNBOUNDED, golden_section,
                       solve_monotone, solve_monotone_batch)

_STATUS_LABEL = {OK: "ok", UNBOUNDED: "unbounded", NONFINITE: "non-finite",
                 BELOW_START: "outside-range"}


@dataclass
class LevelRadius:
    """Intersection of one ray with the level set {f = c}.

    ``status`` is "ok" (unique radius found), "outside-range" (the level is on
    the wrong side of the ray's start, so the ray misses it), "unbounded"
    (bracket expansion exhausted — evidence the ray never reaches the level),
    "whole-ray" (constant ray sitting exactly at the level), or "non-finite".
    """

    direction: np.ndarray
    level: float
    status: str
    radius: float = np.nan
    residual: float = np.nan

    def to_dict(self) -> dict:
        return {"direction": self.direction.tolist(), "level": self.level,
                "status": self.status, "radius": self.radius,
                "residual": self.residual}


def ray_level_radius(field: ScalarField, direction, c: float,
                     grid=None) -> LevelRadius:
    """Radius t* with f(x_star + t* d) = c along one ray.

    The ray must classify as constant or strictly monotone (a non-monotone
    verdict is rejected: the uniqueness statement this probes presupposes
    monotone rays).  Levels are raw f values, not shifted.
    """
    d = np.asarray(direction, dtype=float)
    verdict = classify_ray(field, d, grid=grid)
    if verdict.kind == "non-monotone":
        raise ValueError("ray is non-monotone; level radii are only defined "
                         "for monotone rays")
    if verdict.kind == "non-finite":
        return LevelRadius(d, c, "non-finite")
    gy = float(c) - field.f_star
    if verdict.kind == "constant":
        tol = 1e-12 * (1.0 + abs(field.f_star))
        status = "whole-ray" if abs(gy) <= tol else "unbounded"
        return LevelRadius(d, c, status)
    increasing = verdict.kind == "strictly-increasing"
    root, status, residual = solve_monotone(
        lambda t: field.shifted(t * d), gy, increasing=increasing)
    label = _STATUS_LABEL[status]
    if label != "ok":
        return LevelRadius(d, c, label)
    return LevelRadius(d, c, "ok", radius=root, residual=residual)


# -----------------------------------------------------------------------------
# sphere extrema


@dataclass
class SphereExtrema:
    m: float
    M: float
    argmin: np.ndarray
    argmax: np.ndarray
    n_samples: int
    refine_steps: int

    def to_dict(self) -> dict:
        return {"m": self.m, "M": self.M, "argmin": self.argmin.tolist(),
                "argmax": self.argmax.tolist(), "n_samples": self.n_samples,
                "refine_steps": self.refine_steps}


def _refine_on_sphere(fun, u: np.ndarray, sign: float, passes: int) -> tuple:
    """Golden-section over great-circle arcs through ``u`` along each axis.

    ``sign=+1`` minimizes, ``sign=-1`` maximizes.  Returns (point, value).
    """
    n = u.shape[0]
    best_u = u / np.linalg.norm(u)
    best_v = sign * fun(best_u)
    for _ in range(passes):
        for i in range(n):
            axis = np.zeros(n)
            axis[i] = 1.0
            tangent = axis - (axis @ best_u) * best_u
            norm = np.linalg.norm(tangent)
            if norm < 1e-12:
                continue
            tangent /= norm
            base = best_u

            def arc_val(theta):
                w = np.cos(theta) * base + np.sin(theta) * tangent
                val = sign * fun(w)
                return val if np.isfinite(val) else np.inf

            theta_best, val = golden_section(arc_val, -np.pi / 2, np.pi / 2)
            if val < best_v:
                best_v = val
                best_u = np.cos(theta_best) * base + np.sin(theta_best) * tangent
                best_u /= np.linalg.norm(best_u)
    return best_u, sign * best_v


def sphere_extrema(p: ScalarField, n_samples: int = 512, refine_steps: int = 2,
                   seed: int = 0) -> SphereExtrema:
    """Extrema of p over the unit sphere around its reference point.

    Seeded sphere sampling picks starting points; golden-section over
    great-circle arcs through the current best point (one arc per coordinate
    axis, ``refine_steps`` passes) polishes each extremum.
    """
    n = p.n
    if n == 1:
        pts = np.array([[1.0], [-1.0]])
        vals = p.values(p.x_star + pts)
        lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
        return SphereExtrema(float(vals[lo]), float(vals[hi]), pts[lo], pts[hi],
                             n_samples=2, refine_steps=0)
    plan = SamplingPlan(seed=seed)
    S = plan.sphere_points(n, n_samples)
    vals = p.values(p.x_star + S)
    finite = np.isfinite(vals)
    if not finite.any():
        raise ValueError("function is non-finite on all sphere samples")
    masked_min = np.where(finite, vals, np.inf)
    masked_max = np.where(finite, vals, -np.inf)

    def fun(u):
        return float(p.value(p.x_star + u))

    u_min, v_min = _refine_on_sphere(fun, S[int(np.argmin(masked_min))], +1.0,
                                     refine_steps)
    u_max, v_max = _refine_on_sphere(fun, S[int(np.argmax(masked_max))], -1.0,
                                     refine_steps)
    return SphereExtrema(m=v_min, M=v_max, argmin=u_min, argmax=u_max,
                         n_samples=n_samples, refine_steps=refine_steps)


# -----------------------------------------------------------------------------
# sandwich bounds


@dataclass
class BoundsReport:
    """Outcome of a sandwich check: extrema used, witnesses of violations."""

    verdict: str  # "pass" | "fail" | "precondition-failed"
    m: float
    M: float
    witnesses: list
    n_samples: int
    seed: int
    notes: dict = dataclass_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "m": self.m, "M": self.M,
                "witnesses": self.witnesses, "n_samples": self.n_samples,
                "seed": self.seed, "notes": self.notes}


def check_ph_sandwich(p: ScalarField, alpha: float, m_p: float, M_p: float,
                      plan: Optional[SamplingPlan] = None,
                      rtol: float = 1e-9) -> BoundsReport:
    """Verify m_p ||x||^alpha <= p(x) <= M_p ||x||^alpha on seeded samples.

    ``m_p`` and ``M_p`` are the unit-sphere extrema of p (degree alpha); the
    bound follows from homogeneity along each ray.  Witnesses record the
    violated side.  Nonpositive p at x != x_star is recorded too, since the
    sandwich is stated for positive homogeneous parts.
    """
    plan = plan or SamplingPlan()
    X0 = plan.box_points(p.n)
    r = np.linalg.norm(X0, axis=1)
    keep = r > 1e-9
    X0, r = X0[keep], r[keep]
    vals = p.values(p.x_star + X0)
    lower = m_p * r ** alpha
    upper = M_p * r ** alpha
    slack = rtol * (1.0 + np.abs(upper))
    witnesses = []
    for idx in np.flatnonzero(~np.isfinite(vals))[:4]:
        witnesses.append({"kind": "non_finite", "x": X0[idx].tolist()})
    finite = np.isfinite(vals)
    for kind, bad in (("nonpositive_p", finite & (vals <= 0)),
                      ("lower_bound", finite & (vals < lower - slack)),
                      ("upper_bound", finite & (vals > upper + slack))):
        for idx in np.flatnonzero(bad)[:MAX_WITNESSES]:
            witnesses.append({"kind": kind, "x": X0[idx].tolist(),
                              "p": float(vals[idx]),
                              "lower": float(lower[idx]),
                              "upper": float(upper[idx])})
    verdict = "pass" if not witnesses else "fail"
    return BoundsReport(verdict=verdict, m=m_p, M=M_p, witnesses=witnesses,
                        n_samples=int(X0.shape[0]), seed=plan.seed,
                        notes={"alpha": alpha, "rtol": rtol})


def check_si_sandwich(field: ScalarField, d: Decomposition,
                      plan: Optional[SamplingPlan] = None,
                      slack: float = 1e-4) -> BoundsReport:
    """Verify phi(m ||x||) <= f(x) <= phi(M ||x||) and the ball inclusions.

    Requires the one-sided increasing case (the reference point is the unique
    global minimum); otherwise the report carries verdict
    "precondition-failed" and nothing is run.  m and M are the unit-sphere
    extrema of the degree-1 representative q = p^(1/alpha); phi1(t) = phi(t^alpha)
    is the matching profile.  ``slack`` is a relative tolerance absorbing the
    sampling error of the extrema estimates.

    Beyond the pointwise sandwich, two inclusions are witness-searched:
    every sampled point with ||x|| < rho must lie in the sublevel set at
    phi1(rho M), and every sampled point of a sublevel set at level c must lie
    in the ball of radius phi1^{-1}(c)/m.
    """
    plan = plan or SamplingPlan()
    if d.case != "one-sided" or not d.phi_increasing:
        return BoundsReport(verdict="precondition-failed", m=np.nan, M=np.nan,
                            witnesses=[], n_samples=0, seed=plan.seed,
                            notes={"reason": "requires the one-sided case with "
                                             "increasing rays (unique minimum "
                                             "at the reference point)",
                                   "case": d.case,
                                   "phi_increasing": d.phi_increasing})
    inv_alpha = 1.0 / d.alpha

    def q_batch(X):
        return d.p_values(X) ** inv_alpha

    q_field = ScalarField(field.n, q_batch, x_star=field.x_star, vectorized=True)
    ext = sphere_extrema(q_field, n_samples=256, refine_steps=2, seed=plan.seed)
    m_hat, M_hat = ext.m, ext.M
    notes = {"m_is_q_extremum": True, "alpha": d.alpha,
             "extrema_samples": ext.n_samples, "slack": slack}
    if not (np.isfinite(m_hat) and m_hat > 0):
        return BoundsReport(verdict="precondition-failed", m=m_hat, M=M_hat,
                            witnesses=[], n_samples=0, seed=plan.seed,
                            notes={**notes, "reason": "homogeneous part is not "
                                                      "positive on the sphere"})

    def phi1(t):
        return d.phi_values(np.asarray(t, dtype=float) ** d.alpha)

    X0 = plan.box_points(field.n)
    r = np.linalg.norm(X0, axis=1)
    keep = r > 1e-9
    X0, r = X0[keep], r[keep]
    f_vals = field.values(field.x_star + X0)
    lower = phi1(m_hat * r)
    upper = phi1(M_hat * r)
    band = slack * (1.0 + np.abs(f_vals))
    witnesses = []
    finite = np.isfinite(f_vals)
    for kind, bad in (("lower_bound", finite & (f_vals < lower - band)),
                      ("upper_bound", finite & (f_vals > upper + band))):
        for idx in np.flatnonzero(bad)[:MAX_WITNESSES]:
            witnesses.append({"kind": kind, "x": X0[idx].tolist(),
                              "f": float(f_vals[idx]),
                              "lower": float(lower[idx]),
                              "upper": float(upper[idx])})

    # Ball of radius rho inside the sublevel set at phi1(rho * M).
    for rho in (0.5 * plan.box_radius, plan.box_radius):
        cap = float(phi1(np.array([rho * M_hat]))[0])
        inside = finite & (r < rho)
        bad = inside & (f_vals > cap + slack * (1.0 + abs(cap)))
        for idx in np.flatnonzero(bad)[:4]:
            witnesses.append({"kind": "ball_inclusion", "rho": rho,
                              "x": X0[idx].tolist(), "f": float(f_vals[idx]),
                              "cap": cap})

    # Sublevel set at level c inside the ball of radius phi1^{-1}(c)/m.
    ref_levels = f_vals[np.isfinite(f_vals)][:8]
    for c in ref_levels:
        try:
            radius = d.phi_inverse(float(c)) ** inv_alpha / m_hat
        except ValueError:
            continue
        covered = finite & (f_vals <= c)
        bad = covered & (r > radius * (1.0 + slack) + slack)
        for idx in np.flatnonzero(bad)[:4]:
            witnesses.append({"kind": "ball_cover", "level": float(c),
                              "x": X0[idx].tolist(), "norm": float(r[idx]),
                              "ball_radius": float(radius)})

    verdict = "pass" if not witnesses else "fail"
    return BoundsReport(verdict=verdict, m=m_hat, M=M_hat, witnesses=witnesses,
                        n_samples=int(X0.shape[0]), seed=plan.seed, notes=notes)


# -----------------------------------------------------------------------------
# compactness


@dataclass
class CompactnessReport:
    verdict: str  # "bounded" | "unbounded-evidence"
    level: float
    max_radius: float
    ray_kinds: list
    witnesses: list
    n_directions: int
    seed: int

    @property
    def bounded(self) -> bool:
        return self.verdict == "bounded"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "level": self.level,
                "max_radius": self.max_radius, "ray_kinds": self.ray_kinds,
                "witnesses": self.witnesses, "n_directions": self.n_directions,
                "seed": self.seed}


def compactness_probe(field: ScalarField, c: float, directions=None,
                      plan: Optional[SamplingPlan] = None) -> CompactnessReport:
    """Evidence for compactness of the sublevel set {f <= c}.

    Sublevel sets are compact exactly when every ray from the reference point
    is strictly increasing (the reference is the unique global minimum), so
    any constant, decreasing, non-monotone, or non-finite sampled ray is an
    unboundedness witness.  With all rays increasing, per-direction level
    radii are root-solved; a bracket blow-up is also unboundedness evidence
    (never proof — the expansion cap is finite and reported).
    """
    plan = plan or SamplingPlan()
    if directions is None:
        directions = default_directions(field.n, seed=plan.seed)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    grid = plan.t_grid()
    kinds = []
    witnesses = []
    for dvec in directions:
        verdict = classify_ray(field, dvec, grid=grid)
        kinds.append(verdict.kind)
        if verdict.kind != "strictly-increasing" and len(witnesses) < MAX_WITNESSES:
            witnesses.append({"kind": f"{verdict.kind}_ray",
                              "direction": dvec.tolist()})
    if witnesses:
        return CompactnessReport(verdict="unbounded-evidence", level=c,
                                 max_radius=np.nan, ray_kinds=kinds,
                                 witnesses=witnesses,
                                 n_directions=len(directions), seed=plan.seed)

    gy = float(c) - field.f_star

    def profile(t):
        return field.shifted_values(t[:, None] * directions)

    res = solve_monotone_batch(profile, np.full(len(directions), gy),
                               increasing=True)
    radii = np.where(res.status == OK, res.t, 0.0)
    # BELOW_START rows mean the level is under the ray's start: that ray
    # contributes nothing to the sublevel set (radius 0).
    for i in np.flatnonzero(res.status == UNBOUNDED)[:MAX_WITNESSES]:
        witnesses.append({"kind": "bracket_exhausted",
                          "direction": directions[i].tolist(),
                          "doublings": 60})
    for i in np.flatnonzero(res.status == NONFINITE)[:4]:
        witnesses.append({"kind": "non_finite", "direction": directions[i].tolist()})
    verdict = "bounded" if not witnesses else "unbounded-evidence"
    max_radius = float(radii.max()) if verdict == "bounded" else np.nan
    return CompactnessReport(verdict=verdict, level=c, max_radius=max_radius,
                             ray_kinds=kinds, witnesses=witnesses,
                             n_directions=len(directions), seed=plan.seed)


# -----------------------------------------------------------------------------
# negligibility


@dataclass
class NegligibilityReport:
    """Monte Carlo shell fractions around one level value.

    A level set of measure zero shows up as shell fractions that shrink
    proportionally with the shell half-width eps; the pass rule requires the
    fractions to be non-increasing (within 3 sigma binomial noise) and the
    smallest to stay below rate_bound * eps.
    """

    level: float
    eps_list: list
    fractions: list
    counts: list
    n_samples: int
    box_radius: float
    passed: bool
    rate_bound: float
    seed: int
    notes: dict = dataclass_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"level": self.level, "eps_list": self.eps_list,
                "fractions": self.fractions, "counts": self.counts,
                "n_samples": self.n_samples, "box_radius": self.box_radius,
                "passed": self.passed, "rate_bound": self.rate_bound,
                "seed": self.seed, "notes": self.notes}


def negligibility_probe(field: ScalarField, c: float,
                        eps_list: Sequence[float] = (0.1, 0.05, 0.025),
                        n_samples: int = 100_000, box_radius: float = 2.0,
                        seed: int = 0, rate_bound: float = 1.0) -> NegligibilityReport:
    """Fractions of uniform box samples falling in the shells |f - c| <= eps.

    ``eps_list`` must be strictly decreasing and positive.  The continuity of
    every ray section — the hypothesis under which level sets are negligible —
    is assumed, not verified; the report records this.
    """
    eps = np.asarray(list(eps_list), dtype=float)
    if eps.ndim != 1 or len(eps) < 1 or (eps <= 0).any() or (np.diff(eps) >= 0).any():
        raise ValueError("eps_list must be strictly decreasing and positive")
    rng = np.random.default_rng(seed)
    X = field.x_star + rng.uniform(-box_radius, box_radius,
                                   size=(n_samples, field.n))
    vals = field.values(X)
    counts = [int(np.count_nonzero(np.abs(vals - c) <= e)) for e in eps]
    fractions = [cnt / n_samples for cnt in counts]
    ok = True
    for prev, cur in zip(fractions, fractions[1:]):
        sigma = np.sqrt(max(prev * (1.0 - prev), 1e-12) / n_samples)
        if cur > prev + 3.0 * sigma:
            ok = False
    final_ok = fractions[-1] <= rate_bound * eps[-1]
    return NegligibilityReport(
        level=c, eps_list=eps.tolist(), fractions=fractions, counts=counts,
        n_samples=n_samples, box_radius=box_radius, passed=bool(ok and final_ok),
        rate_bound=rate_bound, seed=seed,
        notes={"assumption": "all ray sections continuous (not verified)"})
