"""Scaling-invariance certification and ray-monotonicity analysis.

The central comparison is the order biconditional
``f(x) <= f(y)  <=>  f(rho x) <= f(rho y)`` for rho > 0, tested on seeded
random triples plus a small deterministic battery of axis-aligned triples.
Comparisons use a three-way trichotomy with a relative tie band so that exact
level ties are not misread as order violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from .field import ScalarField

MAX_WITNESSES = 16
ORDER_ATOL = 1e-12
CONST_TOL = 1e-10
STEP_TOL = 1e-10


@dataclass(frozen=True)
class SamplingPlan:
    """Shared sampling configuration for the statistical probes.

    ``t_grid()`` is the strictly increasing ray grid in (0, t_max]; random
    draws are uniform on the coordinate box [-box_radius, box_radius]^n with
    scale factors rho log-uniform on [rho_min, rho_max].
    """

    seed: int = 0
    n_samples: int = 1000
    box_radius: float = 2.0
    rho_min: float = 0.1
    rho_max: float = 10.0
    t_max: float = 10.0
    grid_points: int = 24

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0 < self.rho_min < self.rho_max:
            raise ValueError("need 0 < rho_min < rho_max")
        if not (self.box_radius > 0 and self.t_max > 0):
            raise ValueError("box_radius and t_max must be positive")
        if self.grid_points < 3:
            raise ValueError("grid_points must be >= 3")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def t_grid(self) -> np.ndarray:
        return np.geomspace(self.t_max * 1e-3, self.t_max, self.grid_points)

    def box_points(self, n: int, count: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = rng or self.rng()
        count = self.n_samples if count is None else count
        return rng.uniform(-self.box_radius, self.box_radius, size=(count, n))

    def rhos(self, count: Optional[int] = None,
             rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = rng or self.rng()
        count = self.n_samples if count is None else count
        return np.exp(rng.uniform(np.log(self.rho_min), np.log(self.rho_max), size=count))

    def sphere_points(self, n: int, count: int,
                      rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = rng or self.rng()
        pts = rng.normal(size=(count, n))
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)


@dataclass
class MonotoneVerdict:
    """Grid-level classification of one ray: constant, strictly-increasing,
    strictly-decreasing, or non-monotone with a witnessing inversion pair."""

    kind: str
    max_constancy_deviation: float
    witness: Optional[tuple] = None

    @property
    def monotone(self) -> bool:
        return self.kind in ("strictly-increasing", "strictly-decreasing")


@dataclass
class SIReport:
    passed: bool
    trials: int
    violations: int
    witnesses: list
    seed: int

    def to_dict(self) -> dict:
        return {"passed": self.passed, "trials": self.trials,
                "violations": self.violations, "witnesses": self.witnesses,
                "seed": self.seed}


def order_trichotomy(a, b, atol: float = ORDER_ATOL) -> np.ndarray:
    """Vectorized three-way compare: -1 (a < b), 0 (tie), +1 (a > b).

    Ties are |a - b| <= atol * (1 + max(|a|, |b|)); exactly equal values
    (including equal infinities) tie regardless of the band.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    band = atol * (1.0 + np.maximum(np.abs(a), np.abs(b)))
    # an infinite value would blow the band up to infinity and swallow every
    # comparison against it; infinities only tie by exact equality
    band = np.where(np.isfinite(band), band, 0.0)
    with np.errstate(invalid="ignore"):
        out = np.where(a == b, 0, np.where(np.abs(a - b) <= band, 0,
                                           np.where(a < b, -1, 1)))
    return out


def _structured_triples(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic axis-aligned triples probed before random sampling.

    Includes (e_i/2, -e_i/2, rho) for rho in {4, 1/4} per axis and a
    cross-axis triple per adjacent axis pair.
    """
    xs, ys, rhos = [], [], []
    eye = np.eye(n)
    for i in range(n):
        for rho in (4.0, 0.25):
            xs.append(0.5 * eye[i])
            ys.append(-0.5 * eye[i])
            rhos.append(rho)
    for i in range(n - 1):
        xs.append(eye[i])
        ys.append(0.5 * eye[i + 1])
        rhos.append(4.0)
    return np.array(xs), np.array(ys), np.array(rhos)


def check_scaling_invariance(field: ScalarField, plan: Optional[SamplingPlan] = None,
                             atol: float = ORDER_ATOL) -> SIReport:
    """Certify the order biconditional on structured plus seeded random triples.

    The verdict fails iff at least one witness is found.  Rows with nan values
    are recorded as ``non_finite`` witnesses instead of aborting the probe.
    ``atol`` is the relative tie band of the three-way comparison.
    """
    plan = plan or SamplingPlan()
    rng = plan.rng()
    n = field.n

    sx, sy, srho = _structured_triples(n)
    X = np.vstack([sx, plan.box_points(n, rng=rng)])
    Y = np.vstack([sy, plan.box_points(n, rng=rng)])
    rho = np.concatenate([srho, plan.rhos(rng=rng)])

    fx = field.shifted_values(X)
    fy = field.shifted_values(Y)
    frx = field.shifted_values(rho[:, None] * X)
    fry = field.shifted_values(rho[:, None] * Y)

    c_base = order_trichotomy(fx, fy, atol=atol)
    c_scaled = order_trichotomy(frx, fry, atol=atol)
    nan_rows = np.isnan(fx) | np.isnan(fy) | np.isnan(frx) | np.isnan(fry)
    # a band tie is inconclusive, not evidence: decreasing tails underflow to
    # exact zeros at large rho, which must not indict an order-preserving
    # field.  Only a confidently reversed strict order is a violation.
    violating = (c_base * c_scaled == -1) & ~nan_rows

    witnesses = []
    for idx in np.flatnonzero(nan_rows)[:MAX_WITNESSES]:
        witnesses.append({"kind": "non_finite", "x": X[idx].tolist(),
                          "y": Y[idx].tolist(), "rho": float(rho[idx])})
    for idx in np.flatnonzero(violating)[:MAX_WITNESSES]:
        witnesses.append({
            "kind": "order_violation",
            "x": X[idx].tolist(), "y": Y[idx].tolist(), "rho": float(rho[idx]),
            "f_x": float(fx[idx] + field.f_star), "f_y": float(fy[idx] + field.f_star),
            "f_rho_x": float(frx[idx] + field.f_star),
            "f_rho_y": float(fry[idx] + field.f_star)})
    violations = int(violating.sum() + nan_rows.sum())
    return SIReport(passed=violations == 0, trials=int(X.shape[0]),
                    violations=violations, witnesses=witnesses, seed=plan.seed)


def classify_ray(field: ScalarField, x, grid=None, tol_const: Optional[float] = None,
                 tol_step: float = STEP_TOL) -> MonotoneVerdict:
    """Classify the ray t -> f(x_star + t x) on {0} followed by the grid.

    Strict steps of both signs give ``non-monotone`` with the inversion pair.
    Otherwise the ray is ``constant`` when every value stays within
    ``tol_const`` of the start, else monotone in the direction of its strict
    steps (plateau steps within +-tol_step, e.g. saturating tails, are
    compatible with either direction).
    """
    x = np.asarray(x, dtype=float)
    grid = np.asarray(grid, dtype=float) if grid is not None else SamplingPlan().t_grid()
    if grid.ndim != 1 or not (np.diff(grid) > 0).all() or grid[0] <= 0:
        raise ValueError("grid must be strictly increasing and positive")
    if tol_const is None:
        tol_const = CONST_TOL * (1.0 + abs(field.f_star))

    t_full = np.concatenate([[0.0], grid])
    vals = field.shifted_values(t_full[:, None] * x)
    if np.isnan(vals).any():
        bad = int(np.flatnonzero(np.isnan(vals))[0])
        return MonotoneVerdict(kind="non-finite", max_constancy_deviation=np.nan,
                               witness=(float(t_full[bad]), float(t_full[bad])))
    deviation = float(np.max(np.abs(vals - vals[0])))
    steps = np.diff(vals)
    up = steps > tol_step
    down = steps < -tol_step

    if up.any() and down.any():
        i = int(np.flatnonzero(up)[0])
        j = int(np.flatnonzero(down)[0])
        a, b = (i, j) if i < j else (j, i)
        witness = (float(t_full[b]), float(t_full[b + 1]))
        return MonotoneVerdict(kind="non-monotone", max_constancy_deviation=deviation,
                               witness=witness)
    if deviation <= tol_const:
        return MonotoneVerdict(kind="constant", max_constancy_deviation=deviation)
    if up.any() or (not down.any() and vals[-1] > vals[0]):
        return MonotoneVerdict(kind="strictly-increasing", max_constancy_deviation=deviation)
    return MonotoneVerdict(kind="strictly-decreasing", max_constancy_deviation=deviation)


def default_directions(n: int, seed: int = 0) -> np.ndarray:
    """All +-coordinate axes plus 2n seeded uniform sphere points."""
    eye = np.eye(n)
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(2 * n, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return np.vstack([eye, -eye, pts])


@dataclass
class DecomposabilityReport:
    verdict: str  # "decomposable" | "not-decomposable" | "inconclusive"
    scale: float
    ray_kinds: list
    witnesses: list
    seed: int

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "scale": self.scale,
                "ray_kinds": self.ray_kinds, "witnesses": self.witnesses,
                "seed": self.seed}


def _image_group_check(field: ScalarField, directions, values, kinds, want: str,
                       grid: np.ndarray, witnesses: list) -> Optional[str]:
    """Shared-image test within one monotonicity class at the grid scale.

    Intervals pairwise intersect iff max(lo) <= min(hi) (1-D Helly), and the
    common value must then be reachable on every ray by root-finding within
    the grid span.  Returns an updated verdict string or None if the class
    passes.
    """
    from .rootfind import OK, solve_monotone_batch

    idx = [i for i, k in enumerate(kinds) if k == want]
    if len(idx) < 2:
        return None
    lows = np.array([np.min(values[i]) for i in idx])
    highs = np.array([np.max(values[i]) for i in idx])
    i_lo = int(np.argmax(lows))
    i_hi = int(np.argmin(highs))
    gap_tol = 1e-9 * (1.0 + np.abs(lows).max() + np.abs(highs).max())
    if lows[i_lo] > highs[i_hi] + gap_tol:
        witnesses.append({
            "kind": "disjoint_image",
            "direction_a": directions[idx[i_hi]].tolist(),
            "range_a": [float(lows[i_hi]), float(highs[i_hi])],
            "direction_b": directions[idx[i_lo]].tolist(),
            "range_b": [float(lows[i_lo]), float(highs[i_lo])]})
        return "not-decomposable"

    # midpoint of the common interval is reachable on every ray of the class
    v = 0.5 * (lows[i_lo] + highs[i_hi])
    D = directions[idx]
    increasing = want == "strictly-increasing"

    def profile(t):
        return field.shifted_values(t[:, None] * D)

    res = solve_monotone_batch(profile, np.full(len(idx), v), increasing)
    reachable = (res.status == OK) & (res.t <= grid[-1] * (1 + 1e-9))
    match_tol = 1e-8 * (1.0 + abs(v))
    matched = reachable & (res.residual <= match_tol)
    if not matched.all():
        bad = int(np.flatnonzero(~matched)[0])
        witnesses.append({
            "kind": "endpoint_match_failed",
            "direction": D[bad].tolist(), "target": v,
            "status": int(res.status[bad])})
        return "inconclusive"
    return None


def check_decomposability(field: ScalarField, directions=None,
                          plan: Optional[SamplingPlan] = None) -> DecomposabilityReport:
    """Empirical test of the two decomposability conditions at scale t_max.

    (a) every sampled ray is constant or strictly monotone, and (b) rays of the
    same monotonicity share their achieved value ranges.  A scaling-invariance
    violation on the structured battery is also disqualifying, since any
    monotone-profile composition with a homogeneous part is scaling-invariant.
    A pass certifies decomposability at the probed scale only.
    """
    plan = plan or SamplingPlan()
    grid = plan.t_grid()
    n = field.n
    if directions is None:
        directions = default_directions(n, seed=plan.seed)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    witnesses: list = []

    # Any SI violation refutes decomposability outright.
    sx, sy, srho = _structured_triples(n)
    c_base = order_trichotomy(field.shifted_values(sx), field.shifted_values(sy))
    c_scaled = order_trichotomy(field.shifted_values(srho[:, None] * sx),
                                field.shifted_values(srho[:, None] * sy))
    bad = np.flatnonzero(c_base != c_scaled)
    if bad.size:
        i = int(bad[0])
        witnesses.append({"kind": "si_violation", "x": sx[i].tolist(),
                          "y": sy[i].tolist(), "rho": float(srho[i])})

    kinds = []
    values = []
    # The near-zero probe point approximates each monotone ray's value limit
    # at 0+, so image intervals reflect jumps at the origin rather than the
    # grid's finite start (ray slopes may differ by orders of magnitude).
    t_probe = grid[0] * 1e-6
    t_ext = np.concatenate([[t_probe], grid])
    for d in directions:
        vals = field.shifted_values(t_ext[:, None] * d)
        values.append(vals)  # achieved values on (0, t_max]
        verdict = classify_ray(field, d, grid=grid)
        kinds.append(verdict.kind)
        if verdict.kind == "non-monotone":
            witnesses.append({"kind": "non_monotone_ray", "direction": d.tolist(),
                              "t_pair": list(verdict.witness)})
        elif verdict.kind == "non-finite" or np.isnan(vals).any():
            witnesses.append({"kind": "non_finite", "direction": d.tolist()})

    verdict = "decomposable"
    if witnesses:
        verdict = "not-decomposable"
    else:
        for want in ("strictly-increasing", "strictly-decreasing"):
            outcome = _image_group_check(field, directions, values, kinds, want,
                                         grid, witnesses)
            if outcome == "not-decomposable":
                verdict = outcome
                break
            if outcome == "inconclusive":
                verdict = outcome
    return DecomposabilityReport(verdict=verdict, scale=float(grid[-1]),
                                 ray_kinds=kinds, witnesses=witnesses,
                                 seed=plan.seed)
