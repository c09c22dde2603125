"""Canonical decomposition f = phi o p of a scaling-invariant field.

The homogeneous part is recovered by ray root-finding: for a reference point
x0 with nonzero shifted value, lambda(x) solves g(lambda x) = g(x0) along the
ray through x, and p(x) = (1 / lambda(x))**alpha (0 on the zero level of g,
sign-split across two references when rays of both monotonicities exist).
The profile phi is the field's own ray section through the reference,
rescaled so that p is positively homogeneous of the requested degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .field import FieldMeta, ScalarField
from .rays import (MAX_WITNESSES, SamplingPlan, classify_ray, default_directions,
                   order_trichotomy)
from .rootfind import BELOW_START, OK, UNBOUNDED, solve_monotone_batch

ZERO_LEVEL_ATOL = 1e-12


class DecompositionError(RuntimeError):
    """Raised when the construction's preconditions fail."""


@dataclass
class ReferenceInfo:
    point: np.ndarray        # shifted coordinates
    value: float             # shifted field value there
    increasing: bool         # ray monotonicity through the point


class Decomposition:
    """Handles for the parts of f = phi o p.

    ``p`` takes absolute coordinates and satisfies p(x_star) = 0 and
    p(x_star + rho z) = rho**alpha p(x_star + z).  ``phi`` is strictly
    monotone on the achieved range with phi(0) = f(x_star); in the one-sided
    case its domain is t >= 0 and it decreases iff the field's rays do.
    """

    def __init__(self, field: ScalarField, alpha: float, case: str,
                 positive_ref: Optional[ReferenceInfo] = None,
                 negative_ref: Optional[ReferenceInfo] = None,
                 zero_tol: Optional[float] = None):
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        if case not in ("zero", "one-sided", "two-sided"):
            raise ValueError(f"unknown case {case!r}")
        self.field = field
        self.alpha = float(alpha)
        self.case = case
        self.positive_ref = positive_ref
        self.negative_ref = negative_ref
        self.zero_tol = (ZERO_LEVEL_ATOL * (1.0 + abs(field.f_star))
                         if zero_tol is None else zero_tol)
        self._lambda_cache: dict[bytes, float] = {}
        self.solver_failures: list = []

    # -- p ------------------------------------------------------------------

    def _solve_lambdas(self, Z: np.ndarray, ref: ReferenceInfo) -> np.ndarray:
        """lambda(z) with g(lambda z) = ref.value, memoized per exact vector."""
        lam = np.full(Z.shape[0], np.nan)
        missing = []
        keys = []
        for i, row in enumerate(Z):
            key = row.tobytes()
            keys.append(key)
            cached = self._lambda_cache.get(key)
            if cached is None:
                missing.append(i)
            else:
                lam[i] = cached
        if missing:
            M = Z[missing]

            def profile(t):
                return self.field.shifted_values(t[:, None] * M)

            res = solve_monotone_batch(profile, np.full(len(missing), ref.value),
                                       increasing=ref.increasing)
            for j, i in enumerate(missing):
                if res.status[j] == OK:
                    lam[i] = res.t[j]
                    self._lambda_cache[keys[i]] = float(res.t[j])
                else:
                    reason = {UNBOUNDED: "unbounded_ray",
                              BELOW_START: "level_unreachable"}.get(
                                  int(res.status[j]), "non_finite")
                    if len(self.solver_failures) < MAX_WITNESSES:
                        self.solver_failures.append(
                            {"kind": reason, "point": Z[i].tolist()})
        return lam

    def lambda_for(self, x) -> float:
        """The homothety scale lambda(x) for one absolute point (nan if f(x)
        is on the zero level or the ray never meets the reference level)."""
        z = np.asarray(x, dtype=float) - self.field.x_star
        g = self.field.shifted(z)
        if abs(g) <= self.zero_tol or self.case == "zero":
            return np.nan
        ref = self.positive_ref if (self.case == "one-sided" or g > 0) else self.negative_ref
        return float(self._solve_lambdas(z[None, :], ref)[0])

    def p_values(self, X) -> np.ndarray:
        """Canonical p over an (N, n) batch of absolute points."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Z = X - self.field.x_star
        g = self.field.shifted_values(Z)
        p = np.zeros(X.shape[0])
        if self.case == "zero":
            return p
        zero = np.abs(g) <= self.zero_tol
        nan_rows = np.isnan(g)
        p[nan_rows] = np.nan
        if self.case == "one-sided":
            active = ~zero & ~nan_rows
            if active.any():
                lam = self._solve_lambdas(Z[active], self.positive_ref)
                p[active] = (1.0 / lam) ** self.alpha
        else:
            for ref, sign in ((self.positive_ref, 1.0), (self.negative_ref, -1.0)):
                cls = ~zero & ~nan_rows & ((g > 0) if sign > 0 else (g < 0))
                if cls.any():
                    lam = self._solve_lambdas(Z[cls], ref)
                    p[cls] = sign * (1.0 / lam) ** self.alpha
        return p

    def p(self, x) -> float:
        return float(self.p_values(np.asarray(x, dtype=float)[None, :])[0])

    # -- phi ------------------------------------------------------------------

    @property
    def phi_increasing(self) -> bool:
        if self.case == "two-sided" or self.case == "zero":
            return True
        return self.positive_ref.increasing

    def phi_values(self, T) -> np.ndarray:
        """phi over an array of profile arguments (raw, includes f(x_star))."""
        T = np.atleast_1d(np.asarray(T, dtype=float))
        x_star = self.field.x_star
        if self.case == "zero":
            return self.field.f_star + T
        inv = 1.0 / self.alpha
        if self.case == "one-sided":
            if (T < 0).any():
                raise ValueError("one-sided profile is defined for t >= 0 only")
            pts = x_star + (T ** inv)[:, None] * self.positive_ref.point
            return self.field._eval_batch(pts)
        out = np.empty(T.shape[0])
        pos = T >= 0
        if pos.any():
            pts = x_star + (T[pos] ** inv)[:, None] * self.positive_ref.point
            out[pos] = self.field._eval_batch(pts)
        if (~pos).any():
            pts = x_star + ((-T[~pos]) ** inv)[:, None] * self.negative_ref.point
            out[~pos] = self.field._eval_batch(pts)
        return out

    def phi(self, t: float) -> float:
        return float(self.phi_values(np.array([t]))[0])

    def phi_inverse(self, y: float, max_doublings: int = 60) -> float:
        """Solve phi(t) = y on the achieved range by monotone bracketing."""
        gy = float(y) - self.field.f_star
        if self.case == "zero":
            return gy
        if abs(gy) <= self.zero_tol:
            return 0.0
        inv_ok = False
        if self.case == "one-sided":
            ref = self.positive_ref
            same_side = (gy > 0) == (ref.value > 0)
            if not same_side:
                raise ValueError(f"level {y} is outside the achieved range")
            branch_sign = 1.0
        else:
            ref = self.positive_ref if gy > 0 else self.negative_ref
            branch_sign = 1.0 if gy > 0 else -1.0

        def profile(u):
            return self.field.shifted_values(u[:, None] * ref.point)

        res = solve_monotone_batch(profile, np.array([gy]), increasing=ref.increasing,
                                   max_doublings=max_doublings)
        if res.status[0] != OK:
            raise ValueError(f"level {y} not reachable along the reference ray "
                             f"(status {int(res.status[0])})")
        return float(branch_sign * res.t[0] ** self.alpha)

    # -- wrappers ---------------------------------------------------------------

    def p_field(self) -> ScalarField:
        """The canonical p as a ScalarField (positively homogeneous, degree alpha)."""
        meta = FieldMeta(name=f"p[{self.field.meta.name}]", declared_si=True,
                         ph_degree=self.alpha)
        return ScalarField(self.field.n, lambda X: self.p_values(X),
                           x_star=self.field.x_star, vectorized=True, meta=meta)

    def order_field(self) -> ScalarField:
        """The order-equivalent representative: p, negated when phi decreases,
        so that it sorts points exactly like f does."""
        sign = 1.0 if self.phi_increasing else -1.0
        meta = FieldMeta(name=f"order_p[{self.field.meta.name}]", declared_si=True,
                         ph_degree=self.alpha)
        return ScalarField(self.field.n, lambda X: sign * self.p_values(X),
                           x_star=self.field.x_star, vectorized=True, meta=meta)

    def summary(self) -> dict:
        refs = {}
        if self.positive_ref is not None:
            refs["reference"] = self.positive_ref.point.tolist()
            refs["reference_value"] = self.positive_ref.value
        if self.negative_ref is not None:
            refs["negative_reference"] = self.negative_ref.point.tolist()
            refs["negative_reference_value"] = self.negative_ref.value
        return {"case": self.case, "alpha": self.alpha,
                "phi_increasing": self.phi_increasing, **refs}


# -----------------------------------------------------------------------------
# construction


def _condition_reference(field: ScalarField, u: np.ndarray) -> np.ndarray:
    """Choose the scale of a unit reference direction.

    Unit scale is strongly preferred — it normalizes the homogeneous part so
    that p = 1 on the reference point itself — and is kept whenever the level
    value there is finite and usably far from zero.  Only a degenerate unit
    value (vanishing or non-finite) triggers a search along the ray for the
    scale whose value is closest to 1 in magnitude.  Rescaling never moves
    far: saturating profiles (bounded rays) have numerically flat tails where
    level targets collapse to the ray's limit and the root-solve degrades.
    """
    v = field.shifted(u)
    floor = 1e-8 * (1.0 + abs(field.f_star))
    if np.isfinite(v) and abs(v) >= floor:
        return u
    scales = np.geomspace(0.125, 8.0, 13)
    vals = field.shifted_values(scales[:, None] * u)
    with np.errstate(all="ignore"):
        score = np.abs(np.log10(np.abs(vals)))
    score[~np.isfinite(score)] = np.inf
    best = int(np.argmin(score))
    if not np.isfinite(score[best]):
        return u
    return scales[best] * u


def _make_ref(field: ScalarField, z: np.ndarray) -> ReferenceInfo:
    value = field.shifted(z)
    verdict = classify_ray(field, z)
    if not verdict.monotone:
        # fall back to the value's sign; a nonzero value forces monotonicity
        # along the ray for decomposable fields
        increasing = value > 0
    else:
        increasing = verdict.kind == "strictly-increasing"
    return ReferenceInfo(point=np.asarray(z, dtype=float), value=float(value),
                         increasing=bool(increasing))


def build_decomposition(field: ScalarField, alpha: float = 1.0, x0=None,
                        x1=None, xm1=None,
                        plan: Optional[SamplingPlan] = None) -> Decomposition:
    """Construct the canonical decomposition of a scaling-invariant field.

    The case (zero / one-sided / two-sided) is chosen from sampled ray
    monotonicities unless explicit reference points are supplied (absolute
    coordinates): ``x0`` for the one-sided case, ``x1`` and ``xm1`` for the
    two-sided case.  References are searched on the unit sphere (64 n seeded
    points, the largest |f| wins) and rescaled to a well-conditioned level.
    """
    plan = plan or SamplingPlan()
    n = field.n
    zero_tol = ZERO_LEVEL_ATOL * (1.0 + abs(field.f_star))

    if x1 is not None or xm1 is not None:
        if x1 is None or xm1 is None:
            raise ValueError("two-sided hints need both x1 and xm1")
        pos = _make_ref(field, np.asarray(x1, dtype=float) - field.x_star)
        neg = _make_ref(field, np.asarray(xm1, dtype=float) - field.x_star)
        if not pos.value > 0:
            raise DecompositionError("x1 must have f(x1) > f(x_star)")
        if not neg.value < 0:
            raise DecompositionError("xm1 must have f(xm1) < f(x_star)")
        return Decomposition(field, alpha, "two-sided", positive_ref=pos,
                             negative_ref=neg, zero_tol=zero_tol)
    if x0 is not None:
        ref = _make_ref(field, np.asarray(x0, dtype=float) - field.x_star)
        if abs(ref.value) <= zero_tol:
            raise DecompositionError("x0 must have f(x0) != f(x_star)")
        return Decomposition(field, alpha, "one-sided", positive_ref=ref,
                             zero_tol=zero_tol)

    rng = plan.rng()
    sphere = plan.sphere_points(n, 64 * n, rng=rng)
    vals = field.shifted_values(sphere)
    finite = np.isfinite(vals)
    if not finite.any():
        raise DecompositionError("field is non-finite on the whole sampled sphere")

    has_pos = bool((vals[finite] > zero_tol).any())
    has_neg = bool((vals[finite] < -zero_tol).any())

    for d in default_directions(n, seed=plan.seed):
        verdict = classify_ray(field, d, grid=plan.t_grid())
        if verdict.kind == "non-monotone":
            raise DecompositionError(
                f"ray through {d.tolist()} is non-monotone; field is not decomposable")

    if not has_pos and not has_neg:
        return Decomposition(field, alpha, "zero", zero_tol=zero_tol)

    if has_pos and has_neg:
        masked = np.where(finite, vals, 0.0)
        pos = _make_ref(field, _condition_reference(field, sphere[int(np.argmax(masked))]))
        neg = _make_ref(field, _condition_reference(field, sphere[int(np.argmin(masked))]))
        return Decomposition(field, alpha, "two-sided", positive_ref=pos,
                             negative_ref=neg, zero_tol=zero_tol)

    scored = np.where(finite, np.abs(vals), -np.inf)
    ref = _make_ref(field, _condition_reference(field, sphere[int(np.argmax(scored))]))
    return Decomposition(field, alpha, "one-sided", positive_ref=ref,
                         zero_tol=zero_tol)


# -----------------------------------------------------------------------------
# module-level operation aliases


def phi_eval(d: Decomposition, t):
    """phi(t) (raw values; one-sided profiles are defined for t >= 0 only)."""
    out = d.phi_values(np.atleast_1d(np.asarray(t, dtype=float)))
    return float(out[0]) if np.ndim(t) == 0 else out


def phi_inverse(d: Decomposition, y: float) -> float:
    """Inverse profile value by monotone bracketing on the reference ray."""
    return d.phi_inverse(y)


# -----------------------------------------------------------------------------
# verification probes


@dataclass
class DecompositionCheck:
    max_composition_residual: float
    max_ph_residual: float  # normalized by (1 + rho^alpha |p|)
    n_samples: int
    witnesses: list
    seed: int

    def to_dict(self) -> dict:
        return {"max_composition_residual": self.max_composition_residual,
                "max_ph_residual": self.max_ph_residual,
                "n_samples": self.n_samples, "witnesses": self.witnesses,
                "seed": self.seed}


def verify_decomposition(field: ScalarField, d: Decomposition,
                         plan: Optional[SamplingPlan] = None) -> DecompositionCheck:
    """Round-trip and homogeneity residuals of a decomposition on seeded samples.

    Reports max |f(x) - phi(p(x))| and the max homogeneity defect
    |p(rho z) - rho^alpha p(z)| / (1 + rho^alpha |p(z)|).
    """
    plan = plan or SamplingPlan()
    rng = plan.rng()
    X = field.x_star + plan.box_points(field.n, rng=rng)
    rho = plan.rhos(rng=rng)

    f_vals = field.values(X)
    p_vals = d.p_values(X)
    witnesses = list(d.solver_failures)
    comp = np.abs(f_vals - d.phi_values(p_vals))
    ok = ~np.isnan(comp)

    Z = X - field.x_star
    p_scaled = d.p_values(field.x_star + rho[:, None] * Z)
    ph_defect = np.abs(p_scaled - rho ** d.alpha * p_vals) / (
        1.0 + rho ** d.alpha * np.abs(p_vals))
    ph_ok = ~np.isnan(ph_defect)

    for idx in np.flatnonzero(~ok)[:4]:
        witnesses.append({"kind": "non_finite", "point": X[idx].tolist()})
    return DecompositionCheck(
        max_composition_residual=float(comp[ok].max()) if ok.any() else np.nan,
        max_ph_residual=float(ph_defect[ph_ok].max()) if ph_ok.any() else np.nan,
        n_samples=int(X.shape[0]), witnesses=witnesses, seed=plan.seed)


@dataclass
class UniquenessReport:
    case: str
    classes: dict  # class label -> {"ratio": mean, "cv": ..., "count": ...}
    passed: bool
    seed: int

    def to_dict(self) -> dict:
        return {"case": self.case, "classes": self.classes, "passed": self.passed,
                "seed": self.seed}


def uniqueness_check(field: ScalarField, d1: Decomposition, d2: Decomposition,
                     plan: Optional[SamplingPlan] = None,
                     cv_tol: float = 1e-6) -> UniquenessReport:
    """Two canonical constructions differ by a constant per sign class.

    The ratio p1/p2 must be constant over samples (one constant in the
    one-sided case, one per sign class in the two-sided case); the report
    carries each class's mean ratio and coefficient of variation.
    """
    if d1.alpha != d2.alpha:
        raise ValueError("uniqueness comparison requires matching degrees")
    plan = plan or SamplingPlan()
    X = field.x_star + plan.box_points(field.n)
    p1 = d1.p_values(X)
    p2 = d2.p_values(X)
    floor = 1e-9
    classes = {}
    passed = True
    if d1.case == "one-sided":
        labels = (("all", np.abs(p1) > floor),)
    else:
        labels = (("positive", p1 > floor), ("negative", p1 < -floor))
    for label, mask in labels:
        mask = mask & (np.abs(p2) > floor) & np.isfinite(p1) & np.isfinite(p2)
        if not mask.any():
            continue
        ratios = p1[mask] / p2[mask]
        mean = float(ratios.mean())
        cv = float(ratios.std() / abs(mean)) if mean != 0 else np.inf
        classes[label] = {"ratio": mean, "cv": cv, "count": int(mask.sum())}
        passed &= cv <= cv_tol
    return UniquenessReport(case=d1.case, classes=classes, passed=passed,
                            seed=plan.seed)


@dataclass
class OrderReport:
    passed: bool
    trials: int
    disagreements: int
    witnesses: list
    seed: int

    def to_dict(self) -> dict:
        return {"passed": self.passed, "trials": self.trials,
                "disagreements": self.disagreements, "witnesses": self.witnesses,
                "seed": self.seed}


def order_equivalence(field_f: ScalarField, field_p: ScalarField,
                      plan: Optional[SamplingPlan] = None) -> OrderReport:
    """Do f and p induce the same order (hence the same sublevel sets)?

    Compares sign(f(x) - f(y)) with sign(p(x) - p(y)) under the relative tie
    band, on structured axis pairs followed by seeded random pairs.
    """
    plan = plan or SamplingPlan()
    rng = plan.rng()
    n = field_f.n
    eye = np.eye(n)
    xs, ys = [], []
    for i in range(n):
        for j_ in range(n):
            if i != j_:
                xs.append(eye[i])
                ys.append(0.5 * eye[j_])
    X = np.vstack([np.array(xs), plan.box_points(n, rng=rng)]) if xs else plan.box_points(n, rng=rng)
    Y = np.vstack([np.array(ys), plan.box_points(n, rng=rng)]) if ys else plan.box_points(n, rng=rng)
    X = field_f.x_star + X
    Y = field_f.x_star + Y

    cf = order_trichotomy(field_f.values(X), field_f.values(Y))
    cp = order_trichotomy(field_p.values(X), field_p.values(Y))
    disagree = cf != cp
    witnesses = []
    for idx in np.flatnonzero(disagree)[:MAX_WITNESSES]:
        witnesses.append({"kind": "order_disagreement", "x": X[idx].tolist(),
                          "y": Y[idx].tolist()})
    count = int(disagree.sum())
    return OrderReport(passed=count == 0, trials=int(X.shape[0]),
                       disagreements=count, witnesses=witnesses, seed=plan.seed)
