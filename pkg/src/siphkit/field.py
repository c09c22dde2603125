"""Scalar fields on R^n with a reference point, batched evaluation, and gradients.

A :class:`ScalarField` wraps a real-valued function together with the point the
scaling is anchored at (``x_star``), an optional analytic gradient, and property
metadata.  All probes in this package work on the shifted function
``z -> f(x_star + z) - f(x_star)``, which vanishes at the origin; user-facing
values are never shifted.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when an input vector does not match the field dimension."""


@dataclass(frozen=True)
class GradientSpec:
    """Settings for central-difference gradients.

    The actual step at a point x is ``h * (1 + ||x||)`` so that the stencil
    stays well scaled far from the origin.  ``force_numerical`` ignores an
    analytic gradient even when one is attached (used by the convergence-order
    probes, which must see the finite-difference error).
    """

    h: float = 1e-5
    force_numerical: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"step h must be a positive finite float, got {self.h!r}")


@dataclass
class FieldMeta:
    """Declared properties of a field.  ``None`` means unknown / unclaimed.

    ``differentiable`` means continuously differentiable away from the
    reference point; ``ph_degree`` is the declared positive-homogeneity degree
    with respect to ``x_star``.
    """

    name: str = "field"
    declared_si: Optional[bool] = None
    ph_degree: Optional[float] = None
    decomposable: Optional[bool] = None
    compact_sublevel: Optional[bool] = None
    differentiable: Optional[bool] = None
    continuous: Optional[bool] = None
    notes: dict = dataclass_field(default_factory=dict)

    def tags(self) -> dict:
        return {
            "is_si": self.declared_si,
            "ph_degree": self.ph_degree,
            "decomposable": self.decomposable,
            "compact_sublevel": self.compact_sublevel,
            "differentiable": self.differentiable,
            "continuous": self.continuous,
        }


def _as_point(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatchError(f"expected a vector of length {n}, got shape {x.shape}")
    return x


def _as_batch(X, n: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise DimensionMismatchError(f"expected points of dimension {n}, got shape {X.shape}")
    return X


class ScalarField:
    """A real-valued function on R^n with a scaling reference point.

    Parameters
    ----------
    n : int
        Input dimension.
    fn : callable
        Evaluator.  If ``vectorized``, it must accept an ``(..., n)`` array and
        return values of shape ``(...,)``; otherwise it is called per point.
    x_star : array, optional
        Reference point the scaling is anchored at (default: origin).
    grad : callable, optional
        Analytic gradient with the same batching convention as ``fn``.
    ph_part : ScalarField, optional
        For composite fields built as phi(p(x)), a handle on the inner
        positively homogeneous part.
    """

    def __init__(self, n, fn, x_star=None, grad=None, vectorized=False,
                 meta: Optional[FieldMeta] = None, name: Optional[str] = None,
                 ph_part: Optional["ScalarField"] = None):
        if int(n) < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        self.n = int(n)
        self._fn = fn
        self._grad = grad
        self._vectorized = bool(vectorized)
        self.x_star = np.zeros(self.n) if x_star is None else _as_point(x_star, self.n)
        self.meta = meta if meta is not None else FieldMeta()
        if name is not None:
            self.meta.name = name
        self.ph_part = ph_part
        self._f_star: Optional[float] = None

    # -- raw evaluation ---------------------------------------------------

    def _eval_batch(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            if self._vectorized:
                out = np.asarray(self._fn(X), dtype=float)
            else:
                out = np.array([float(self._fn(row)) for row in X], dtype=float)
        if out.shape != X.shape[:1]:
            out = out.reshape(X.shape[:1])
        return out

    def value(self, x) -> float:
        """f(x) for a single point.  Non-finite results propagate as nan/inf."""
        x = _as_point(x, self.n)
        return float(self._eval_batch(x[None, :])[0])

    def values(self, X) -> np.ndarray:
        """f over an (N, n) batch of points."""
        return self._eval_batch(_as_batch(X, self.n))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.value(x)
        return self.values(x)

    @property
    def f_star(self) -> float:
        """f(x_star), computed once."""
        if self._f_star is None:
            self._f_star = self.value(self.x_star)
        return self._f_star

    # -- shifted evaluation (internal normal form) ------------------------

    def shifted(self, z) -> float:
        """f(x_star + z) - f(x_star); vanishes at z = 0."""
        z = _as_point(z, self.n)
        return self.value(self.x_star + z) - self.f_star

    def shifted_values(self, Z) -> np.ndarray:
        Z = _as_batch(Z, self.n)
        return self._eval_batch(Z + self.x_star) - self.f_star

    # -- gradients ---------------------------------------------------------

    @property
    def has_analytic_gradient(self) -> bool:
        return self._grad is not None

    def gradient(self, x, spec: Optional[GradientSpec] = None) -> np.ndarray:
        return self.gradient_values(np.asarray(x, dtype=float)[None, :], spec)[0]

    def gradient_values(self, X, spec: Optional[GradientSpec] = None) -> np.ndarray:
        """Gradients over an (N, n) batch.

        Uses the analytic gradient when attached (unless the spec forces the
        numerical path); otherwise second-order central differences with step
        ``spec.h * (1 + ||x||)`` per point.
        """
        spec = spec or GradientSpec()
        X = _as_batch(X, self.n)
        if self._grad is not None and not spec.force_numerical:
            with np.errstate(all="ignore"):
                G = np.asarray(self._grad(X), dtype=float)
            return G.reshape(X.shape)
        h = spec.h * (1.0 + np.linalg.norm(X, axis=1))  # (N,)
        G = np.empty_like(X)
        for i in range(self.n):
            step = np.zeros_like(X)
            step[:, i] = h
            G[:, i] = (self._eval_batch(X + step) - self._eval_batch(X - step)) / (2.0 * h)
        return G

    # -- rays ---------------------------------------------------------------

    def ray(self, direction) -> "RaySection":
        return RaySection(self, _as_point(direction, self.n))

    def __repr__(self):
        return f"ScalarField(name={self.meta.name!r}, n={self.n})"


@dataclass(frozen=True)
class RaySection:
    """The restriction t -> f(x_star + t * direction) for t >= 0."""

    field: ScalarField
    direction: np.ndarray

    def eval(self, t):
        """Raw f along the ray; accepts a scalar or an array of t values."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        points = self.field.x_star + t_arr[:, None] * self.direction
        vals = self.field._eval_batch(points)
        return float(vals[0]) if np.isscalar(t) or np.ndim(t) == 0 else vals

    def eval_shifted(self, t):
        """Shifted values g(t * direction) = f(x_star + t d) - f(x_star)."""
        vals = self.eval(np.atleast_1d(np.asarray(t, dtype=float))) - self.field.f_star
        return float(vals[0]) if np.isscalar(t) or np.ndim(t) == 0 else vals


# -- module-level operation aliases ------------------------------------------

def evaluate(field: ScalarField, x) -> float:
    """Evaluate a field at one point (dimension-checked)."""
    return field.value(x)


def gradient(field: ScalarField, x, spec: Optional[GradientSpec] = None) -> np.ndarray:
    """Gradient at one point: analytic if attached, else central differences."""
    return field.gradient(x, spec)


def ray_section(field: ScalarField, direction) -> RaySection:
    """The ray restriction of ``field`` through ``x_star`` along ``direction``."""
    return field.ray(direction)
