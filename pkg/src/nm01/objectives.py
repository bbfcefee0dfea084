"""Smooth parts ``f`` of the composite objective.

A model exposes ``value(x)``, ``gradient(x)`` and ``hessian(x)``; the
Hessian comes back as one of the representations in :mod:`nm01.linsys`.
"""
from __future__ import annotations

import numpy as np

from .linsys import Dense, Diagonal

__all__ = [
    "ObjectiveModel",
    "QuadraticDiag",
    "SmoothedLq",
    "EPS_FLOOR",
    "quadratic_diag_model",
    "smoothed_lq_model",
    "finite_diff_check",
]

EPS_FLOOR = 1e-6


class ObjectiveModel:
    """Interface for twice continuously differentiable ``f``."""

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError

    def newton_matrix(self, x):
        """Curvature used by the Newton step; the exact Hessian unless overridden."""
        return self.hessian(x)


class QuadraticDiag(ObjectiveModel):
    """``f(x) = ||D x||^2`` with ``D = diag(d)``."""

    def __init__(self, d):
        d = np.asarray(d, dtype=float).ravel()
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("d must be finite and nonnegative")
        self.d = d
        self._d2 = d * d

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(self._d2 @ (x * x))

    def gradient(self, x):
        return 2.0 * self._d2 * np.asarray(x, dtype=float)

    def hessian(self, x):
        return Diagonal(2.0 * self._d2)

    @property
    def strong_convexity(self) -> float:
        """Modulus ``c_f = 2 min d_i^2``."""
        return 2.0 * float(np.min(self._d2)) if self.d.size else 0.0


class SmoothedLq(ObjectiveModel):
    """``f(x) = sum_i (x_i^2 + eps^2)^(q/2)``, a smooth surrogate of ``||x||_q^q``.

    ``eps`` is mutable so a solver can drive it toward zero; assignments
    below ``eps_min`` (default :data:`EPS_FLOOR`) are clamped to it.

    The Hessian turns negative once ``x_i^2 > eps^2 / (1 - q)``.
    :meth:`newton_matrix` therefore clips each diagonal entry from below
    at ``curvature_floor`` times the reweighting weight
    ``q (x_i^2 + eps^2)^(q/2 - 1)``; ``curvature_floor=None`` hands the
    exact Hessian to the solver instead.
    """

    def __init__(self, q=0.5, eps=0.5, *, eps_min=EPS_FLOOR, curvature_floor=None):
        if not 0 < q < 1:
            raise ValueError("q must lie in (0, 1)")
        if not eps_min > 0:
            raise ValueError("eps_min must be positive")
        if curvature_floor is not None and not curvature_floor > 0:
            raise ValueError("curvature_floor must be positive or None")
        self.q = float(q)
        self.eps_min = float(eps_min)
        self.curvature_floor = curvature_floor
        self.eps = eps

    @property
    def eps(self):
        return self._eps

    @eps.setter
    def eps(self, value):
        value = float(value)
        if not value > 0:
            raise ValueError("eps must be positive")
        self._eps = max(value, self.eps_min)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.sum((x * x + self._eps**2) ** (self.q / 2)))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.q * x * (x * x + self._eps**2) ** (self.q / 2 - 1)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        e2 = self._eps**2
        q = self.q
        return Diagonal(q * (x2 + e2) ** (q / 2 - 2) * ((q - 1) * x2 + e2))

    def newton_matrix(self, x):
        if self.curvature_floor is None:
            return self.hessian(x)
        x = np.asarray(x, dtype=float)
        h = self.hessian(x).diag
        weight = self.q * (x * x + self._eps**2) ** (self.q / 2 - 1)
        return Diagonal(np.maximum(h, self.curvature_floor * weight))


def quadratic_diag_model(d) -> QuadraticDiag:
    return QuadraticDiag(d)


def smoothed_lq_model(q=0.5, eps=0.5, **kw) -> SmoothedLq:
    return SmoothedLq(q, eps, **kw)


def _hessian_diag(H):
    if isinstance(H, Diagonal):
        return H.diag
    if isinstance(H, Dense):
        return np.diag(H.matrix)
    return np.diag(H.to_dense())


def _rel_err(approx, exact):
    scale = np.maximum(np.abs(exact), 1.0)
    return float(np.max(np.abs(approx - exact) / scale)) if np.size(exact) else 0.0


def finite_diff_check(model, x, h=1e-6):
    """Worst relative error of the gradient and Hessian diagonal.

    The gradient is compared with central differences of ``value`` and the
    Hessian diagonal with central differences of ``gradient``. Errors are
    relative to ``max(|exact|, 1)``, so coordinates where the derivative is
    near zero are measured absolutely.

    Returns
    -------
    grad_err, hess_err : float
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    g = np.asarray(model.gradient(x), dtype=float)
    hd = _hessian_diag(model.hessian(x))
    g_fd = np.empty(n)
    h_fd = np.empty(n)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g_fd[i] = (model.value(xp) - model.value(xm)) / (2 * h)
        h_fd[i] = (model.gradient(xp)[i] - model.gradient(xm)[i]) / (2 * h)
    return _rel_err(g_fd, g), _rel_err(h_fd, hd)
