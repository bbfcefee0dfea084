"""Kernels specific to the 0/1 loss ``lambda * ||(Ax + b)_+||_0``.

Everything here is a pure function of its inputs: the proximal operator of
the positive-part counting norm, subdifferential membership, the index
partition that drives the Newton method, the stationarity residual, the
P-stationarity certificate and the tau-bound diagnostics.

Indices are 0-based throughout.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ProblemInstance",
    "PrimalDualPoint",
    "IndexPartition",
    "StationarityResidual",
    "TauBounds",
    "ProxValue",
    "StationarityCertificate",
    "ZeroSolutionWarning",
    "prox_scalar",
    "prox_vector",
    "subdiff_membership",
    "partition_indices",
    "residual_F",
    "p_stationarity_check",
    "tau_bounds",
    "default_eq_tol",
    "zero_one_objective",
]


class ZeroSolutionWarning(UserWarning):
    """lambda is small enough that x = 0 can be P-stationary."""


def _as_matrix(A):
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"A must be two-dimensional, got shape {A.shape}")
    return A


def take_rows(A, idx):
    """Rows ``idx`` of a dense or CSR matrix, as the same kind of matrix."""
    return A[idx] if not sp.issparse(A) else A[idx, :]


def matvec(A, x):
    return np.asarray(A @ x).ravel()


def rmatvec(A, z):
    return np.asarray(A.T @ z).ravel()


@dataclass
class ProblemInstance:
    """Data of ``min f(x) + lam * ||(Ax + b)_+||_0``.

    ``tau`` is the proximal step used by the stationarity conditions and by
    the Newton solver; it is part of the instance because every derived set
    (partition, certificate) depends on it.
    """

    objective: object
    A: object
    b: np.ndarray
    lam: float
    tau: float

    def __post_init__(self):
        self.A = _as_matrix(self.A)
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.A.shape[0]
        if self.b.shape[0] != m:
            raise ValueError(f"b has length {self.b.shape[0]}, A has {m} rows")
        if not (self.lam > 0 and self.tau > 0):
            raise ValueError("lam and tau must be positive")
        pos = self.b[self.b > 0]
        if pos.size and self.lam <= np.min(pos**2) / (2 * self.tau):
            warnings.warn(
                f"lam={self.lam} <= min(b_i^2 : b_i > 0)/(2 tau) = "
                f"{np.min(pos**2) / (2 * self.tau):.6g}; x = 0 may be a stationary point",
                ZeroSolutionWarning,
                stacklevel=2,
            )

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def threshold(self) -> float:
        """``sqrt(tau * lam / 2)``, the centre/radius of the prox interval."""
        return math.sqrt(self.tau * self.lam / 2)

    def y(self, x) -> np.ndarray:
        return matvec(self.A, x) + self.b


@dataclass
class PrimalDualPoint:
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.x = np.array(self.x, dtype=float).ravel()
        self.z = np.array(self.z, dtype=float).ravel()
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.z))):
            raise ValueError("PrimalDualPoint entries must be finite")

    def copy(self) -> "PrimalDualPoint":
        return PrimalDualPoint(self.x.copy(), self.z.copy())


@dataclass(frozen=True)
class IndexPartition:
    """Row classification at a point; ``T = S | Eo`` is the active block."""

    S: np.ndarray
    E: np.ndarray
    O: np.ndarray  # noqa: E741
    Eo: np.ndarray
    T: np.ndarray
    eq_tol: float
    m: int

    @property
    def T_complement(self) -> np.ndarray:
        mask = np.ones(self.m, dtype=bool)
        mask[self.T] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True)
class StationarityResidual:
    grad_block: np.ndarray
    primal_block: np.ndarray
    dual_block: np.ndarray
    norm: float

    def concat(self) -> np.ndarray:
        return np.concatenate([self.grad_block, self.primal_block, self.dual_block])


@dataclass(frozen=True)
class TauBounds:
    tau1: float
    tau2: float
    tau_star: float
    gamma_star: np.ndarray
    rank_deficient: bool = False


@dataclass(frozen=True)
class ProxValue:
    """Prox of one coordinate; ``alternate`` is set only on a tie."""

    value: float
    tie: bool = False
    alternate: float | None = None

    @property
    def candidates(self) -> tuple:
        return (self.value,) if not self.tie else (self.value, self.alternate)


@dataclass(frozen=True)
class StationarityCertificate:
    stationary: bool
    gradient_residual: float
    gradient_ok: bool
    prox_ok: bool
    prox_violations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __bool__(self):
        return self.stationary

    @property
    def failed(self) -> tuple:
        out = []
        if not self.gradient_ok:
            out.append("gradient")
        if not self.prox_ok:
            out.append("prox")
        return tuple(out)


def default_eq_tol(tau: float, lam: float) -> float:
    return 1e-10 * max(1.0, math.sqrt(tau * lam / 2))


def prox_scalar(z: float, alpha: float) -> ProxValue:
    """Proximal map of ``alpha * max(y, 0)_0`` at a scalar.

    Returns 0 inside the open interval ``(0, sqrt(2 alpha))``, ``z`` outside
    it, and reports a tie ``{0, z}`` on its boundary (canonical value 0).
    """
    z = float(z)
    alpha = float(alpha)
    if not (math.isfinite(z) and math.isfinite(alpha)):
        raise ValueError("prox_scalar requires finite arguments")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    # |z - c| < c  <=>  0 < z < 2c; comparing z directly avoids the
    # rounding in z - c that would turn tiny negative z into ties
    two_c = 2 * math.sqrt(alpha / 2)
    if z <= 0.0 or z > two_c:
        return ProxValue(z)
    if z < two_c:
        return ProxValue(0.0)
    return ProxValue(0.0, tie=True, alternate=z)


def prox_vector(z, alpha: float):
    """Componentwise :func:`prox_scalar`.

    Returns
    -------
    y : ndarray
        Canonical prox value (0 on ties).
    ties : ndarray of int
        Indices where both 0 and ``z_i`` are minimizers.
    """
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)) or not math.isfinite(alpha):
        raise ValueError("prox_vector requires finite arguments")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    two_c = 2 * math.sqrt(alpha / 2)
    y = np.where((z <= 0) | (z > two_c), z, 0.0)
    ties = np.flatnonzero(z == two_c)
    return y, ties


def subdiff_membership(v, y, tol: float = 0.0) -> bool:
    """Whether ``v`` lies in the limiting subdifferential of ``||(.)_+||_0`` at ``y``.

    At a zero of ``y`` any nonnegative component is allowed; elsewhere the
    component must vanish.
    """
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    if v.shape != y.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {y.shape}")
    at_zero = np.abs(y) <= tol
    ok = np.where(at_zero, v >= -tol, np.abs(v) <= tol)
    return bool(np.all(ok))


def partition_indices(w: PrimalDualPoint, inst: ProblemInstance, eq_tol: float | None = None) -> IndexPartition:
    """Split the rows into S, E, O (and Eo within E) at ``w``.

    The equality tests use the absolute tolerance ``eq_tol``; the strict
    inequality defining S is tightened by the same amount so that the three
    sets stay disjoint.
    """
    if eq_tol is None:
        eq_tol = default_eq_tol(inst.tau, inst.lam)
    if eq_tol < 0:
        raise ValueError("eq_tol must be nonnegative")
    if w.x.shape[0] != inst.n or w.z.shape[0] != inst.m:
        raise ValueError("point dimensions do not match the instance")
    c = inst.threshold
    y = inst.y(w.x)
    tz = inst.tau * w.z
    gap = np.abs(y + tz - c)
    in_E = np.abs(gap - c) <= eq_tol
    in_S = (gap < c - eq_tol) & ~in_E
    in_O = ~(in_E | in_S)
    in_Eo = in_E & (np.abs(y) <= eq_tol) & (np.abs(np.abs(tz - c) - c) <= eq_tol)
    T = np.flatnonzero(in_S | in_Eo)
    return IndexPartition(
        S=np.flatnonzero(in_S),
        E=np.flatnonzero(in_E),
        O=np.flatnonzero(in_O),
        Eo=np.flatnonzero(in_Eo),
        T=T,
        eq_tol=float(eq_tol),
        m=inst.m,
    )


def residual_F(w: PrimalDualPoint, T, inst: ProblemInstance, grad=None) -> StationarityResidual:
    """Stacked residual ``(grad f + A_T' z_T, A_T x + b_T, z_{not T})``.

    ``grad`` may be passed to reuse an already computed ``grad f(x)``.
    """
    T = np.asarray(T, dtype=int)
    if grad is None:
        grad = inst.objective.gradient(w.x)
    mask = np.zeros(inst.m, dtype=bool)
    mask[T] = True
    A_T = take_rows(inst.A, T)
    g = np.asarray(grad, dtype=float) + rmatvec(A_T, w.z[T])
    p = matvec(A_T, w.x) + inst.b[T]
    d = w.z[~mask]
    nrm = math.sqrt(float(g @ g) + float(p @ p) + float(d @ d))
    return StationarityResidual(g, p, d, nrm)


def p_stationarity_check(w: PrimalDualPoint, inst: ProblemInstance, tol: float = 1e-8) -> StationarityCertificate:
    """Certify ``grad f + A'z = 0`` and ``Ax + b in Prox(Ax + b + tau z)``.

    Both conditions are tested with absolute tolerance ``tol``. A
    coordinate whose prox argument sits within ``tol`` of the tie boundary
    accepts either branch.
    """
    grad = inst.objective.gradient(w.x)
    gres = float(np.linalg.norm(np.asarray(grad) + rmatvec(inst.A, w.z)))
    grad_ok = gres <= tol

    c = inst.threshold
    y = inst.y(w.x)
    u = y + inst.tau * w.z
    gap = np.abs(u - c)
    zero_allowed = gap <= c + tol
    ident_allowed = gap >= c - tol
    ok = (zero_allowed & (np.abs(y) <= tol)) | (ident_allowed & (np.abs(y - u) <= tol))
    bad = np.flatnonzero(~ok)
    prox_ok = bad.size == 0
    return StationarityCertificate(grad_ok and prox_ok, gres, grad_ok, prox_ok, bad)


def tau_bounds(w: PrimalDualPoint, inst: ProblemInstance, zero_tol: float = 1e-8) -> TauBounds:
    """Upper bounds on tau below which a local minimizer is P-stationary.

    ``tau1`` comes from the positive entries of ``y = Ax + b``; ``tau2`` from
    the least-squares multiplier on the rows where ``y`` vanishes. Empty
    index sets give ``+inf``.
    """
    y = inst.y(w.x)
    gamma = np.flatnonzero(np.abs(y) <= zero_tol)
    pos = y[y > zero_tol]
    tau1 = math.inf if pos.size == 0 else float(np.min(pos**2) / (2 * inst.lam))

    rank_deficient = False
    if gamma.size == 0:
        tau2 = math.inf
    else:
        A_g = take_rows(inst.A, gamma)
        A_g = A_g.toarray() if sp.issparse(A_g) else A_g
        grad = np.asarray(inst.objective.gradient(w.x), dtype=float)
        # p = -(A_g A_g')^{-1} A_g grad is the least-squares solution of A_g' p = -grad
        p, _, rank, _ = np.linalg.lstsq(A_g.T, -grad, rcond=None)
        rank_deficient = rank < gamma.size
        pmax = float(np.max(np.abs(p)))
        tau2 = math.inf if pmax == 0 else 2 * inst.lam / pmax**2
    return TauBounds(tau1, tau2, min(tau1, tau2), gamma, rank_deficient)


def zero_one_objective(x, inst: ProblemInstance, tol: float = 0.0) -> float:
    """``f(x) + lam * #{i : (Ax + b)_i > tol}``.

    A small ``tol`` keeps rows that a finite-precision solve leaves at
    ``y_i = 1e-9`` from being billed as violations.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    y = inst.y(x)
    return float(inst.objective.value(x)) + inst.lam * int(np.count_nonzero(y > tol))
