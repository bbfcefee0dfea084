"""Newton method on the stationarity equation of the 0/1-loss problem.

Each iteration refreshes the active rows ``T_k`` from the current point,
solves the perturbed Newton system restricted to ``T_k`` and takes a full
step. There is no line search.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import PrimalDualPoint, ProblemInstance, take_rows
from .linsys import SingularSystemError, solve_saddle, spectral_norm_estimate

logger = logging.getLogger(__name__)

__all__ = [
    "SolveOptions",
    "SolveReport",
    "Status",
    "update_mu",
    "newton_step",
    "solve",
    "global_opt_certificate",
]


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    LINEAR_SOLVE_FAILURE = "linear_solve_failure"


@dataclass
class SolveOptions:
    """Parameters of the Newton loop.

    ``mu_init=None`` picks 0.05 when ``m < n`` and 5 otherwise.
    ``epsilon_schedule``, when truthy, halves the objective's ``eps`` after
    every Newton step (the objective must expose a settable ``eps``).
    """

    max_iters: int = 1000
    tol_F: float = 1e-4
    mu_init: float | None = None
    rho: float = 1.0
    alpha_factor: float = 0.5
    mu_update_period: int = 5
    eq_tol: float | None = None
    epsilon_schedule: bool = False

    def __post_init__(self):
        if not 0 < self.alpha_factor < 1:
            raise ValueError("alpha_factor must lie in (0, 1)")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.mu_update_period < 1:
            raise ValueError("mu_update_period must be >= 1")


@dataclass
class SolveReport:
    status: Status
    w: PrimalDualPoint
    T: np.ndarray
    residual_history: list
    mu_history: list
    iterations: int
    wall_time: float
    certificate: core.StationarityCertificate
    tau_bounds: core.TauBounds | None
    objective_value: float
    partition: core.IndexPartition = field(repr=False, default=None)
    best_x: np.ndarray = field(repr=False, default=None)
    best_objective: float = math.inf
    best_iteration: int = 0

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def x(self) -> np.ndarray:
        return self.w.x

    @property
    def z(self) -> np.ndarray:
        return self.w.z


def update_mu(mu_prev, normF, k, opts: SolveOptions):
    """``min(alpha * mu_prev, rho * ||F||)`` on refresh iterations, else ``mu_prev``."""
    if k % opts.mu_update_period == 0:
        return min(opts.alpha_factor * mu_prev, opts.rho * normF)
    return mu_prev


def newton_step(w: PrimalDualPoint, part, mu, inst: ProblemInstance, grad=None, hess=None):
    """Newton direction ``(u, v)`` for the active set ``part.T``.

    The inactive multipliers are zeroed exactly (``v = -z`` off ``T``).
    """
    T = part.T
    if grad is None:
        grad = inst.objective.gradient(w.x)
    if hess is None:
        hess = inst.objective.newton_matrix(w.x)
    A_T = take_rows(inst.A, T)
    rhs_x = -(np.asarray(grad, dtype=float) + core.rmatvec(A_T, w.z[T]))
    rhs_T = -(core.matvec(A_T, w.x) + inst.b[T])
    u, v_T = solve_saddle(hess, A_T, mu, rhs_x, rhs_T)
    v = -w.z.copy()
    v[T] = v_T
    return u, v


def _default_mu(inst):
    return 0.05 if inst.m < inst.n else 5.0


def solve(inst: ProblemInstance, w0: PrimalDualPoint | None = None, opts: SolveOptions | None = None,
          *, callback=None, diagnostics=True) -> SolveReport:
    """Run the Newton method from ``w0`` (default ``x = 0, z = 1``).

    Iterates while ``||F(w_k; T_k)|| >= tol_F`` and ``k < max_iters``.
    ``callback(k, w, part, normF)`` is called once per evaluated iterate.
    With ``diagnostics=False`` the tau-bound diagnostic is skipped.
    """
    opts = opts or SolveOptions()
    if w0 is None:
        w0 = PrimalDualPoint(np.zeros(inst.n), np.ones(inst.m))
    if w0.x.shape[0] != inst.n or w0.z.shape[0] != inst.m:
        raise ValueError("initial point does not match the instance dimensions")
    mu = _default_mu(inst) if opts.mu_init is None else float(opts.mu_init)
    eq_tol = core.default_eq_tol(inst.tau, inst.lam) if opts.eq_tol is None else opts.eq_tol

    t0 = time.perf_counter()
    w = w0.copy()
    obj = inst.objective
    grad = obj.gradient(w.x)
    part = core.partition_indices(w, inst, eq_tol)
    normF = core.residual_F(w, part.T, inst, grad=grad).norm
    residuals = [normF]
    mus = []
    status = Status.MAX_ITERS
    k = 0
    if callback is not None:
        callback(k, w, part, normF)
    # lowest composite objective seen, violations counted above tol_F
    best = (core.zero_one_objective(w.x, inst, opts.tol_F), 0, w.x.copy())
    while True:
        if normF < opts.tol_F:
            status = Status.CONVERGED
            break
        if k >= opts.max_iters:
            break
        mu = update_mu(mu, normF, k, opts)
        mus.append(mu)
        try:
            u, v = newton_step(w, part, mu, inst, grad=grad)
        except SingularSystemError as err:
            logger.warning("linear solve failed at iteration %d: %s", k, err)
            status = Status.LINEAR_SOLVE_FAILURE
            break
        w = PrimalDualPoint(w.x + u, w.z + v)
        if opts.epsilon_schedule:
            obj.eps = obj.eps / 2
        k += 1
        grad = obj.gradient(w.x)
        part = core.partition_indices(w, inst, eq_tol)
        normF = core.residual_F(w, part.T, inst, grad=grad).norm
        residuals.append(normF)
        merit = core.zero_one_objective(w.x, inst, opts.tol_F)
        if merit < best[0]:
            best = (merit, k, w.x.copy())
        if callback is not None:
            callback(k, w, part, normF)
        if not math.isfinite(normF):
            logger.warning("residual became non-finite at iteration %d", k)
            break
    wall = time.perf_counter() - t0

    cert = core.p_stationarity_check(w, inst, tol=10 * opts.tol_F)
    tb = core.tau_bounds(w, inst) if diagnostics else None
    return SolveReport(
        status=status,
        w=w,
        T=part.T,
        residual_history=residuals,
        mu_history=mus,
        iterations=k,
        wall_time=wall,
        certificate=cert,
        tau_bounds=tb,
        objective_value=core.zero_one_objective(w.x, inst, opts.tol_F),
        partition=part,
        best_x=best[2],
        best_objective=best[0],
        best_iteration=best[1],
    )


def global_opt_certificate(inst: ProblemInstance, c_f: float, **power_kw) -> bool:
    """Sufficient condition ``tau >= ||A||^2 / c_f`` for global optimality.

    Only meaningful at a P-stationary point of a problem whose ``f`` is
    strongly convex with modulus ``c_f``.
    """
    if not c_f > 0:
        raise ValueError("c_f must be positive")
    if math.isinf(c_f):
        return True
    sigma = spectral_norm_estimate(inst.A, **power_kw)
    return inst.tau >= sigma**2 / c_f
