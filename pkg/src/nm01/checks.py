"""Self-test suites run by ``nm01 check``.

Each suite draws its cases from a fixed seed and compares a library kernel
against an independent oracle. ``fault=True`` perturbs the kernel under
test so the harness can confirm that a broken build is caught.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import core
from .core import PrimalDualPoint, ProblemInstance
from .linsys import Dense, Diagonal, saddle_residual, solve_saddle
from .objectives import QuadraticDiag, SmoothedLq, finite_diff_check

__all__ = [
    "SuiteResult",
    "SUITES",
    "REGIMES",
    "prox_brute_force",
    "constructed_point",
    "prox_suite",
    "fd_suite",
    "partition_suite",
    "saddle_suite",
    "run_suites",
]


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    seconds: float = 0.0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


def prox_brute_force(z, alpha):
    """Objective of the candidates ``0`` and ``z`` for ``1/2 (y - z)^2 + alpha [y > 0]``.

    Returns ``(cost_zero, cost_identity)``; the minimizer is whichever is
    smaller (for ``z <= 0`` the identity costs nothing).
    """
    z = np.asarray(z, dtype=float)
    return 0.5 * z * z, alpha * (z > 0)


def _prox_cases(n, rng):
    z = rng.uniform(-4.0, 4.0, n)
    # a pool of step sizes keeps the vector path to a few hundred calls
    alpha = rng.choice(rng.uniform(1e-3, 8.0, 200), n)
    # exact boundary hits: alpha = 2k^2 puts the tie at z = 2k
    k = rng.choice([0.25, 0.5, 1.0, 1.5, 2.0], n // 20)
    alpha[: k.size] = 2 * k * k
    z[: k.size] = 2 * k
    z[k.size: k.size + 50] = 0.0
    return z, alpha


def prox_suite(n_cases=100_000, seed=0, fault=False) -> SuiteResult:
    """Closed-form prox (vector and scalar paths) against the two-candidate oracle."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    z, alpha = _prox_cases(n_cases, rng)
    cost0, costz = prox_brute_force(z, alpha)
    near_tie = np.abs(cost0 - costz) <= 1e-12 * np.maximum(1.0, np.minimum(cost0, costz))
    want = np.where(cost0 < costz, 0.0, z)

    scale = 4.0 if fault else 1.0
    got = np.empty(n_cases)
    ties = np.zeros(n_cases, dtype=bool)
    for a in np.unique(alpha):
        idx = np.flatnonzero(alpha == a)
        y, t = core.prox_vector(z[idx], a * scale)
        got[idx] = y
        ties[idx[t]] = True
    ok = (got == want) | (near_tie & ((got == 0) | (got == z)))
    ok &= ~ties | near_tie

    # the scalar path must agree with the vector path case by case
    scalar_bad = 0
    for zi, ai, gi in zip(z, alpha, got):
        if core.prox_scalar(zi, ai).value != gi:
            scalar_bad += 1
    fails = int(np.count_nonzero(~ok)) + scalar_bad
    return SuiteResult("prox", 2 * n_cases, fails, time.perf_counter() - t0,
                       f"{int(ties.sum())} ties reported, {scalar_bad} scalar/vector mismatches")


class _BrokenGradient:
    def __init__(self, model):
        self.model = model

    def value(self, x):
        return self.model.value(x)

    def gradient(self, x):
        return self.model.gradient(x) + 1e-3

    def hessian(self, x):
        return self.model.hessian(x)


def fd_suite(n_points=100, seed=0, fault=False, grad_tol=1e-5, hess_tol=1e-4) -> SuiteResult:
    """Gradient and Hessian diagonal of both objective models against central differences."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_g = worst_h = 0.0
    fails = 0
    for k in range(2 * n_points):
        n = int(rng.integers(1, 8))
        x = rng.uniform(-2.0, 2.0, n)
        if k % 2 == 0:
            model = QuadraticDiag(rng.uniform(0.01, 2.0, n))
        else:
            model = SmoothedLq(q=float(rng.uniform(0.2, 0.8)), eps=float(rng.uniform(0.1, 1.0)))
        if fault:
            model = _BrokenGradient(model)
        ge, he = finite_diff_check(model, x)
        worst_g, worst_h = max(worst_g, ge), max(worst_h, he)
        fails += not (ge <= grad_tol and he <= hess_tol)
    return SuiteResult("fd", 2 * n_points, fails, time.perf_counter() - t0,
                       f"worst gradient {worst_g:.1e}, worst Hessian {worst_h:.1e}")


REGIMES = ("interior", "boundary", "perturbed")


def constructed_point(rng, regime, m=12, n=5, tau=None, lam=None):
    """A small quadratic instance with a point whose stationarity is known.

    ``"interior"``: P-stationary, active multipliers strictly inside
    ``(0, 2c/tau)``. ``"boundary"``: P-stationary with rows sitting
    exactly on the tie boundary (``y = 0`` with ``tau z`` in ``{0, 2c}``,
    and inactive rows at ``y = 2c``). ``"perturbed"``: a stationary point
    knocked off by at least 1e-3 in one block.

    Returns
    -------
    inst : ProblemInstance
    w : PrimalDualPoint
    stationary : bool
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    tau = float(rng.uniform(0.5, 3.0)) if tau is None else tau
    lam = float(rng.uniform(0.5, 3.0)) if lam is None else lam
    c = math.sqrt(tau * lam / 2)
    A = rng.standard_normal((m, n))
    d = rng.uniform(0.5, 2.0, n)
    kind = rng.integers(0, 3 if regime == "boundary" else 2, m)  # 0 active, 1 inactive, 2 boundary
    z = np.zeros(m)
    y = np.empty(m)
    act = kind == 0
    z[act] = rng.uniform(0.05, 0.95, act.sum()) * 2 * c / tau
    y[act] = 0.0
    ina = kind == 1
    # inactive rows need y <= 0 or y >= 2c
    y[ina] = np.where(rng.random(ina.sum()) < 0.5, -rng.uniform(0.1, 3.0, ina.sum()),
                      2 * c + rng.uniform(0.1, 3.0, ina.sum()))
    bnd = np.flatnonzero(kind == 2)
    for i in bnd:
        r = rng.integers(0, 3)
        if r == 0:
            z[i], y[i] = 0.0, 0.0
        elif r == 1:
            z[i], y[i] = 2 * c / tau, 0.0
        else:
            z[i], y[i] = 0.0, 2 * c
    # x solves 2 d^2 x + A' z = 0 exactly for f = ||D x||^2
    x = -(A.T @ z) / (2 * d * d)
    b = y - A @ x
    stationary = True
    if regime == "perturbed":
        stationary = False
        which = rng.integers(0, 3)
        delta = float(rng.uniform(1e-3, 1e-1)) * rng.choice([-1.0, 1.0])
        if which == 0 or not act.any():
            x = x.copy()
            x[rng.integers(0, n)] += delta
        elif which == 1:
            z = z.copy()
            z[rng.choice(np.flatnonzero(act))] += delta
        else:
            b = b.copy()
            b[rng.choice(np.flatnonzero(act))] += abs(delta)
    with warnings.catch_warnings():
        # random b routinely trips the zero-solution advisory; irrelevant here
        warnings.simplefilter("ignore", core.ZeroSolutionWarning)
        inst = ProblemInstance(QuadraticDiag(d), A, b, lam, tau)
    return inst, PrimalDualPoint(x, z), stationary


def partition_suite(n_points=100, seed=0, fault=False) -> SuiteResult:
    """Partition totality and the residual / P-stationarity equivalence."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    cases = 0
    for regime in REGIMES:
        for _ in range(n_points):
            inst, w, stationary = constructed_point(rng, regime)
            part = core.partition_indices(w, inst)
            if fault:
                part = core.IndexPartition(part.S, part.E, part.O, part.Eo, part.S, part.eq_tol, part.m)
            sets = np.concatenate([part.S, part.E, part.O])
            total = sets.size == inst.m and np.array_equal(np.sort(sets), np.arange(inst.m))
            sub = np.isin(part.Eo, part.E).all()
            t_ok = np.array_equal(part.T, np.union1d(part.S, part.Eo))
            r0 = core.residual_F(w, part.T, inst).norm <= 1e-10
            cert = bool(core.p_stationarity_check(w, inst, tol=1e-8))
            fails += not (total and sub and t_ok and r0 == cert == stationary)
            cases += 1
    return SuiteResult("partition", cases, fails, time.perf_counter() - t0,
                       f"{n_points} points in each of {len(REGIMES)} regimes")


def saddle_suite(n_cases=60, seed=0, fault=False) -> SuiteResult:
    """Schur and full solves: residual <= 1e-10 and mutual agreement to 1e-8."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    worst = 0.0
    for k in range(n_cases):
        n = int(rng.integers(1, 51))
        t = int(rng.integers(0, min(20, n) + 1))
        A = rng.standard_normal((t, n))
        if k % 3 == 2:
            A = sp.csr_matrix(A * (rng.random((t, n)) < 0.3))
        h = rng.uniform(0.5, 3.0, n)
        if k % 4 == 1:
            h *= rng.choice([-1.0, 1.0], n)  # indefinite but well away from 0
        mu = float(rng.choice([0.0, 1e-3, 0.1, 1.0]))
        if mu == 0.0 and t:
            # keep the system nonsingular: full row rank A with mu = 0
            mu = 1e-3 if sp.issparse(A) else 0.0
        rx, rt = rng.standard_normal(n), rng.standard_normal(t)
        H = Diagonal(h)
        u1, v1 = solve_saddle(H, A, mu, rx, rt, method="schur")
        u2, v2 = solve_saddle(Dense(np.diag(h)), A, mu, rx, rt, method="full")
        if fault:
            u1 = u1 + 1e-6
        r1 = saddle_residual(H, A, mu, u1, v1, rx, rt)
        r2 = saddle_residual(H, A, mu, u2, v2, rx, rt)
        scale = max(1.0, float(np.linalg.norm(np.concatenate([u2, v2]))))
        gap = float(np.linalg.norm(np.concatenate([u1 - u2, v1 - v2]))) / scale
        worst = max(worst, r1, r2)
        fails += not (r1 <= 1e-10 and r2 <= 1e-10 and gap <= 1e-8)
    return SuiteResult("saddle", n_cases, fails, time.perf_counter() - t0, f"worst residual {worst:.1e}")


SUITES = {
    "prox": prox_suite,
    "fd": fd_suite,
    "partition": partition_suite,
    "saddle": saddle_suite,
}


def run_suites(names=None, fault=False, seed=0):
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    return [SUITES[n](seed=seed, fault=fault) for n in names]
