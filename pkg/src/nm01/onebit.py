"""1-bit compressed sensing: instance generator, recovery, metrics, BIHT.

Recovery solves ``min sum_i (x_i^2 + eps^2)^(q/2) + lam * #{i : eps_m - c_i <a_i, x> > 0}``
with the smoothing ``eps`` halved after every Newton step, then keeps the
``s`` largest entries and normalizes.

Two safeguards keep the Newton iteration on this nonconvex ``f`` from
running away: ``eps`` stops at ``eps_min = 1e-3`` rather than going to
zero, and the Newton matrix clips negative curvature (see
:class:`~nm01.objectives.SmoothedLq`). With the clip at 0.75 of the
reweighting weight, a step taken with no active rows shrinks ``x``
instead of overshooting. Both can be switched back to the unguarded
iteration through :func:`recover`.
"""
from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import PrimalDualPoint, ProblemInstance
from .objectives import smoothed_lq_model
from .solver import SolveOptions, SolveReport, solve
from .svm import sign

__all__ = [
    "OneBitConfig",
    "OneBitInstance",
    "RecoveryMetrics",
    "toeplitz_correlation",
    "generate_instance",
    "build_onebit_instance",
    "recover",
    "refine",
    "metrics",
    "biht_baseline",
    "run_trial",
    "SNR_CAP",
    "EPS_MIN",
    "CURVATURE_FLOOR",
    "MAX_ITERS",
]

SNR_CAP = 300.0


@dataclass(frozen=True)
class OneBitConfig:
    m: int
    n: int
    s: int
    v: float = 0.5
    r: float = 0.05
    noise_sd: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.s < 1:
            raise ValueError("m, n and s must be positive")
        if self.s > self.n:
            raise ValueError(f"s={self.s} exceeds n={self.n}")
        if not 0 <= self.v < 1:
            raise ValueError("v must lie in [0, 1)")
        if not 0 <= self.r < 1:
            raise ValueError("r must lie in [0, 1)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")

    @property
    def n_flips(self) -> int:
        # round first so that e.g. 0.05 * 500 does not ceil to 26
        return math.ceil(round(self.r * self.m, 9))


@dataclass(frozen=True)
class OneBitInstance:
    A0: np.ndarray
    x_true: np.ndarray
    c_clean: np.ndarray
    c_observed: np.ndarray
    flip_indices: np.ndarray
    s: int

    @property
    def m(self):
        return self.A0.shape[0]

    @property
    def n(self):
        return self.A0.shape[1]


@dataclass(frozen=True)
class RecoveryMetrics:
    snr: float
    he: float
    hd: float
    wall_time: float = 0.0


def toeplitz_correlation(n, v):
    """``Sigma_ij = v^|i-j|`` (identity for ``v = 0``)."""
    return sla.toeplitz(float(v) ** np.arange(n))


@functools.lru_cache(maxsize=8)
def _cholesky_factor(n, v):
    L = np.linalg.cholesky(toeplitz_correlation(n, v))
    L.flags.writeable = False
    return L


def generate_instance(cfg: OneBitConfig, rng=None) -> OneBitInstance:
    """Draw a correlated sensing matrix, an ``s``-sparse unit signal and noisy flipped signs.

    Rows of ``A0`` are ``N(0, Sigma)`` with ``Sigma = toeplitz_correlation(n, v)``,
    obtained as ``G L'`` for standard normal ``G`` and the Cholesky factor ``L``.
    All draws come from ``rng`` (default: ``numpy.random.default_rng(cfg.seed)``)
    in a fixed order, so a seed pins the instance bit for bit.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    m, n, s = cfg.m, cfg.n, cfg.s
    G = rng.standard_normal((m, n))
    if cfg.v == 0:
        A0 = G
    else:
        A0 = G @ _cholesky_factor(n, float(cfg.v)).T
    support = rng.choice(n, size=s, replace=False)
    x = np.zeros(n)
    x[support] = rng.standard_normal(s)
    x /= np.linalg.norm(x)
    noise = cfg.noise_sd * rng.standard_normal(m)
    c_clean = sign(A0 @ x)
    c_tilde = sign(A0 @ x + noise)
    flips = np.sort(rng.choice(m, size=cfg.n_flips, replace=False))
    c = c_tilde.copy()
    c[flips] = -c[flips]
    return OneBitInstance(A0, x, c_clean, c, flips, s)


EPS_MIN = 1e-3
CURVATURE_FLOOR = 0.75
MAX_ITERS = 200


def build_onebit_instance(A0, c, *, tau=1.0, lam=1.0, q=0.5, margin_eps=0.05, eps0=0.5,
                          eps_min=EPS_MIN, curvature_floor=CURVATURE_FLOOR) -> ProblemInstance:
    A = -np.asarray(c, dtype=float)[:, None] * np.asarray(A0, dtype=float)
    b = np.full(A.shape[0], float(margin_eps))
    f = smoothed_lq_model(q, eps0, eps_min=eps_min, curvature_floor=curvature_floor)
    return ProblemInstance(f, A, b, lam, tau)


def recover(inst: OneBitInstance, *, tau=1.0, lam=1.0, q=0.5, margin_eps=0.05, eps0=0.5,
            eps_min=EPS_MIN, curvature_floor=CURVATURE_FLOOR, select="hd",
            opts: SolveOptions | None = None, w0: PrimalDualPoint | None = None):
    """Raw (unrefined) estimate from the Newton solver.

    The iteration runs from ``x = 0, z = 1`` with ``eps`` halved every step
    and at most :data:`MAX_ITERS` iterations unless ``opts`` says otherwise.
    On these instances it often reaches a good point and then cycles
    between active sets without meeting ``tol_F``, so by default
    (``select="hd"``) the returned iterate is the first nonzero one whose
    refined ``inst.s``-sparse version disagrees least with the observed
    signs (the last iterate if every iterate is zero).
    ``select="final"`` returns the last iterate.

    ``eps_min=1e-6, curvature_floor=None`` gives the unguarded iteration
    (exact Hessian, ``eps`` driven to the global floor), which tends to
    diverge once the active set empties.

    Returns
    -------
    x_hat : ndarray
    report : SolveReport
        With ``select="hd"`` its ``best_x``, ``best_iteration`` and
        ``best_objective`` describe the selected iterate, the last being
        its observed sign-disagreement fraction.
    """
    if select not in ("hd", "final"):
        raise ValueError(f"select must be 'hd' or 'final', got {select!r}")
    prob = build_onebit_instance(inst.A0, inst.c_observed, tau=tau, lam=lam, q=q,
                                 margin_eps=margin_eps, eps0=eps0, eps_min=eps_min,
                                 curvature_floor=curvature_floor)
    if opts is None:
        opts = SolveOptions(max_iters=MAX_ITERS, epsilon_schedule=True)
    if w0 is None:
        w0 = PrimalDualPoint(np.zeros(prob.n), np.ones(prob.m))
    best = [math.inf, None, 0]

    def track(k, w, part, normF):
        x_r, degenerate = refine(w.x, inst.s, return_flag=True)
        if degenerate:
            return  # x = 0 is no estimate, whatever its sign agreement
        miss = np.count_nonzero(sign(inst.A0 @ x_r) != inst.c_observed)
        if miss < best[0]:
            best[:] = [miss, w.x.copy(), k]

    report = solve(prob, w0, opts, callback=track if select == "hd" else None, diagnostics=False)
    if select == "final" or best[1] is None:
        return report.x.copy(), report
    report.best_x, report.best_iteration, report.best_objective = best[1], best[2], best[0] / inst.m
    return best[1].copy(), report


def refine(x, s: int, return_flag=False):
    """Keep the ``s`` largest magnitudes (lower index wins ties) and normalize.

    An all-zero vector comes back unchanged; with ``return_flag`` the
    second output tells whether that happened.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    x = np.asarray(x, dtype=float).ravel()
    out = np.zeros_like(x)
    if s >= x.size:
        out[:] = x
    else:
        # stable sort on -|x| keeps the lower index first among equals
        keep = np.argsort(-np.abs(x), kind="stable")[:s]
        out[keep] = x[keep]
    nrm = np.linalg.norm(out)
    degenerate = nrm == 0
    if not degenerate:
        out /= nrm
    return (out, degenerate) if return_flag else out


def metrics(x_hat, inst: OneBitInstance, wall_time=0.0) -> RecoveryMetrics:
    err = float(np.sum((np.asarray(x_hat) - inst.x_true) ** 2))
    snr = SNR_CAP if err == 0 else min(SNR_CAP, -10.0 * math.log10(err))
    pred = sign(inst.A0 @ x_hat)
    he = np.count_nonzero(pred != inst.c_clean) / inst.m
    hd = np.count_nonzero(pred != inst.c_observed) / inst.m
    return RecoveryMetrics(snr, he, hd, wall_time)


def _hard(x, s):
    out = np.zeros_like(x)
    keep = np.argsort(-np.abs(x), kind="stable")[:s]
    out[keep] = x[keep]
    return out


def biht_baseline(inst: OneBitInstance, s: int, iters: int = 100, step: float | None = None):
    """Binary iterative hard thresholding from ``x = 0``.

    ``x <- H_s(x + step * A0'(c - sign(A0 x)))`` with ``step`` defaulting to
    ``1 / m``; the result is normalized once at the end.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if s < 1:
        raise ValueError("s must be >= 1")
    A0, c = inst.A0, inst.c_observed
    step = 1.0 / inst.m if step is None else step
    x = np.zeros(inst.n)
    for _ in range(iters):
        x = _hard(x + step * (A0.T @ (c - sign(A0 @ x))), s)
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 0 else x


def run_trial(cfg: OneBitConfig, rng=None, *, baseline=False, biht_iters=100, **recover_kw):
    """Generate, recover, refine and score one instance.

    Returns a dict of metrics; time columns cover the solver call only.
    """
    inst = generate_instance(cfg, rng)
    t0 = time.perf_counter()
    x_raw, report = recover(inst, **recover_kw)
    x_hat = refine(x_raw, cfg.s)
    elapsed = time.perf_counter() - t0
    met = metrics(x_hat, inst, elapsed)
    row = {"snr": met.snr, "he": met.he, "hd": met.hd, "time": met.wall_time,
           "iters": report.iterations, "status": report.status.value}
    if baseline:
        t0 = time.perf_counter()
        xb = biht_baseline(inst, cfg.s, iters=biht_iters)
        tb = time.perf_counter() - t0
        mb = metrics(xb, inst, tb)
        row.update(biht_snr=mb.snr, biht_he=mb.he, biht_hd=mb.hd, biht_time=tb)
    return row
