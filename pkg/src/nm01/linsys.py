"""Linear algebra for the Newton step.

The perturbed Newton system on the active rows ``T`` is the saddle problem::

    [ H     A_T' ] [u  ]   [rhs_x]
    [ A_T  -mu I ] [v_T] = [rhs_T]

When ``H`` is diagonal and invertible we eliminate ``u`` and solve the
``|T| x |T|`` Schur complement; otherwise the full system is assembled.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

logger = logging.getLogger(__name__)

__all__ = [
    "Diagonal",
    "BlockDiagonal",
    "Dense",
    "SingularSystemError",
    "solve_saddle",
    "saddle_residual",
    "spectral_norm_estimate",
]


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Diagonal:
    diag: np.ndarray

    @property
    def n(self):
        return self.diag.shape[0]

    def to_dense(self):
        return np.diag(self.diag)

    def matvec(self, x):
        return self.diag * x

    def norm(self):
        return float(np.max(np.abs(self.diag))) if self.n else 0.0


@dataclass(frozen=True)
class BlockDiagonal:
    """Dense blocks placed on the diagonal; ``ranges[k] = (start, stop)``."""

    blocks: tuple
    ranges: tuple

    def __post_init__(self):
        covered = []
        for (lo, hi), B in zip(self.ranges, self.blocks):
            if np.shape(B) != (hi - lo, hi - lo):
                raise ValueError(f"block for range {(lo, hi)} has shape {np.shape(B)}")
            covered.extend(range(lo, hi))
        if sorted(covered) != list(range(len(covered))) or len(set(covered)) != len(covered):
            raise ValueError("block ranges must be disjoint and cover 0..n-1")

    @property
    def n(self):
        return max(hi for _, hi in self.ranges) if self.ranges else 0

    def to_dense(self):
        H = np.zeros((self.n, self.n))
        for (lo, hi), B in zip(self.ranges, self.blocks):
            H[lo:hi, lo:hi] = B
        return H

    def matvec(self, x):
        out = np.empty_like(x, dtype=float)
        for (lo, hi), B in zip(self.ranges, self.blocks):
            out[lo:hi] = np.asarray(B) @ x[lo:hi]
        return out

    def norm(self):
        return max((np.linalg.norm(B, 2) for B in self.blocks), default=0.0)


@dataclass(frozen=True)
class Dense:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("Dense Hessian must be square")
        if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * scale:
            raise ValueError("Dense Hessian must be symmetric")

    @property
    def n(self):
        return self.matrix.shape[0]

    def to_dense(self):
        return np.asarray(self.matrix, dtype=float)

    def matvec(self, x):
        return self.matrix @ x

    def norm(self):
        return float(np.linalg.norm(self.matrix, 2)) if self.n else 0.0


def _dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def saddle_residual(H, A_T, mu, u, v, rhs_x, rhs_T):
    """Relative residual ``||K (u; v) - rhs|| / max(1, ||rhs||)``."""
    r1 = H.matvec(u) + np.asarray(A_T.T @ v).ravel() - rhs_x
    r2 = np.asarray(A_T @ u).ravel() - mu * v - rhs_T
    rhs_norm = np.sqrt(rhs_x @ rhs_x + rhs_T @ rhs_T)
    return float(np.sqrt(r1 @ r1 + r2 @ r2) / max(1.0, rhs_norm))


class _SymFactor:
    """Bunch-Kaufman factorization of a symmetric (possibly indefinite) matrix."""

    def __init__(self, K):
        sytrf, sytrs = sla.get_lapack_funcs(("sytrf", "sytrs"), (K,))
        lu, piv, info = sytrf(K, lower=True)
        if info > 0:
            raise SingularSystemError(f"symmetric factorization: D[{info - 1}] is exactly zero")
        if info < 0:
            raise ValueError(f"illegal argument {-info} to sytrf")
        if not np.all(np.isfinite(lu)):
            raise SingularSystemError("symmetric factorization produced non-finite entries")
        self._lu, self._piv, self._sytrs = lu, piv, sytrs
        self.size = K.shape[0]

    def solve(self, rhs):
        x, info = self._sytrs(self._lu, self._piv, rhs, lower=True)
        if info != 0:
            raise ValueError(f"illegal argument {-info} to sytrs")
        return x


class _SchurSolver:
    def __init__(self, h, A_T, mu):
        self.hinv = 1.0 / h
        self.A_T = A_T
        if sp.issparse(A_T):
            self.AH = A_T.multiply(self.hinv[None, :]).tocsr()
            S = _dense(self.AH @ A_T.T)
        else:
            self.AH = A_T * self.hinv
            S = self.AH @ A_T.T
        S[np.diag_indices_from(S)] += mu
        self.factor = _SymFactor(S) if S.shape[0] else None

    def solve(self, rhs_x, rhs_T):
        if self.factor is None:
            return self.hinv * rhs_x, np.zeros(0)
        v = self.factor.solve(np.asarray(self.AH @ rhs_x).ravel() - rhs_T)
        u = self.hinv * (rhs_x - np.asarray(self.A_T.T @ v).ravel())
        return u, v


class _FullSolver:
    def __init__(self, Hd, A_T, mu):
        n, t = Hd.shape[0], A_T.shape[0]
        Ad = _dense(A_T)
        K = np.empty((n + t, n + t))
        K[:n, :n] = Hd
        K[:n, n:] = Ad.T
        K[n:, :n] = Ad
        K[n:, n:] = -mu * np.eye(t)
        self.n = n
        with warnings.catch_warnings():
            # exact singularity is detected just below
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu = sla.lu_factor(K, check_finite=False)
        if not np.all(np.isfinite(self.lu[0])) or np.any(np.diag(self.lu[0]) == 0):
            raise SingularSystemError("saddle matrix is exactly singular")

    def solve(self, rhs_x, rhs_T):
        sol = sla.lu_solve(self.lu, np.concatenate([rhs_x, rhs_T]), check_finite=False)
        return sol[: self.n], sol[self.n:]


def solve_saddle(H, A_T, mu, rhs_x, rhs_T, *, method="auto", tol=1e-10, refine_steps=3):
    """Solve the perturbed Newton saddle system.

    Parameters
    ----------
    H : Diagonal, BlockDiagonal or Dense
        Hessian of the smooth part.
    A_T : (t, n) array or sparse matrix
        Active constraint rows; ``t`` may be zero.
    mu : float
        Nonnegative perturbation of the (2, 2) block.
    rhs_x, rhs_T : ndarray
    method : {"auto", "schur", "full"}
        ``"auto"`` takes the Schur path whenever ``H`` is an invertible
        diagonal.
    tol : float
        Target relative residual. Up to ``refine_steps`` rounds of iterative
        refinement are spent reaching it; an ill-conditioned but nonsingular
        system returns its best solution.

    Returns
    -------
    u, v_T : ndarray

    Raises
    ------
    SingularSystemError
        When the factorization fails, or yields non-finite output, even
        after one retry with a ``1e-12 * ||H||`` ridge on the diagonal.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    rhs_x = np.asarray(rhs_x, dtype=float).ravel()
    rhs_T = np.asarray(rhs_T, dtype=float).ravel()
    n = rhs_x.shape[0]
    if A_T.shape != (rhs_T.shape[0], n) or H.n != n:
        raise ValueError("inconsistent saddle system dimensions")

    use_schur = False
    if method != "full" and isinstance(H, Diagonal):
        hmax = float(np.max(np.abs(H.diag))) if n else 0.0
        use_schur = hmax > 0 and bool(np.all(np.abs(H.diag) >= 1e-12 * hmax))
    if method == "schur" and not use_schur:
        raise SingularSystemError("Schur path needs an invertible diagonal Hessian")

    ridge = 1e-12 * max(H.norm(), 1.0)
    last_err = None
    for shift in (0.0, ridge):
        try:
            with np.errstate(divide="raise", invalid="raise", over="raise"):
                if use_schur:
                    solver = _SchurSolver(H.diag + shift, A_T, mu)
                else:
                    Hd = H.to_dense()
                    if shift:
                        Hd = Hd + shift * np.eye(n)
                    solver = _FullSolver(Hd, A_T, mu)
                u, v = solver.solve(rhs_x, rhs_T)
                res = saddle_residual(H, A_T, mu, u, v, rhs_x, rhs_T)
                for _ in range(refine_steps):
                    if res <= tol:
                        break
                    r1 = rhs_x - H.matvec(u) - np.asarray(A_T.T @ v).ravel()
                    r2 = rhs_T - np.asarray(A_T @ u).ravel() + mu * v
                    du, dv = solver.solve(r1, r2)
                    u2, v2 = u + du, v + dv
                    res2 = saddle_residual(H, A_T, mu, u2, v2, rhs_x, rhs_T)
                    if not res2 < res:
                        break
                    u, v, res = u2, v2, res2
        except (np.linalg.LinAlgError, FloatingPointError) as err:
            last_err = err
            logger.debug("saddle solve failed (shift %.3e): %s", shift, err)
            continue
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            last_err = SingularSystemError("non-finite saddle solution")
            continue
        if res > tol:
            logger.debug("saddle residual %.3e above target %.1e", res, tol)
        return u, v
    raise SingularSystemError(str(last_err))


def spectral_norm_estimate(A, max_iters: int = 1000, tol: float = 1e-6, seed: int = 0, return_info=False):
    """Largest singular value of ``A`` by power iteration on ``A'A``.

    Returns the estimate, or ``(estimate, converged)`` when ``return_info``
    is set.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    n = A.shape[1]
    if n == 0 or A.shape[0] == 0:
        return (0.0, True) if return_info else 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    sigma = 0.0
    converged = False
    for _ in range(max_iters):
        Ax = np.asarray(A @ x).ravel()
        new = float(np.linalg.norm(Ax))
        if new == 0.0:
            # x landed in the null space; A may still be nonzero
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            continue
        x = np.asarray(A.T @ Ax).ravel()
        xn = np.linalg.norm(x)
        if xn == 0.0:
            sigma = new
            converged = True
            break
        x /= xn
        if abs(new - sigma) <= tol * new:
            sigma = new
            converged = True
            break
        sigma = new
    if return_info:
        return sigma, converged
    return sigma
