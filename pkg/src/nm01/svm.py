"""Linear SVM with the 0/1 loss.

Samples are augmented with a constant 1 so the last weight acts as a bias;
that coordinate gets the light penalty ``d_last`` in ``f(x) = ||D x||^2``.
The model counts margin violations ``1 - c_i <a_i, x> > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import PrimalDualPoint, ProblemInstance
from .objectives import quadratic_diag_model
from .solver import SolveOptions, SolveReport, solve

__all__ = [
    "SvmDataset",
    "SvmModel",
    "augment",
    "build_svm_instance",
    "sign",
    "accuracy",
    "synthetic_outlier",
    "separable_gaussian",
    "train",
]


def sign(t):
    """Elementwise sign with ``sign(0) = +1``."""
    return np.where(np.asarray(t) >= 0, 1.0, -1.0)


@dataclass
class SvmDataset:
    samples: object  # (m, n-1) dense array or sparse matrix
    labels: np.ndarray

    def __post_init__(self):
        if not sp.issparse(self.samples):
            self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float).ravel()
        if self.samples.shape[0] < 1:
            raise ValueError("dataset needs at least one sample")
        if self.samples.shape[0] != self.labels.shape[0]:
            raise ValueError("samples and labels disagree in length")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")

    @property
    def m(self):
        return self.samples.shape[0]


@dataclass
class SvmModel:
    x: np.ndarray
    report: SolveReport
    train_accuracy: float

    @property
    def weights(self):
        return self.x[:-1]

    @property
    def bias(self):
        return self.x[-1]

    def decision_function(self, samples):
        return np.asarray(augment(samples) @ self.x).ravel()

    def predict(self, samples):
        return sign(self.decision_function(samples))


def augment(samples):
    """Append a column of ones."""
    m = samples.shape[0]
    if sp.issparse(samples):
        return sp.hstack([samples, np.ones((m, 1))], format="csr")
    return np.hstack([np.asarray(samples, dtype=float), np.ones((m, 1))])


def build_svm_instance(data: SvmDataset, tau=5.0, lam=15.0, d_last=0.01) -> ProblemInstance:
    a = augment(data.samples)
    if sp.issparse(a):
        A = -sp.diags(data.labels) @ a
    else:
        A = -data.labels[:, None] * a
    d = np.ones(a.shape[1])
    d[-1] = d_last
    return ProblemInstance(quadratic_diag_model(d), A, np.ones(data.m), lam, tau)


def accuracy(A0, x, c) -> float:
    """Fraction of rows with ``sign(A0 x) == c``."""
    c = np.asarray(c, dtype=float).ravel()
    pred = sign(np.asarray(A0 @ x).ravel())
    return 1.0 - np.count_nonzero(pred != c) / c.shape[0]


def synthetic_outlier(a: float) -> SvmDataset:
    """Four points in the plane; ``(1, a)`` is an outlier once ``a > 1``."""
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, a]])
    return SvmDataset(pts, np.array([1.0, 1.0, -1.0, -1.0]))


def separable_gaussian(m=200, dim=5, margin=1.0, seed=0) -> SvmDataset:
    """Two Gaussian clouds split by a random hyperplane with a guaranteed gap.

    Points falling inside the slab ``|<w, a> + b| < margin / 2`` are pushed
    out along ``w``, so the data is linearly separable with margin
    ``margin``.
    """
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(dim)
    w /= np.linalg.norm(w)
    labels = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    X = rng.standard_normal((m, dim)) + labels[:, None] * w * (margin + 1.0)
    s = X @ w
    short = labels * s < margin / 2
    X[short] += ((margin / 2 - labels[short] * s[short]) * labels[short])[:, None] * w
    return SvmDataset(X, labels)


def train(data: SvmDataset, opts: SolveOptions | None = None, *, tau=5.0, lam=15.0, d_last=0.01,
          diagnostics=False) -> SvmModel:
    """Fit the 0/1-loss SVM starting from ``x = 0, z = 1``.

    A converged run returns its final iterate. Otherwise the weights are
    the iterate with the lowest training objective ``f(x) + lam * #margin
    violations``; the report still holds the last point.
    """
    inst = build_svm_instance(data, tau=tau, lam=lam, d_last=d_last)
    w0 = PrimalDualPoint(np.zeros(inst.n), np.ones(inst.m))
    report = solve(inst, w0, opts, diagnostics=diagnostics)
    x = report.x if report.converged else report.best_x
    return SvmModel(x.copy(), report, accuracy(augment(data.samples), x, data.labels))
