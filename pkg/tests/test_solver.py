import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nm01 import core
from nm01.core import PrimalDualPoint, ProblemInstance, ZeroSolutionWarning
from nm01.objectives import QuadraticDiag, SmoothedLq
from nm01.solver import SolveOptions, Status, global_opt_certificate, newton_step, solve, update_mu


def make(A, b, lam=1.0, tau=1.0, d=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    d = np.ones(A.shape[1]) if d is None else d
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroSolutionWarning)
        return ProblemInstance(QuadraticDiag(d), A, np.asarray(b, dtype=float), lam, tau)


def test_update_mu_examples():
    opts = SolveOptions()
    assert update_mu(0.05, 0.01, 5, opts) == 0.01
    assert update_mu(0.05, 1.0, 5, opts) == 0.025
    assert update_mu(0.05, 0.01, 3, opts) == 0.05
    assert update_mu(0.0, 3.0, 0, opts) == 0.0


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.integers(0, 100))
def test_update_mu_never_grows(mu, normF, k):
    new = update_mu(mu, normF, k, SolveOptions())
    assert 0 <= new <= mu
    if k % 5 == 0:
        assert new <= normF


def test_options_validation():
    for kw in ({"alpha_factor": 1.0}, {"rho": 0.0}, {"max_iters": 0}, {"mu_update_period": 0}):
        with pytest.raises(ValueError):
            SolveOptions(**kw)


def test_newton_step_empty_active_set():
    inst = make([[1.0]], [0.0])
    w = PrimalDualPoint([1.0], [2.0])
    part = core.partition_indices(w, inst)
    assert part.T.size == 0
    u, v = newton_step(w, part, 0.0, inst)
    np.testing.assert_allclose(u, [-1.0])
    np.testing.assert_allclose(v, [-2.0])


def test_newton_step_one_active_row():
    inst = make([[1.0]], [-1.0])
    w = PrimalDualPoint([1.0], [1.0])
    part = core.partition_indices(w, inst)
    assert part.T.tolist() == [0]
    u, v = newton_step(w, part, 0.0, inst)
    # [2 1; 1 0] (u, v) = (-3, 0)
    np.testing.assert_allclose(u, [0.0], atol=1e-14)
    np.testing.assert_allclose(v, [-3.0])


def test_one_dimensional_solve():
    inst = make([[1.0]], [-1.0])
    rep = solve(inst, PrimalDualPoint([0.0], [1.0]))
    assert rep.status is Status.CONVERGED
    assert rep.iterations == 1
    np.testing.assert_allclose(rep.x, [0.0], atol=1e-12)
    np.testing.assert_allclose(rep.z, [0.0], atol=1e-12)
    assert rep.certificate


def test_stationary_start_takes_no_steps():
    inst = make([[1.0]], [0.0])
    rep = solve(inst, PrimalDualPoint([0.0], [0.0]))
    assert rep.converged and rep.iterations == 0
    assert rep.residual_history == [0.0]
    assert rep.mu_history == []


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        solve(make(np.eye(2), np.zeros(2)), PrimalDualPoint([0.0], [0.0, 0.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.integers(1, 6))
def test_solve_invariants(seed, m, n):
    rng = np.random.default_rng(seed)
    inst = make(rng.standard_normal((m, n)), rng.standard_normal(m), lam=float(rng.uniform(0.5, 5)),
                tau=float(rng.uniform(0.5, 5)), d=rng.uniform(0.5, 2.0, n))
    seen = []
    rep = solve(inst, opts=SolveOptions(max_iters=60), callback=lambda k, w, p, r: seen.append(k))
    assert len(rep.residual_history) == rep.iterations + 1
    assert len(rep.mu_history) == rep.iterations
    assert seen == list(range(rep.iterations + 1))
    mus = np.array(rep.mu_history)
    assert np.all(mus >= 0) and np.all(np.diff(mus) <= 0)
    # mu only moves on refresh iterations
    for k in range(1, mus.size):
        if k % 5:
            assert mus[k] == mus[k - 1]
    if rep.converged:
        assert rep.residual_history[-1] < 1e-4
        assert rep.certificate
    # the tracked best can only improve on the starting point x = 0
    assert rep.best_objective <= inst.lam * np.count_nonzero(inst.b > 1e-4)


def test_default_mu_depends_on_shape():
    wide = make(np.ones((1, 3)), [-1.0])
    tall = make(np.ones((3, 1)), [-1.0, -1.0, -1.0])
    assert solve(wide, opts=SolveOptions(max_iters=1)).mu_history[0] <= 0.025
    assert solve(tall, opts=SolveOptions(max_iters=1)).mu_history[0] <= 2.5


def test_epsilon_schedule_halves_eps():
    f = SmoothedLq(q=0.5, eps=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroSolutionWarning)
        inst = ProblemInstance(f, np.array([[1.0, 1.0]]), np.array([0.05]), 1.0, 1.0)
    rep = solve(inst, opts=SolveOptions(max_iters=3, epsilon_schedule=True))
    assert f.eps == pytest.approx(0.5 / 2 ** rep.iterations)


def test_global_certificate_examples():
    assert global_opt_certificate(make(np.eye(2), np.zeros(2)), 2.0)
    assert not global_opt_certificate(make([[3.0]], [0.0]), 2.0)
    assert global_opt_certificate(make([[3.0]], [0.0]), math.inf)
    with pytest.raises(ValueError):
        global_opt_certificate(make([[1.0]], [0.0]), 0.0)
