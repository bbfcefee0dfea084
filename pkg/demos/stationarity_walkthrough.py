"""What the solver looks at on each step, on a tiny problem.

Not every small instance converges: full Newton steps can cycle between
two active sets. This one settles with two active rows.

min ||x||^2 + lam * #{i : (A x + b)_i > 0} with three rows in the plane.
We print the index sets, the residual and mu per iteration, then confirm
the final point with the independent stationarity certificate.
"""
import numpy as np

from nm01 import PrimalDualPoint, ProblemInstance, QuadraticDiag, core, solve

A = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
b = np.array([0.4, -1.0, 0.1])
inst = ProblemInstance(QuadraticDiag(np.ones(2)), A, b, lam=2.0, tau=1.0)
print(f"prox threshold on y + tau z: {2 * inst.threshold:.4f}")


def show(k, w, part, normF):
    print(f"k={k}: x={np.round(w.x, 4)} z={np.round(w.z, 4)} y={np.round(inst.y(w.x), 4)} "
          f"S={part.S.tolist()} E={part.E.tolist()} O={part.O.tolist()} T={part.T.tolist()} |F|={normF:.2e}")


rep = solve(inst, PrimalDualPoint(np.zeros(2), np.ones(3)), callback=show)
print(f"status {rep.status.value} after {rep.iterations} steps; mu per step {np.round(rep.mu_history, 4).tolist()}")
# the report certifies at 10 * tol_F; at 1e-8 the last step is not yet tight enough
for tol in (1e-3, 1e-8):
    cert = core.p_stationarity_check(rep.w, inst, tol=tol)
    print(f"certificate at tol {tol:g}: stationary={cert.stationary}")
print(f"objective, violations counted above tol_F: {rep.objective_value:.4f}")
print(f"objective, any positive y counted:          {core.zero_one_objective(rep.x, inst):.4f}")

# the 1-D case resolves in a single step
one = ProblemInstance(QuadraticDiag([1.0]), np.eye(1), np.array([-1.0]), 1.0, 1.0)
r1 = solve(one, PrimalDualPoint([0.0], [1.0]))
print(f"1-D example: {r1.iterations} step, x={r1.x}, z={r1.z}, residuals {r1.residual_history}")
