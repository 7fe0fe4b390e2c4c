"""
Averaged rotations at slow pumping
==================================

For omega well below 1 the angular momentum s varies slowly; averaging over
excitation periods gives steady 1:1 rotations as roots of a one-dimensional
balance. Two branches appear together at the existence threshold and only
the plus branch can be stable. A direct simulation seeded on each branch
confirms the verdicts.
"""

import numpy as np

from varpend import (ClassifierConfig, Params, State,
                     approximate_rotation_solution, classify,
                     existence_threshold, integrate, solve_branches)

p = Params(eps=0.3, beta=0.0025, omega=0.05)
print("omega/beta =", p.omega / p.beta,
      " existence threshold =", round(existence_threshold(0.3, 1, 1), 3))

rot = solve_branches(p, r=1, q=1)
print(f"steady sector velocity s0 = {rot.s0:.6f}")
print(f"plus branch  theta0 = {rot.theta_plus:.4f}  stable = {rot.stable_plus}")
print(f"minus branch theta0 = {rot.theta_minus:.4f}  stable = {rot.stable_minus}")

# seed a full simulation on each branch and track its drift from the
# averaged prediction over 50 excitation periods
factor = p.length_factor(0.0) ** 2
for branch, theta0 in (("+", rot.theta_plus), ("-", rot.theta_minus)):
    approx = approximate_rotation_solution(p, rot, branch)
    traj = integrate(State(theta0, rot.s0 / factor, 0.0), p, up_to=100 * np.pi)
    drift = float(np.max(np.abs(traj.theta - approx(traj.tau))))
    print(f"branch {branch}: max drift over 50 periods = {drift:.3f} rad")

# the slow spiral toward the stable rotation takes thousands of periods,
# hence the long transient before sampling
slow = ClassifierConfig(transient_periods=20000, sample_periods=50)
label = classify(State(rot.theta_plus, rot.s0 / factor, 0.0), p, slow)
print("classifier verdict for the plus seed:",
      f"{label.kind} {label.r}:{label.q}")
