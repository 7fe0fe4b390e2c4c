"""
Model basics: the pendulum with periodically varying length
============================================================

State is (theta, v) sampled in the excitation phase tau. The length factor
is 1 + eps*cos(tau), so eps is the relative pumping amplitude, omega the
ratio of natural to excitation frequency, beta the scaled damping.
"""

import numpy as np

from varpend import ANALYSIS_CONFIG, Params, State, integrate

# hanging rest is an exact fixed point for every pumping amplitude: the
# parametric force vanishes with sin(theta)
p = Params(eps=0.3, beta=0.05, omega=0.8)
rest = integrate(State(theta=0.0, v=0.0, tau=0.0), p, up_to=40 * np.pi)
print("rest stays at rest:", np.max(np.abs(rest.theta)), "rad")

# a small swing decays toward it
swing = integrate(State(theta=0.4, v=0.0, tau=0.0), p, up_to=200 * np.pi,
                  cfg=ANALYSIS_CONFIG)
print("swing amplitude after 100 periods:", abs(swing.final.theta))

# strong pumping from the same start instead tumbles over the top;
# sections (one row per excitation period) show the angle running away
tumble = integrate(State(theta=0.4, v=0.0, tau=0.0),
                   Params(eps=0.3, beta=0.05, omega=0.6), up_to=200 * np.pi)
print("turns accumulated under strong pumping:",
      round(float(tumble.final.theta) / (2 * np.pi)))

# dense output records every accepted step for plotting
dense = integrate(State(0.4, 0.0, 0.0), p, up_to=8 * np.pi, dense=True)
print("accepted steps over 4 periods:", dense.dense_tau.size)
