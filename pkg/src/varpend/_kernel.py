"""Compiled Dormand-Prince 5(4) integrator for the momentum-form equations.

One kernel serves single trajectories, Poincare sectioning, classification,
and the parameter sweeps. It integrates (theta, s) with s the sector velocity,
lands exactly on the supplied stop times by endpoint forcing (the stop time is
assigned, not accumulated), and tracks the extremes of v = s/(1+eps*phi)^2
after a configurable time so callers can detect velocity sign reversals.

The kernel releases the GIL, so sweep cells parallelize with plain threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# classic DP54 tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# status codes shared with the python wrapper
OK = 0
BLOWUP = 1
STEP_UNDERFLOW = 2
DENSE_OVERFLOW = 3

_V_GUARD = 1.0e3
_MAX_STEPS = 50_000_000


@njit(cache=True, nogil=True)
def _phi_pair(tau, hidx, hcos, hsin):
    """phi(tau) and phi'(tau) for the trigonometric length law."""
    p = 0.0
    dp = 0.0
    for j in range(hidx.shape[0]):
        n = hidx[j]
        c = np.cos(n * tau)
        s = np.sin(n * tau)
        p += hcos[j] * c + hsin[j] * s
        dp += -hcos[j] * n * s + hsin[j] * n * c
    return p, dp


@njit(cache=True, nogil=True)
def _rhs(tau, theta, s, eps, beta, omega, hidx, hcos, hsin):
    p, _ = _phi_pair(tau, hidx, hcos, hsin)
    el = 1.0 + eps * p
    dtheta = s / (el * el)
    ds = -beta * omega * s - omega * omega * el * np.sin(theta)
    return dtheta, ds


@njit(cache=True, nogil=True)
def integrate_stops(theta0, s0, tau0, stops, eps, beta, omega,
                    hidx, hcos, hsin, rtol, atol, hmax, h0,
                    track_from, dense, record_dense):
    """Integrate from (theta0, s0, tau0), landing exactly on each stop time.

    Returns (stop_theta, stop_v, status, fail_tau, n_dense, vmin, vmax).
    dense rows are (tau, theta, v) at accepted steps when record_dense;
    vmin/vmax cover accepted-step velocities with tau >= track_from.
    """
    n_stops = stops.shape[0]
    out_theta = np.empty(n_stops)
    out_v = np.empty(n_stops)
    theta = theta0
    s = s0
    tau = tau0

    p0, _ = _phi_pair(tau0, hidx, hcos, hsin)
    el0 = 1.0 + eps * p0
    v = s / (el0 * el0)
    vmin = np.inf
    vmax = -np.inf
    if tau >= track_from:
        vmin = v
        vmax = v
    n_dense = 0
    if record_dense:
        if dense.shape[0] == 0:
            return out_theta, out_v, DENSE_OVERFLOW, tau, 0, vmin, vmax
        dense[0, 0] = tau
        dense[0, 1] = theta
        dense[0, 2] = v
        n_dense = 1

    h = min(h0, hmax)
    err_old = 1.0e-4
    k1t, k1s = _rhs(tau, theta, s, eps, beta, omega, hidx, hcos, hsin)
    steps = 0

    for i in range(n_stops):
        tend = stops[i]
        while tau < tend:
            steps += 1
            if steps > _MAX_STEPS:
                return out_theta, out_v, STEP_UNDERFLOW, tau, n_dense, vmin, vmax
            if h > hmax:
                h = hmax
            hit = False
            h_natural = h
            if tau + h >= tend:
                h = tend - tau
                hit = True

            k2t, k2s = _rhs(tau + _C2 * h, theta + h * _A21 * k1t,
                            s + h * _A21 * k1s,
                            eps, beta, omega, hidx, hcos, hsin)
            k3t, k3s = _rhs(tau + _C3 * h,
                            theta + h * (_A31 * k1t + _A32 * k2t),
                            s + h * (_A31 * k1s + _A32 * k2s),
                            eps, beta, omega, hidx, hcos, hsin)
            k4t, k4s = _rhs(tau + _C4 * h,
                            theta + h * (_A41 * k1t + _A42 * k2t + _A43 * k3t),
                            s + h * (_A41 * k1s + _A42 * k2s + _A43 * k3s),
                            eps, beta, omega, hidx, hcos, hsin)
            k5t, k5s = _rhs(tau + _C5 * h,
                            theta + h * (_A51 * k1t + _A52 * k2t + _A53 * k3t
                                         + _A54 * k4t),
                            s + h * (_A51 * k1s + _A52 * k2s + _A53 * k3s
                                     + _A54 * k4s),
                            eps, beta, omega, hidx, hcos, hsin)
            k6t, k6s = _rhs(tau + h,
                            theta + h * (_A61 * k1t + _A62 * k2t + _A63 * k3t
                                         + _A64 * k4t + _A65 * k5t),
                            s + h * (_A61 * k1s + _A62 * k2s + _A63 * k3s
                                     + _A64 * k4s + _A65 * k5s),
                            eps, beta, omega, hidx, hcos, hsin)
            theta_new = theta + h * (_B1 * k1t + _B3 * k3t + _B4 * k4t
                                     + _B5 * k5t + _B6 * k6t)
            s_new = s + h * (_B1 * k1s + _B3 * k3s + _B4 * k4s
                             + _B5 * k5s + _B6 * k6s)
            k7t, k7s = _rhs(tau + h, theta_new, s_new,
                            eps, beta, omega, hidx, hcos, hsin)

            et = h * (_E1 * k1t + _E3 * k3t + _E4 * k4t + _E5 * k5t
                      + _E6 * k6t + _E7 * k7t)
            es = h * (_E1 * k1s + _E3 * k3s + _E4 * k4s + _E5 * k5s
                      + _E6 * k6s + _E7 * k7s)
            sc_t = atol + rtol * max(abs(theta), abs(theta_new))
            sc_s = atol + rtol * max(abs(s), abs(s_new))
            err = np.sqrt(0.5 * ((et / sc_t) ** 2 + (es / sc_s) ** 2))

            if err <= 1.0:
                tau = tend if hit else tau + h
                theta = theta_new
                s = s_new
                k1t, k1s = k7t, k7s  # first-same-as-last
                pn, _ = _phi_pair(tau, hidx, hcos, hsin)
                eln = 1.0 + eps * pn
                v = s / (eln * eln)
                if abs(v) > _V_GUARD:
                    return out_theta, out_v, BLOWUP, tau, n_dense, vmin, vmax
                if tau >= track_from:
                    if v < vmin:
                        vmin = v
                    if v > vmax:
                        vmax = v
                if record_dense:
                    if n_dense >= dense.shape[0]:
                        return (out_theta, out_v, DENSE_OVERFLOW, tau,
                                n_dense, vmin, vmax)
                    dense[n_dense, 0] = tau
                    dense[n_dense, 1] = theta
                    dense[n_dense, 2] = v
                    n_dense += 1
                if hit:
                    # a section-forced short step says nothing about scale
                    h = h_natural
                    continue
                if err < 1.0e-30:
                    err = 1.0e-30
                fac = 0.9 * err ** (-0.7 / 5.0) * err_old ** (0.4 / 5.0)
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
                err_old = err
            else:
                fac = 0.9 * err ** (-0.2)
                if fac < 0.2:
                    fac = 0.2
            h *= fac
            if h < 1.0e-14 * max(1.0, abs(tau)):
                return out_theta, out_v, STEP_UNDERFLOW, tau, n_dense, vmin, vmax
        out_theta[i] = theta
        out_v[i] = v
    return out_theta, out_v, OK, tau, n_dense, vmin, vmax
