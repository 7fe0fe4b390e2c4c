"""Integrator tests: conservation, closed-form orbits, sectioning, order."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from varpend.errors import DomainError, NumericalError
from varpend.integrator import (
    ANALYSIS_CONFIG,
    IntegratorConfig,
    integrate,
    poincare_map,
)
from varpend.model import Params, State, hamiltonian, params_from_config, rhs_angle

TWO_PI = 2.0 * math.pi


def test_config_validation():
    with pytest.raises(DomainError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        IntegratorConfig(max_step=1.0)
    with pytest.raises(DomainError):
        IntegratorConfig(abs_tol=0.1)


def test_small_amplitude_period(warm_kernel):
    # linearized pendulum: period -> 2 pi / omega as amplitude -> 0
    omega = 0.8
    p = Params(0.0, 0.0, omega)
    traj = integrate(State(0.01, 0.0, 0.0), p, 6.0 * TWO_PI / omega, dense=True)
    th, tau = traj.dense_theta, traj.dense_tau
    # upward zero crossings, linearly interpolated
    idx = np.nonzero((th[:-1] < 0.0) & (th[1:] >= 0.0))[0]
    cross = tau[idx] - th[idx] * (tau[idx + 1] - tau[idx]) / (th[idx + 1] - th[idx])
    periods = np.diff(cross)
    assert abs(np.mean(periods) - TWO_PI / omega) / (TWO_PI / omega) < 1e-3


def test_energy_conservation_100_periods(warm_kernel):
    p = Params(0.0, 0.0, 0.8)
    init = State(2.0, 0.0, 0.0)
    samples = poincare_map(init, p, 100)
    h0 = hamiltonian(init, p)
    hs = 0.5 * samples[:, 1] ** 2 - p.omega ** 2 * np.cos(samples[:, 0])
    assert np.max(np.abs(hs - h0)) < 1e-8


def test_separatrix_matches_closed_form(warm_kernel):
    # on the separatrix v = 2 omega cos(theta/2), theta = 2 arctan(sinh(omega tau))
    omega = 0.8
    p = Params(0.0, 0.0, omega)
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12)
    traj = integrate(State(0.0, 2.0 * omega, 0.0), p, 10.0 / omega, cfg, dense=True)
    ref = 2.0 * np.arctan(np.sinh(omega * traj.dense_tau))
    assert np.max(np.abs(traj.dense_theta - ref)) < 1e-6


def test_section_times_are_step_endpoints(warm_kernel):
    p = Params(0.25, 0.1, 0.7)
    init = State(0.3, 0.1, 0.5)
    traj = integrate(init, p, init.tau + 7 * TWO_PI, dense=True)
    expected = init.tau + TWO_PI * np.arange(8)
    assert np.array_equal(traj.tau, expected)
    # every section time was an accepted step endpoint, no interpolation
    for t in expected[1:]:
        assert np.any(traj.dense_tau == t)


def test_poincare_sample_count_and_first_row(warm_kernel):
    p = Params(0.2, 0.05, 0.9)
    init = State(0.4, -0.2, 1.0)
    pts = poincare_map(init, p, 13)
    assert pts.shape == (14, 2)
    assert pts[0, 0] == init.theta and pts[0, 1] == init.v


def test_equilibrium_is_fixed_point(warm_kernel):
    p = Params(0.0, 0.05, 0.8)
    pts = poincare_map(State(0.0, 0.0, 0.0), p, 5)
    assert np.all(pts == 0.0)


def test_damped_pendulum_sinks_to_equilibrium(warm_kernel):
    p = Params(0.0, 0.2, 0.8)
    pts = poincare_map(State(2.5, 0.0, 0.0), p, 300)
    th_f, v_f = pts[-1]
    m = round(th_f / TWO_PI)
    assert abs(th_f - TWO_PI * m) < 1e-6
    assert abs(v_f) < 1e-6


def test_convergence_order_at_least_five(warm_kernel):
    # fixed step sizes forced through max_step with loose tolerances
    p = Params(0.2, 0.05, 0.7)
    init = State(0.5, 0.0, 0.0)
    ref = integrate(init, p, TWO_PI,
                    IntegratorConfig(rel_tol=1e-13, abs_tol=1e-13)).final

    def end_error(h):
        cfg = IntegratorConfig(rel_tol=1e-2, abs_tol=1e-2,
                               max_step=h, initial_step=h)
        fin = integrate(init, p, TWO_PI, cfg).final
        return math.hypot(fin.theta - ref.theta, fin.v - ref.v)

    e1, e2 = end_error(math.pi / 4.0), end_error(math.pi / 8.0)
    ratio = e1 / e2
    assert ratio > 2.0 ** 4.5, f"order too low: e({math.pi/4:.3f})/e = {ratio}"


def test_time_reversal_symmetry(warm_kernel):
    # for eps = beta = 0 the flow is reversible through (theta, v) -> (theta, -v)
    p = Params(0.0, 0.0, 0.9)
    span = 20.0
    fwd = integrate(State(1.2, 0.3, 0.0), p, span).final
    back = integrate(State(fwd.theta, -fwd.v, 0.0), p, span).final
    assert back.theta == pytest.approx(1.2, abs=1e-7)
    assert back.v == pytest.approx(-0.3, abs=1e-7)


def test_blowup_guard(warm_kernel):
    p = Params(0.2, 0.05, 0.8)
    with pytest.raises(NumericalError, match="tau="):
        poincare_map(State(0.0, 1500.0, 0.0), p, 10)


def test_validation_of_horizon():
    p = Params(0.1, 0.05, 0.8)
    with pytest.raises(DomainError):
        integrate(State(0.0, 0.1, 5.0), p, 5.0)
    with pytest.raises(DomainError):
        poincare_map(State(0.0, 0.1, 0.0), p, -1)


def test_csv_export_roundtrip(tmp_path, warm_kernel):
    p = Params(0.15, 0.05, 0.8)
    traj = integrate(State(0.3, 0.0, 0.0), p, 3 * TWO_PI)
    out = traj.to_csv(tmp_path / "traj.csv")
    lines = out.read_text().splitlines()
    header = [ln[2:] for ln in lines if ln.startswith("# ")]
    assert params_from_config("\n".join(header)) == p
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "tau,theta,v"
    data = np.array([[float(x) for x in ln.split(",")] for ln in body[1:]])
    assert data.shape == (4, 3)
    assert np.array_equal(data[:, 0], traj.tau)


def test_agrees_with_scipy_reference(warm_kernel):
    p = Params(0.2, 0.05, 0.7)
    init = State(0.1, 0.0, 0.0)
    mine = poincare_map(init, p, 10)[-1]

    def rhs(tau, y):
        return rhs_angle(State(y[0], y[1], tau), p)

    sol = solve_ivp(rhs, (0.0, 10 * TWO_PI), [init.theta, init.v],
                    method="DOP853", rtol=1e-12, atol=1e-12,
                    max_step=math.pi / 4.0)
    assert mine[0] == pytest.approx(sol.y[0, -1], abs=1e-8)
    assert mine[1] == pytest.approx(sol.y[1, -1], abs=1e-8)
