"""Adaptive integration with exact Poincare sectioning.

Wraps the compiled Dormand-Prince 5(4) kernel: trajectories are produced in
the momentum form and reported in the angle form, with section samples landed
exactly on tau0 + 2*pi*n by endpoint forcing rather than interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernel
from .errors import DomainError, NumericalError
from .model import MomentumState, Params, State, params_to_config

__all__ = ["IntegratorConfig", "Trajectory", "integrate", "poincare_map",
           "ANALYSIS_CONFIG", "SWEEP_CONFIG"]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = math.pi / 4.0
    initial_step: float = 1e-3

    def __post_init__(self):
        for tol in (self.rel_tol, self.abs_tol):
            if not 0.0 < tol <= 1e-2:
                raise DomainError(f"tolerances must lie in (0, 1e-2], got {tol!r}")
        if not 0.0 < self.max_step <= math.pi / 4.0 + 1e-15:
            raise DomainError(f"max step must lie in (0, pi/4], got {self.max_step!r}")
        if self.initial_step <= 0.0:
            raise DomainError("initial step must be positive")


ANALYSIS_CONFIG = IntegratorConfig()
SWEEP_CONFIG = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-8)


@dataclass(frozen=True)
class Trajectory:
    """Section samples (always) and dense accepted-step samples (optional).

    Section times equal init.tau + 2*pi*n exactly; theta is unwrapped.
    """

    params: Params
    initial: State
    config: IntegratorConfig
    tau: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    final: State
    dense_tau: np.ndarray | None = None
    dense_theta: np.ndarray | None = None
    dense_v: np.ndarray | None = None

    def sections(self) -> np.ndarray:
        """(n, 2) array of (theta, v) at the section times."""
        return np.column_stack([self.theta, self.v])

    def to_csv(self, path) -> Path:
        """Write tau,theta,v rows (dense if recorded, else sections), with the
        serialized parameters as comment header lines."""
        path = Path(path)
        if self.dense_tau is not None:
            taus, thetas, vs = self.dense_tau, self.dense_theta, self.dense_v
        else:
            taus, thetas, vs = self.tau, self.theta, self.v
        lines = ["# " + ln for ln in params_to_config(self.params).splitlines()]
        lines.append("tau,theta,v")
        for t, th, v in zip(taus, thetas, vs):
            lines.append(f"{float(t)!r},{float(th)!r},{float(v)!r}")
        path.write_text("\n".join(lines) + "\n")
        return path


class _RawResult:
    __slots__ = ("theta", "v", "status", "fail_tau", "dense", "vmin", "vmax")

    def __init__(self, theta, v, status, fail_tau, dense, vmin, vmax):
        self.theta = theta
        self.v = v
        self.status = status
        self.fail_tau = fail_tau
        self.dense = dense
        self.vmin = vmin
        self.vmax = vmax


def _run_kernel(init: State, p: Params, stops: np.ndarray, cfg: IntegratorConfig,
                track_from: float = math.inf, dense_cap: int = 0) -> _RawResult:
    """Low-level driver; returns raw kernel output without raising.

    dense_cap > 0 records accepted steps, growing the buffer on overflow
    (the rerun is deterministic, so restarting is exact).
    """
    ms = MomentumState.from_state(init, p)
    hidx, hcos, hsin = p.excitation.arrays()
    cap = dense_cap
    while True:
        dense = np.empty((cap, 3)) if cap > 0 else np.empty((0, 3))
        out = _kernel.integrate_stops(
            ms.theta, ms.s, ms.tau, stops, p.eps, p.beta, p.omega,
            hidx, hcos, hsin, cfg.rel_tol, cfg.abs_tol, cfg.max_step,
            cfg.initial_step, track_from, dense, cap > 0)
        theta, v, status, fail_tau, n_dense, vmin, vmax = out
        if status == _kernel.DENSE_OVERFLOW:
            cap = max(2 * cap, 1 << 16)
            if cap > (1 << 26):
                raise NumericalError("dense trajectory buffer exceeds 64M samples")
            continue
        return _RawResult(theta, v, status, fail_tau,
                          dense[:n_dense] if cap > 0 else None, vmin, vmax)


def _raise_for_status(res: _RawResult) -> None:
    if res.status == _kernel.BLOWUP:
        raise NumericalError(
            f"velocity magnitude exceeded {1e3:g} at tau={res.fail_tau!r}; "
            "the dissipative model cannot do this, check the configuration")
    if res.status == _kernel.STEP_UNDERFLOW:
        raise NumericalError(f"step size underflow at tau={res.fail_tau!r}")


def integrate(init: State, p: Params, up_to: float,
              cfg: IntegratorConfig = ANALYSIS_CONFIG,
              dense: bool = False) -> Trajectory:
    """Integrate the angle-form equations from init.tau to up_to.

    Section samples at init.tau + 2*pi*n are always collected; dense=True
    additionally records every accepted step.
    """
    if up_to <= init.tau:
        raise DomainError("up_to must exceed the initial time")
    n_sections = int(math.floor((up_to - init.tau) / TWO_PI + 1e-12))
    stops = init.tau + TWO_PI * np.arange(1, n_sections + 1)
    # land on up_to as well unless it is (floating-point) a section time
    if stops.size == 0 or stops[-1] < up_to:
        stops = np.append(stops, up_to)
        extra_final = True
    else:
        extra_final = False
    res = _run_kernel(init, p, stops, cfg,
                      dense_cap=(1 << 16) if dense else 0)
    _raise_for_status(res)
    sec_tau = np.concatenate([[init.tau], stops[:-1] if extra_final else stops])
    sec_theta = np.concatenate([[init.theta], res.theta[:-1] if extra_final else res.theta])
    sec_v = np.concatenate([[init.v], res.v[:-1] if extra_final else res.v])
    final = State(float(res.theta[-1]), float(res.v[-1]), float(stops[-1]))
    dense_cols = (None, None, None)
    if dense:
        dense_cols = (res.dense[:, 0].copy(), res.dense[:, 1].copy(),
                      res.dense[:, 2].copy())
    return Trajectory(params=p, initial=init, config=cfg,
                      tau=sec_tau, theta=sec_theta, v=sec_v, final=final,
                      dense_tau=dense_cols[0], dense_theta=dense_cols[1],
                      dense_v=dense_cols[2])


def poincare_map(init: State, p: Params, n_periods: int,
                 cfg: IntegratorConfig = ANALYSIS_CONFIG) -> np.ndarray:
    """(n_periods+1, 2) array of (theta, v) at tau = init.tau + 2*pi*n.

    Row 0 is the initial state itself.
    """
    if n_periods < 0:
        raise DomainError("n_periods must be nonnegative")
    stops = init.tau + TWO_PI * np.arange(1, n_periods + 1)
    res = _run_kernel(init, p, stops, cfg)
    _raise_for_status(res)
    out = np.empty((n_periods + 1, 2))
    out[0] = (init.theta, init.v)
    out[1:, 0] = res.theta
    out[1:, 1] = res.v
    return out
