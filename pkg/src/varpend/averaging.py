"""First-order averaging of the sector velocity for slow-frequency rotations.

For small omega the momentum form averages over the resonance super-period
2*pi*r*q into a one-dimensional slow equation ds/dT = omega^2 F(s) with

    F(s) = -(beta/omega) s - A(s) cos(theta) - B(s) sin(theta),

built on the clock integral Phi(tau) = int_0^tau (1 + eps*phi)^-2 d eta.
Steady r:q rotations have sector velocity s0 fixed by the resonance identity
2*pi*r = s0*q*Phi(2*pi); the steady phase comes in two branches, exists
whenever omega/beta >= s0/sqrt(A^2+B^2), and each branch is asymptotically
stable iff F'(s0) < 0.

Phi is tabulated once per (eps, excitation) by cumulative high-order panel
quadrature with monotone cubic interpolation, then shared read-only by every
integral here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError
from .model import COSINE, Excitation, Params

__all__ = [
    "PhiTable",
    "AveragedRotation",
    "compute_phi",
    "steady_sector_velocity",
    "ab_integrals",
    "ab_derivatives",
    "solve_branches",
    "stability",
    "existence_threshold",
    "existence_boundary",
    "approximate_rotation_solution",
    "export_branches_csv",
    "DEFAULT_PHI_SAMPLES",
    "MARGINAL_FPRIME",
]

TWO_PI = 2.0 * math.pi

DEFAULT_PHI_SAMPLES = 4096

# |F'(s0)| below this is reported as marginal (None), not stable/unstable
MARGINAL_FPRIME = 1e-10

# 16 panels x 8 Gauss nodes = 128 quadrature nodes per excitation period
_PANELS_PER_PERIOD = 16
_GL_NODES = 8


@lru_cache(maxsize=4)
def _gl_rule(n_nodes: int):
    return np.polynomial.legendre.leggauss(n_nodes)


def _panel_grid(a: float, b: float, n_panels: int):
    """Flattened composite Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _gl_rule(_GL_NODES)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _check_rq(r: int, q: int) -> None:
    if r < 1 or q < 1 or int(r) != r or int(q) != q:
        raise DomainError(f"resonance indices must be naturals, got {r}:{q}")
    if math.gcd(int(r), int(q)) != 1:
        raise DomainError(f"resonance indices must be coprime, got {r}:{q}")


@dataclass(frozen=True, eq=False)
class PhiTable:
    """Clock integral Phi on a cumulative-quadrature grid over one period.

    Phi(0) = 0, Phi is strictly increasing, and values beyond [0, 2*pi]
    follow the exact extension Phi(tau + 2*pi) = Phi(tau) + Phi(2*pi).
    """

    eps: float
    excitation: Excitation
    n_intervals: int
    taus: np.ndarray
    values: np.ndarray
    phi_2pi: float
    _interp: PchipInterpolator

    def __call__(self, tau):
        arr = np.asarray(tau, dtype=float)
        m = np.floor(arr / TWO_PI)
        reduced = arr - TWO_PI * m
        out = m * self.phi_2pi + self._interp(reduced)
        return float(out) if arr.ndim == 0 else out


@lru_cache(maxsize=16)
def _phi_table(eps: float, excitation: Excitation, n: int) -> PhiTable:
    taus = np.linspace(0.0, TWO_PI, n + 1)
    nodes, weights = _panel_grid(0.0, TWO_PI, n)
    integrand = 1.0 / (1.0 + eps * excitation.value(nodes)) ** 2
    per_interval = (integrand * weights).reshape(n, _GL_NODES).sum(axis=1)
    values = np.concatenate(([0.0], np.cumsum(per_interval)))
    interp = PchipInterpolator(taus, values)
    return PhiTable(eps, excitation, n, taus, values, float(values[-1]), interp)


def compute_phi(p: Params, n_samples: int = DEFAULT_PHI_SAMPLES) -> PhiTable:
    """Tabulate Phi for these parameters (cached per eps and excitation).

    Params guarantees 1 + eps*phi > 0, so the integrand is smooth and
    positive and the table is strictly increasing.
    """
    if n_samples < 16:
        raise DomainError(f"need at least 16 intervals, got {n_samples}")
    return _phi_table(p.eps, p.excitation, n_samples)


def steady_sector_velocity(p: Params, r: int, q: int) -> float:
    """s0 = (r/q) * 2*pi / Phi(2*pi); satisfies 2*pi*r = s0*q*Phi(2*pi)."""
    _check_rq(r, q)
    return (r / q) * TWO_PI / compute_phi(p).phi_2pi


def _ab(table: PhiTable, s: float, r: int, q: int) -> tuple[float, float]:
    span = TWO_PI * r * q
    nodes, weights = _panel_grid(0.0, span, _PANELS_PER_PERIOD * r * q)
    factor = 1.0 + table.eps * table.excitation.value(nodes)
    phase = s * table(nodes)
    a = float(np.sum(weights * factor * np.sin(phase))) / span
    b = float(np.sum(weights * factor * np.cos(phase))) / span
    return a, b


def _ab_prime(table: PhiTable, s: float, r: int, q: int) -> tuple[float, float]:
    span = TWO_PI * r * q
    nodes, weights = _panel_grid(0.0, span, _PANELS_PER_PERIOD * r * q)
    factor = 1.0 + table.eps * table.excitation.value(nodes)
    phi = table(nodes)
    a_prime = float(np.sum(weights * factor * phi * np.cos(s * phi))) / span
    b_prime = -float(np.sum(weights * factor * phi * np.sin(s * phi))) / span
    return a_prime, b_prime


def ab_integrals(p: Params, s: float, r: int, q: int) -> tuple[float, float]:
    """Mean forcing components over the super-period 2*pi*r*q.

    A = <(1+eps*phi) sin(s*Phi)>, B = <(1+eps*phi) cos(s*Phi)>.
    """
    _check_rq(r, q)
    return _ab(compute_phi(p), s, r, q)


def ab_derivatives(p: Params, s: float, r: int, q: int) -> tuple[float, float]:
    """dA/ds and dB/ds: the same means with an extra Phi factor rotated."""
    _check_rq(r, q)
    return _ab_prime(compute_phi(p), s, r, q)


@dataclass(frozen=True)
class AveragedRotation:
    """Steady r:q rotation of the averaged slow dynamics.

    When exists is False the branch fields are None. stable_* is True/False
    by the sign of F'(s0), or None when |F'(s0)| < MARGINAL_FPRIME (the
    bifurcation set itself, reported as marginal rather than guessed).
    """

    r: int
    q: int
    s0: float
    a: float
    b: float
    threshold_omega_over_beta: float
    exists: bool
    theta_plus: float | None
    theta_minus: float | None
    stable_plus: bool | None
    stable_minus: bool | None

    def residual(self, theta: float, beta_over_omega: float) -> float:
        """Steady-phase equation residual A cos + B sin + (beta/omega) s0."""
        return self.a * math.cos(theta) + self.b * math.sin(theta) \
            + beta_over_omega * self.s0


def _judge_branch(beta_over_omega: float, a_prime: float, b_prime: float,
                  theta: float) -> bool | None:
    fprime = -beta_over_omega - a_prime * math.cos(theta) \
        - b_prime * math.sin(theta)
    if abs(fprime) < MARGINAL_FPRIME:
        return None
    return fprime < 0.0


def solve_branches(p: Params, r: int, q: int) -> AveragedRotation:
    """Existence, phase branches, and stability of the steady r:q rotation.

    The two phases are theta0 = theta* + pi +- arccos((beta/omega) s0 / R)
    with R = sqrt(A^2 + B^2) and theta* = sign(B) arccos(A/R) (sign(0) taken
    as +1), reported in [0, 2*pi).
    """
    _check_rq(r, q)
    table = compute_phi(p)
    s0 = (r / q) * TWO_PI / table.phi_2pi
    a, b = _ab(table, s0, r, q)
    radius = math.hypot(a, b)
    threshold = s0 / radius if radius > 0.0 else math.inf
    ratio = p.beta_over_omega * s0
    if ratio > radius:
        return AveragedRotation(r, q, s0, a, b, threshold, False,
                                None, None, None, None)
    if radius == 0.0:  # pragma: no cover - ratio > 0 always wins above
        raise DomainError("averaged forcing vanishes; phase equation degenerate")
    theta_star = math.atan2(b, a)
    delta = math.acos(min(ratio / radius, 1.0))
    theta_plus = (theta_star + math.pi + delta) % TWO_PI
    theta_minus = (theta_star + math.pi - delta) % TWO_PI
    a_prime, b_prime = _ab_prime(table, s0, r, q)
    bw = p.beta_over_omega
    return AveragedRotation(
        r, q, s0, a, b, threshold, True, theta_plus, theta_minus,
        _judge_branch(bw, a_prime, b_prime, theta_plus),
        _judge_branch(bw, a_prime, b_prime, theta_minus))


def stability(p: Params, rot: AveragedRotation) -> tuple[bool | None, bool | None]:
    """Re-evaluate branch stability: F'(s0) < 0 with
    F'(s0) = -beta/omega - A'(s0) cos(theta0) - B'(s0) sin(theta0)."""
    if not rot.exists:
        raise DomainError("rotation does not exist; no branches to judge")
    a_prime, b_prime = ab_derivatives(p, rot.s0, rot.r, rot.q)
    bw = p.beta_over_omega
    return (_judge_branch(bw, a_prime, b_prime, rot.theta_plus),
            _judge_branch(bw, a_prime, b_prime, rot.theta_minus))


def existence_threshold(eps: float, r: int, q: int,
                        excitation: Excitation = COSINE) -> float:
    """Minimal omega/beta at which the steady r:q rotation exists.

    Depends only on eps and the excitation shape; math.inf when the mean
    forcing underflows to zero (no finite ratio reaches existence).
    """
    _check_rq(r, q)
    if not 0.0 <= eps or eps * excitation.sup_bound() >= 1.0:
        raise DomainError(f"eps out of range for this excitation: {eps!r}")
    table = _phi_table(eps, excitation, DEFAULT_PHI_SAMPLES)
    s0 = (r / q) * TWO_PI / table.phi_2pi
    a, b = _ab(table, s0, r, q)
    radius = math.hypot(a, b)
    return s0 / radius if radius > 0.0 else math.inf


def existence_boundary(r: int, q: int, eps_grid,
                       excitation: Excitation = COSINE) -> np.ndarray:
    """omega/beta existence thresholds sampled over an eps grid."""
    return np.array([existence_threshold(float(e), r, q, excitation)
                     for e in np.asarray(eps_grid, dtype=float)])


def approximate_rotation_solution(p: Params, rot: AveragedRotation,
                                  branch: str = "+"):
    """First-order steady rotation tau -> theta = s0*Phi(tau) + theta0.

    Advances by exactly 2*pi*r per 2*pi*q by the resonance identity.
    """
    if not rot.exists:
        raise DomainError("rotation does not exist; no approximate solution")
    if branch not in ("+", "-"):
        raise DomainError(f"branch must be '+' or '-', got {branch!r}")
    theta0 = rot.theta_plus if branch == "+" else rot.theta_minus
    table = compute_phi(p)
    s0 = rot.s0

    def solution(tau):
        return s0 * table(tau) + theta0

    return solution


def _fmt_stable(flag: bool | None) -> str:
    if flag is None:
        return "marginal"
    return "true" if flag else "false"


def export_branches_csv(path, entries: Iterable[tuple[float, AveragedRotation]]) -> Path:
    """Branch table as CSV rows of (eps, rotation); absent branches blank."""
    path = Path(path)
    lines = ["eps,r,q,s0,threshold_omega_over_beta,theta_plus,theta_minus,"
             "stable_plus,stable_minus"]
    for eps, rot in entries:
        if rot.exists:
            tail = (f"{rot.theta_plus!r},{rot.theta_minus!r},"
                    f"{_fmt_stable(rot.stable_plus)},{_fmt_stable(rot.stable_minus)}")
        else:
            tail = ",,,"
        lines.append(f"{eps!r},{rot.r},{rot.q},{rot.s0!r},"
                     f"{rot.threshold_omega_over_beta!r},{tail}")
    path.write_text("\n".join(lines) + "\n")
    return path
