"""Melnikov distances and bifurcation thresholds for the three orbit families.

The unperturbed pendulum at frequency omega has oscillations (modulus k < 1),
rotations (k > 1), and the separatrix between them. Against the cosine length
law, the leading-order Melnikov distance along each orbit family reduces to

    M(tau0) = amplitude * sin(tau0) + offset

with amplitude proportional to eps and offset proportional to -beta, so the
sign-change (bifurcation) condition is eps/beta > threshold.

Closed forms exist where the perturbation integrals collapse to complete
elliptic integrals: the homoclinic orbit, oscillatory resonances with p = 1
and even q, and rotational resonances with r = 1 (the oscillating component
of the integral vanishes in every other case). The general resonance is
available through the quadrature route, which doubles as the independent
oracle for the closed forms. Everything here assumes the cosine excitation;
the expressions match model.perturbation_g1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .elliptic import (
    Modulus,
    complete_integrals,
    jacobi_from_complement,
    solve_oscillatory_modulus,
    solve_rotational_modulus,
)
from .errors import DomainError

__all__ = [
    "ResonanceSpec",
    "MelnikovResult",
    "separatrix_orbit",
    "oscillatory_orbit",
    "rotational_orbit",
    "homoclinic_melnikov",
    "homoclinic_threshold",
    "homoclinic_result",
    "subharmonic_osc_melnikov",
    "osc_threshold",
    "oscillatory_result",
    "subharmonic_rot_melnikov",
    "rot_threshold",
    "rotational_result",
    "homoclinic_melnikov_quadrature",
    "subharmonic_melnikov_quadrature",
]

# sech^2 < 1e-34 past this point; the homoclinic integrand is pure noise there
SECH_CUTOFF = 40.0

_SINH_OVERFLOW = 710.0


def _sinh_or_inf(x: float) -> float:
    # an overflowing sinh means the threshold is unreachable, not an error
    return math.sinh(x) if x < _SINH_OVERFLOW else math.inf


def _require_omega(omega: float) -> None:
    if not omega > 0.0:
        raise DomainError(f"orbit frequency must be positive, got {omega!r}")


@dataclass(frozen=True)
class ResonanceSpec:
    """A p:q (oscillations per forcing period) or r:q (rotations) resonance.

    kind is "oscillatory" or "rotational"; first is p or r respectively.
    """

    kind: str
    first: int
    q: int

    def __post_init__(self) -> None:
        if self.kind not in ("oscillatory", "rotational"):
            raise DomainError(f"unknown resonance kind {self.kind!r}")
        if self.first < 1 or self.q < 1:
            raise DomainError(
                f"resonance indices must be naturals, got {self.first}:{self.q}")
        if math.gcd(self.first, self.q) != 1:
            raise DomainError(
                f"resonance indices must be coprime, got {self.first}:{self.q}")

    def solve_modulus(self, omega: float) -> Modulus | None:
        """Orbit modulus locking this resonance at frequency omega.

        None when an oscillatory resonance does not exist; rotational
        resonances always do.
        """
        if self.kind == "oscillatory":
            return solve_oscillatory_modulus(omega, self.first, self.q)
        return solve_rotational_modulus(omega, self.first, self.q)


@dataclass(frozen=True)
class MelnikovResult:
    """Coefficients of M(tau0) = amplitude*sin(tau0) + offset.

    threshold_ratio is the eps/beta value at which the two terms balance;
    sign_changing holds exactly when eps/beta exceeds it.
    """

    amplitude: float
    offset: float
    threshold_ratio: float

    @property
    def sign_changing(self) -> bool:
        return abs(self.amplitude) > abs(self.offset)

    def distance(self, tau0: float) -> float:
        return self.amplitude * math.sin(tau0) + self.offset


# ---------------------------------------------------------------------------
# unperturbed orbits, tau -> (theta, v)

def separatrix_orbit(omega: float, tau0: float, branch: int = 1):
    """Separatrix orbit centred at tau0: v = 2*omega*cos(theta/2).

    branch +1 runs from -pi to pi with v > 0, branch -1 is its mirror.
    """
    _require_omega(omega)
    if branch not in (1, -1):
        raise DomainError(f"branch must be +1 or -1, got {branch!r}")

    def orbit(tau):
        arg = omega * (np.asarray(tau, dtype=float) - tau0)
        theta = branch * 2.0 * np.arctan(np.sinh(arg))
        v = branch * 2.0 * omega / np.cosh(arg)
        return theta, v

    return orbit


def _reject_near_separatrix(mod: Modulus) -> None:
    # cancellation swamps the orbit formulas here; the separatrix orbit is the
    # analytic route for this regime
    if mod.near_separatrix:
        raise DomainError(
            f"modulus too close to the separatrix for orbit evaluation "
            f"(complement {mod.kp!r})")


def oscillatory_orbit(omega: float, mod: Modulus, tau0: float):
    """Oscillation with sin(theta/2) = k*sn(omega*(tau-tau0), k).

    v = 2*omega*k*cn; theta stays in (-pi, pi) because dn > 0.
    """
    _require_omega(omega)
    if mod.rotational:
        raise DomainError("oscillatory orbit needs modulus k < 1")
    _reject_near_separatrix(mod)
    k, kp = mod.m, mod.kp

    def orbit(tau):
        u = omega * (np.asarray(tau, dtype=float) - tau0)
        sn, cn, dn, _ = jacobi_from_complement(u, kp)
        return 2.0 * np.arctan2(k * sn, dn), 2.0 * omega * k * cn

    return orbit


def rotational_orbit(omega: float, mod: Modulus, tau0: float):
    """Counterclockwise rotation: theta = 2*am(omega*k*(tau-tau0), 1/k).

    v = 2*omega*k*dn >= 2*omega*k*k' > 0, and theta grows monotonically by
    2*pi per period 2*K(1/k)/(omega*k).
    """
    _require_omega(omega)
    if not mod.rotational:
        raise DomainError("rotational orbit needs modulus k > 1")
    _reject_near_separatrix(mod)
    k, kp = mod.k, mod.kp

    def orbit(tau):
        u = omega * k * (np.asarray(tau, dtype=float) - tau0)
        sn, cn, dn, am = jacobi_from_complement(u, kp)
        return 2.0 * am, 2.0 * omega * k * dn

    return orbit


# ---------------------------------------------------------------------------
# closed forms

def homoclinic_result(eps: float, beta: float, omega: float) -> MelnikovResult:
    """Melnikov coefficients along the separatrix."""
    _require_omega(omega)
    amplitude = 6.0 * math.pi * eps / _sinh_or_inf(math.pi / (2.0 * omega))
    offset = -8.0 * beta * omega * omega
    return MelnikovResult(amplitude, offset, homoclinic_threshold(omega))


def homoclinic_melnikov(eps: float, beta: float, omega: float,
                        tau0: float) -> float:
    """M(tau0) along the separatrix; identical on both branches."""
    return homoclinic_result(eps, beta, omega).distance(tau0)


def homoclinic_threshold(omega: float) -> float:
    """eps/beta above which the homoclinic Melnikov function changes sign."""
    _require_omega(omega)
    return (4.0 * omega * omega / (3.0 * math.pi)) \
        * _sinh_or_inf(math.pi / (2.0 * omega))


def oscillatory_result(eps: float, beta: float, omega: float,
                       q: int) -> MelnikovResult | None:
    """Melnikov coefficients for the 1:q oscillatory resonance, q even.

    None when the resonance does not exist at this omega (including the
    degenerate zero-amplitude orbit exactly at the existence edge). Odd q is
    rejected: the oscillating component of the integral vanishes there and no
    closed form applies.
    """
    if q % 2 != 0:
        raise DomainError(
            f"oscillatory closed form needs even q, got {q}; "
            f"use the quadrature route for other resonances")
    mod = solve_oscillatory_modulus(omega, 1, q)
    if mod is None or mod.m == 0.0:
        return None
    ci = complete_integrals(mod)
    denom = _sinh_or_inf(ci.K_comp / omega)
    amplitude = 12.0 * math.pi * eps / denom
    offset = -16.0 * beta * omega * omega * ci.E_minus_kp2_K
    threshold = (4.0 * omega * omega / (3.0 * math.pi)) \
        * ci.E_minus_kp2_K * denom
    return MelnikovResult(amplitude, offset, threshold)


def subharmonic_osc_melnikov(eps: float, beta: float, omega: float, q: int,
                             tau0: float) -> float:
    """M(tau0) for the 1:q oscillatory resonance, q even."""
    result = oscillatory_result(eps, beta, omega, q)
    if result is None:
        raise DomainError(f"no 1:{q} oscillatory resonance at omega={omega!r}")
    return result.distance(tau0)


def osc_threshold(omega: float, q: int) -> float | None:
    """eps/beta threshold of the 1:q oscillatory resonance; None if absent."""
    result = oscillatory_result(1.0, 1.0, omega, q)
    return None if result is None else result.threshold_ratio


def rotational_result(eps: float, beta: float, omega: float,
                      q: int) -> MelnikovResult:
    """Melnikov coefficients for the 1:q rotational resonance (r = 1).

    The rotational resonance exists for every omega > 0, so this never
    returns None. r >= 2 has no closed form (the oscillating component
    vanishes); use the quadrature route there.
    """
    mod = solve_rotational_modulus(omega, 1, q)
    ci = complete_integrals(mod)
    denom = _sinh_or_inf(ci.K_comp / (omega * mod.k))
    amplitude = 6.0 * math.pi * eps / denom
    offset = -8.0 * beta * omega * omega * mod.k * ci.E
    threshold = (4.0 * omega * omega * mod.k / (3.0 * math.pi)) \
        * ci.E * denom
    return MelnikovResult(amplitude, offset, threshold)


def subharmonic_rot_melnikov(eps: float, beta: float, omega: float, q: int,
                             tau0: float) -> float:
    """M(tau0) for the 1:q rotational resonance."""
    return rotational_result(eps, beta, omega, q).distance(tau0)


def rot_threshold(omega: float, q: int) -> float:
    """eps/beta threshold of the 1:q rotational resonance."""
    return rotational_result(1.0, 1.0, omega, q).threshold_ratio


# ---------------------------------------------------------------------------
# quadrature route

_GL_NODES = 10


@lru_cache(maxsize=8)
def _gl_rule(n_nodes: int):
    return np.polynomial.legendre.leggauss(n_nodes)


def _integrate_panels(f, a: float, b: float, n_panels: int) -> float:
    """Composite Gauss-Legendre rule with one vectorized integrand call."""
    x, w = _gl_rule(_GL_NODES)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    taus = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = np.asarray(f(taus)).reshape(n_panels, _GL_NODES)
    return float(np.sum(vals * w[None, :] * half[:, None]))


def _v_times_g1(orbit, eps: float, beta: float, omega: float):
    # vectorized copy of model.perturbation_g1 (cosine law), times v
    def f(tau):
        theta, v = orbit(tau)
        g1 = (2.0 * eps * np.sin(tau) - beta * omega) * v \
            + eps * omega * omega * np.cos(tau) * np.sin(theta)
        return v * g1
    return f


def homoclinic_melnikov_quadrature(eps: float, beta: float, omega: float,
                                   tau0: float) -> float:
    """Direct quadrature of the Melnikov integral along the separatrix.

    The improper integral is truncated at |omega*(tau - tau0)| = SECH_CUTOFF,
    where the integrand has decayed below double-precision noise.
    """
    _require_omega(omega)
    orbit = separatrix_orbit(omega, tau0)
    span = SECH_CUTOFF / omega
    width = min(math.pi / 8.0, 1.0 / (2.0 * omega))
    n_panels = int(math.ceil(2.0 * span / width))
    return _integrate_panels(_v_times_g1(orbit, eps, beta, omega),
                             tau0 - span, tau0 + span, n_panels)


def subharmonic_melnikov_quadrature(eps: float, beta: float, omega: float,
                                    spec: ResonanceSpec, tau0: float) -> float:
    """Direct quadrature of the Melnikov integral over one resonance cycle.

    Valid for any coprime resonance, not just the closed-form regimes, as
    long as the orbit stays clear of the separatrix quarantine.
    """
    _require_omega(omega)
    mod = spec.solve_modulus(omega)
    if mod is None:
        raise DomainError(
            f"no {spec.first}:{spec.q} oscillatory resonance at omega={omega!r}")
    if spec.kind == "oscillatory":
        orbit = oscillatory_orbit(omega, mod, tau0)
    else:
        orbit = rotational_orbit(omega, mod, tau0)
    # resolve the forcing period and the orbit's fastest feature; the latter
    # narrows like 1/(omega*k) as the modulus approaches the separatrix
    width = min(math.pi / 8.0, 1.0 / (2.0 * omega * max(1.0, mod.k)))
    period = 2.0 * math.pi * spec.q
    n_panels = int(math.ceil(period / width))
    return _integrate_panels(_v_times_g1(orbit, eps, beta, omega),
                             0.0, period, n_panels)
