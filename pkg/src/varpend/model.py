"""Equations of motion for the pendulum with periodically varying length.

The length varies as l(t) = l0 (1 + eps*phi(tau)) with phi a smooth zero-mean
2*pi-periodic function (a finite trigonometric series, cos tau by default).
Three nondimensional parameters govern everything: the relative amplitude eps,
the damping beta, and the inverse relative frequency omega. Two equivalent
state formulations are provided: the angle form (theta, v = dtheta/dtau) and
the momentum form (theta, s) with sector velocity s = (1+eps*phi)^2 v, whose
unperturbed omega = 0 system conserves s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "Excitation",
    "COSINE",
    "DimensionalParams",
    "Params",
    "State",
    "MomentumState",
    "nondimensionalize",
    "rhs_angle",
    "rhs_momentum",
    "hamiltonian",
    "perturbation_g1",
    "wrap_angle",
    "params_to_config",
    "params_from_config",
]


@dataclass(frozen=True)
class Excitation:
    """Zero-mean 2*pi-periodic length law as a finite trigonometric series.

    harmonics is a tuple of (index, cosine coefficient, sine coefficient)
    entries, phi(tau) = sum c_n cos(n tau) + s_n sin(n tau). No constant term
    is representable, so the zero-mean invariant holds by construction.
    """

    harmonics: tuple[tuple[int, float, float], ...] = ((1, 1.0, 0.0),)

    def __post_init__(self):
        if not self.harmonics:
            raise DomainError("excitation needs at least one harmonic")
        for n, _, _ in self.harmonics:
            if int(n) != n or n < 1:
                raise DomainError(f"harmonic indices must be naturals, got {n!r}")

    def value(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        for n, c, s in self.harmonics:
            out += c * np.cos(n * tau) + s * np.sin(n * tau)
        return float(out) if out.ndim == 0 else out

    def derivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        for n, c, s in self.harmonics:
            out += -c * n * np.sin(n * tau) + s * n * np.cos(n * tau)
        return float(out) if out.ndim == 0 else out

    def sup_bound(self) -> float:
        """An upper bound for max |phi| (sum of harmonic amplitudes)."""
        return sum(math.hypot(c, s) for _, c, s in self.harmonics)

    @property
    def is_cosine(self) -> bool:
        """True for the default phi(tau) = cos(tau)."""
        return self.harmonics == ((1, 1.0, 0.0),)

    def arrays(self):
        """Coefficients as arrays (index, cos, sin) for the compiled kernel."""
        idx = np.array([n for n, _, _ in self.harmonics], dtype=np.int64)
        cc = np.array([c for _, c, _ in self.harmonics], dtype=float)
        ss = np.array([s for _, _, s in self.harmonics], dtype=float)
        return idx, cc, ss


COSINE = Excitation()


@dataclass(frozen=True)
class DimensionalParams:
    """Physical parameters: mass, mean length, length-variation amplitude,
    excitation angular frequency, damping coefficient, gravity."""

    mass: float
    length: float
    amplitude: float
    drive_frequency: float
    damping: float
    gravity: float

    def __post_init__(self):
        if min(self.mass, self.length, self.drive_frequency, self.gravity) <= 0.0:
            raise DomainError("mass, length, drive frequency, gravity must be positive")
        if self.damping < 0.0 or self.amplitude < 0.0:
            raise DomainError("damping and amplitude must be nonnegative")
        if self.amplitude >= self.length:
            raise DomainError("amplitude must stay below the mean length")


@dataclass(frozen=True)
class Params:
    """Nondimensional configuration (eps, beta, omega) plus the length law.

    omega = 0 is admitted because the unperturbed sector-velocity system is
    defined there (s is conserved); operations that need omega > 0 say so.
    """

    eps: float
    beta: float
    omega: float
    excitation: Excitation = COSINE

    def __post_init__(self):
        if self.eps < 0.0 or self.beta < 0.0 or self.omega < 0.0:
            raise DomainError("eps, beta, omega must be nonnegative")
        if self.eps * self.excitation.sup_bound() >= 1.0:
            raise DomainError(
                f"eps={self.eps!r} lets the length reach zero; need eps*max|phi| < 1")

    @property
    def beta_over_omega(self) -> float:
        """The damping-to-frequency ratio treated as its own parameter at
        small omega; 0/0 resolves to 0 so the conservative limit works."""
        if self.omega > 0.0:
            return self.beta / self.omega
        if self.beta == 0.0:
            return 0.0
        raise DomainError("beta/omega undefined for omega = 0 with beta > 0")

    def length_factor(self, tau):
        """1 + eps*phi(tau), the instantaneous relative length."""
        return 1.0 + self.eps * self.excitation.value(tau)


@dataclass(frozen=True)
class State:
    """Phase-space point in the angle form (theta, v = dtheta/dtau, tau)."""

    theta: float
    v: float
    tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.v)
                and math.isfinite(self.tau)):
            raise DomainError("state components must be finite")


@dataclass(frozen=True)
class MomentumState:
    """Phase-space point in the momentum form (theta, sector velocity s, tau)."""

    theta: float
    s: float
    tau: float = 0.0

    def to_state(self, p: Params) -> State:
        el = p.length_factor(self.tau)
        return State(self.theta, self.s / (el * el), self.tau)

    @classmethod
    def from_state(cls, state: State, p: Params) -> "MomentumState":
        el = p.length_factor(state.tau)
        return cls(state.theta, state.v * el * el, state.tau)


def nondimensionalize(d: DimensionalParams) -> Params:
    """Map physical parameters to (eps, beta, omega).

    eps = a/l0, omega = sqrt(g/l0)/Omega, beta = gamma/(m sqrt(g/l0)).
    """
    omega0 = math.sqrt(d.gravity / d.length)
    return Params(
        eps=d.amplitude / d.length,
        beta=d.damping / (d.mass * omega0),
        omega=omega0 / d.drive_frequency,
    )


def _length_or_raise(p: Params, tau: float) -> float:
    el = p.length_factor(tau)
    if el <= 0.0:
        raise DomainError(f"length factor 1 + eps*phi nonpositive at tau={tau!r}")
    return el


def rhs_angle(state: State, p: Params) -> tuple[float, float]:
    """(dtheta/dtau, dv/dtau) in the angle form."""
    el = _length_or_raise(p, state.tau)
    dphi = p.excitation.derivative(state.tau)
    dv = -(2.0 * p.eps * dphi / el + p.beta * p.omega) * state.v \
        - p.omega * p.omega * math.sin(state.theta) / el
    return state.v, dv


def rhs_momentum(state: MomentumState, p: Params) -> tuple[float, float]:
    """(dtheta/dtau, ds/dtau) in the momentum form.

    ds/dtau = -beta*omega*s - omega^2 (1+eps*phi) sin(theta); written without
    the beta/omega ratio so omega = 0 conserves s for any beta.
    """
    el = _length_or_raise(p, state.tau)
    dtheta = state.s / (el * el)
    ds = -p.beta * p.omega * state.s \
        - p.omega * p.omega * el * math.sin(state.theta)
    return dtheta, ds


def hamiltonian(state: State, p: Params) -> float:
    """Unperturbed energy H = v^2/2 - omega^2 cos(theta)."""
    return 0.5 * state.v * state.v - p.omega * p.omega * math.cos(state.theta)


def perturbation_g1(state: State, p: Params) -> float:
    """First-order perturbation of dv/dtau for the cosine length law.

    g1 = (2 eps sin(tau) - beta omega) v + eps omega^2 cos(tau) sin(theta).
    Only valid for phi = cos; the closed-form bifurcation analysis depends on
    this shape, so any other excitation is rejected.
    """
    if not p.excitation.is_cosine:
        raise DomainError("perturbation expansion requires the cosine length law")
    return (2.0 * p.eps * math.sin(state.tau) - p.beta * p.omega) * state.v \
        + p.eps * p.omega * p.omega * math.cos(state.tau) * math.sin(state.theta)


def wrap_angle(theta):
    """Map angles to (-pi, pi] for display; dynamics keep theta unwrapped."""
    theta = np.asarray(theta, dtype=float)
    out = np.mod(-theta + math.pi, 2.0 * math.pi)
    out = -(out - math.pi)
    return float(out) if out.ndim == 0 else out


def params_to_config(p: Params) -> str:
    """Serialize Params as key=value lines (the CLI config format)."""
    harm = ",".join(f"{n}:{c!r}:{s!r}" for n, c, s in p.excitation.harmonics)
    return (f"eps={p.eps!r}\nbeta={p.beta!r}\nomega={p.omega!r}\n"
            f"excitation={harm}\n")


def params_from_config(text: str) -> Params:
    """Parse the key=value serialization back into Params."""
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {raw!r} is not key=value")
        key, val = line.split("=", 1)
        fields[key.strip()] = val.strip()
    try:
        eps = float(fields["eps"])
        beta = float(fields["beta"])
        omega = float(fields["omega"])
    except KeyError as missing:
        raise DomainError(f"config missing key {missing}") from None
    excitation = COSINE
    if "excitation" in fields:
        harmonics = []
        for triple in fields["excitation"].split(","):
            n, c, s = triple.split(":")
            harmonics.append((int(n), float(c), float(s)))
        excitation = Excitation(tuple(harmonics))
    return Params(eps=eps, beta=beta, omega=omega, excitation=excitation)
