"""Long-run regime labels from Poincare-section sampling.

A trajectory is integrated through a transient, then sampled once per
excitation period. The sampled points decide the label:

  equilibrium            all samples at a lower rest point (2*pi*m, 0)
  oscillation            q-periodic, no net winding, no turnovers
  rotation               q-periodic, r != 0 net turns, theta monotone
  rotation-oscillation   q-periodic with direction reversals (net winding
                         with backtracking, or sign-alternating turnovers)
  chaotic                no period q <= q_max matches
  undecided              integration aborted, or the best candidate period
                         misses the tolerance by less than one decade

Chaos is a residual label by construction; no Lyapunov exponents here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernel
from .errors import DomainError
from .integrator import SWEEP_CONFIG, IntegratorConfig, Trajectory, _run_kernel
from .model import Params, State

__all__ = [
    "KINDS",
    "ClassifierConfig",
    "DEFAULT_CLASSIFIER",
    "RegimeLabel",
    "classify",
    "winding_number",
    "label_from_record",
]

TWO_PI = 2.0 * math.pi

KINDS = ("equilibrium", "oscillation", "rotation", "rotation-oscillation",
         "chaotic", "undecided")

# a near-match within one decade of the tolerance is reported, not guessed
MARGINAL_FACTOR = 10.0


@dataclass(frozen=True)
class ClassifierConfig:
    transient_periods: int = 300
    sample_periods: int = 200
    q_max: int = 8
    match_tol: float = 1e-4

    def __post_init__(self):
        for name in ("transient_periods", "sample_periods", "q_max"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise DomainError(f"{name} must be a natural number, got {n!r}")
        if self.sample_periods <= 2 * self.q_max:
            raise DomainError(
                f"sample_periods={self.sample_periods} must exceed "
                f"2*q_max={2 * self.q_max}")
        if self.match_tol <= 0.0:
            raise DomainError(f"match_tol must be positive, got {self.match_tol!r}")


DEFAULT_CLASSIFIER = ClassifierConfig()


@dataclass(frozen=True)
class RegimeLabel:
    """Label kind plus resonance indices and the last Poincare sample.

    r is the net winding per q excitation periods: 0 for oscillation,
    |r| >= 1 for rotation, any integer for rotation-oscillation. chaotic
    and undecided carry neither index.
    """

    kind: str
    r: int | None
    q: int | None
    final_theta: float | None = None
    final_v: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown label kind {self.kind!r}")
        if self.kind in ("chaotic", "undecided"):
            if self.r is not None or self.q is not None:
                raise DomainError(f"{self.kind} labels carry no indices")
            return
        if self.q is None or self.q < 1:
            raise DomainError("periodic labels need a natural period q")
        if self.kind == "equilibrium" and (self.r != 0 or self.q != 1):
            raise DomainError("equilibrium is the 1-periodic label with r=0")
        if self.kind == "oscillation" and self.r != 0:
            raise DomainError("oscillation labels have zero net winding")
        if self.kind == "rotation" and (self.r is None or abs(self.r) < 1):
            raise DomainError("rotation labels need a nonzero winding")
        if self.kind == "rotation-oscillation" and self.r is None:
            raise DomainError("rotation-oscillation labels carry a net winding")

    def to_record(self) -> dict:
        final = None
        if self.final_theta is not None:
            final = {"theta": self.final_theta, "v": self.final_v}
        return {"kind": self.kind, "r": self.r, "q": self.q, "final": final}


def label_from_record(record: dict) -> RegimeLabel:
    final = record.get("final")
    theta = final["theta"] if final else None
    v = final["v"] if final else None
    return RegimeLabel(record["kind"], record["r"], record["q"], theta, v)


def _periodic_kind(r: int, theta: np.ndarray, vmin: float, vmax: float) -> str:
    if r == 0:
        turns = np.rint(np.diff(theta) / TWO_PI)
        if turns.max(initial=0.0) >= 1.0 and turns.min(initial=0.0) <= -1.0:
            return "rotation-oscillation"
        return "oscillation"
    monotone = vmin > 0.0 if r > 0 else vmax < 0.0
    return "rotation" if monotone else "rotation-oscillation"


def classify(init: State, p: Params, cfg: ClassifierConfig = DEFAULT_CLASSIFIER,
             integrator: IntegratorConfig = SWEEP_CONFIG) -> RegimeLabel:
    """Label the long-run regime reached from init.

    The transient is discarded, then sample_periods + 1 section samples are
    compared at every stride q <= q_max, theta modulo a whole number of
    turns. The minimal matching q wins; its per-sample windings must agree.
    """
    total = cfg.transient_periods + cfg.sample_periods
    stops = init.tau + TWO_PI * np.arange(1, total + 1)
    res = _run_kernel(init, p, stops, cfg=integrator,
                      track_from=init.tau + TWO_PI * cfg.transient_periods)
    if res.status != _kernel.OK:
        return RegimeLabel("undecided", None, None)
    theta = np.concatenate(([init.theta], res.theta))[cfg.transient_periods:]
    v = np.concatenate(([init.v], res.v))[cfg.transient_periods:]
    final_theta = float(theta[-1])
    final_v = float(v[-1])

    m = round(float(np.mean(theta)) / TWO_PI)
    if (np.max(np.abs(theta - TWO_PI * m)) < cfg.match_tol
            and np.max(np.abs(v)) < cfg.match_tol):
        return RegimeLabel("equilibrium", 0, 1, final_theta, final_v)

    best_miss = math.inf
    for q in range(1, cfg.q_max + 1):
        dth = theta[q:] - theta[:-q]
        windings = np.rint(dth / TWO_PI)
        miss = max(float(np.max(np.abs(dth - TWO_PI * windings))),
                   float(np.max(np.abs(v[q:] - v[:-q]))))
        best_miss = min(best_miss, miss)
        if miss < cfg.match_tol and np.all(windings == windings[0]):
            r = int(windings[0])
            kind = _periodic_kind(r, theta, res.vmin, res.vmax)
            return RegimeLabel(kind, r, q, final_theta, final_v)
    if best_miss < MARGINAL_FACTOR * cfg.match_tol:
        return RegimeLabel("undecided", None, None, final_theta, final_v)
    return RegimeLabel("chaotic", None, None, final_theta, final_v)


def winding_number(traj: Trajectory, q: int) -> Fraction | None:
    """Net turns per excitation period at stride q, from section samples.

    The trajectory is taken as already post-transient. Returns the common
    winding rate r/q, or None when the per-stride winding varies (the
    inconsistency flag for irregular motion).
    """
    if int(q) != q or q < 1:
        raise DomainError(f"stride must be a natural number, got {q!r}")
    theta = traj.theta
    if theta.shape[0] < q + 1:
        raise DomainError(f"need at least {q + 1} section samples, "
                          f"got {theta.shape[0]}")
    windings = np.rint((theta[q:] - theta[:-q]) / TWO_PI).astype(int)
    if np.any(windings != windings[0]):
        return None
    return Fraction(int(windings[0]), q)
