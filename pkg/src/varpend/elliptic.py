"""Complete elliptic integrals and Jacobi elliptic functions via the AGM.

Everything is built on the arithmetic-geometric mean so that a modulus very
close to 1 can be carried through its complement: near the separatrix the
modulus itself rounds to 1.0 in double precision while the complement stays
representable, and all quantities needed downstream (K, E, E - k'^2 K, K(k'))
are computable from the complement alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "Modulus",
    "CompleteIntegrals",
    "ellip_k",
    "ellip_e",
    "jacobi_am",
    "jacobi_sn_cn_dn",
    "jacobi_from_complement",
    "complete_integrals",
    "solve_oscillatory_modulus",
    "solve_rotational_modulus",
]

# orbits with |k - 1| < 1e-9 are quarantined (catastrophic cancellation);
# expressed on the complement: kp^2 = (1-k)(1+k) < 2e-9
SEPARATRIX_KP = math.sqrt(2e-9)

_AGM_MAX_ITER = 64


def _agm_scale(kp: float) -> tuple[list[float], list[float]]:
    """AGM sequence from (1, kp). Returns the a_n and c_n lists.

    c_0 is the modulus itself, reconstructed as sqrt(1 - kp^2) in the stable
    factored form.
    """
    a, b = 1.0, kp
    c = math.sqrt(max((1.0 - kp) * (1.0 + kp), 0.0))
    a_seq, c_seq = [a], [c]
    for _ in range(_AGM_MAX_ITER):
        prev_c = c
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
        # (a - b)/2 bottoms out at rounding noise ~eps*a; stop there too
        if abs(c) <= 2.5e-16 * a or abs(c) >= prev_c:
            break
    else:  # pragma: no cover - AGM converges quadratically
        raise NumericalError(f"AGM failed to converge from kp={kp!r}")
    return a_seq, c_seq


def _k_from_complement(kp: float) -> float:
    a_seq, _ = _agm_scale(kp)
    return math.pi / (2.0 * a_seq[-1])


def _k_e_from_complement(kp: float) -> tuple[float, float, float]:
    """(K, E, E - kp^2 K) for modulus k = sqrt(1 - kp^2), all from kp.

    The third value is returned separately because forming it as a difference
    loses all digits near k = 1 while the AGM sum gives it directly.
    """
    a_seq, c_seq = _agm_scale(kp)
    big_k = math.pi / (2.0 * a_seq[-1])
    s = 0.0
    for n, c in enumerate(c_seq):
        s += 2.0 ** (n - 1) * c * c
    return big_k, big_k * (1.0 - s), big_k * (1.0 - s - kp * kp)


def ellip_k(k: float) -> float:
    """Complete elliptic integral of the first kind K(k).

    Strictly increasing on [0, 1), K(0) = pi/2, divergent as k -> 1.
    """
    if not 0.0 <= k < 1.0:
        raise DomainError(f"first-kind integral needs 0 <= k < 1, got {k!r}")
    return _k_from_complement(math.sqrt((1.0 - k) * (1.0 + k)))


def ellip_e(k: float) -> float:
    """Complete elliptic integral of the second kind E(k) on [0, 1]."""
    if not 0.0 <= k <= 1.0:
        raise DomainError(f"second-kind integral needs 0 <= k <= 1, got {k!r}")
    if k == 1.0:
        return 1.0
    _, big_e, _ = _k_e_from_complement(math.sqrt((1.0 - k) * (1.0 + k)))
    return big_e


def _am_from_complement(u: np.ndarray, kp: float) -> np.ndarray:
    """Jacobi amplitude am(u, k) with k given through its complement.

    Descending Landen phase recursion seeded from the AGM scale, applied after
    range reduction u = 2K m + u_r with u_r in [-K, K]; the quasi-periodicity
    am(u + 2K) = am(u) + pi is then exact by construction.
    """
    a_seq, c_seq = _agm_scale(kp)
    big_k = math.pi / (2.0 * a_seq[-1])
    m = np.floor(u / (2.0 * big_k) + 0.5)
    u_r = u - 2.0 * big_k * m
    n_last = len(a_seq) - 1
    phi = (2.0 ** n_last) * a_seq[n_last] * u_r
    for n in range(n_last, 0, -1):
        ratio = c_seq[n] / a_seq[n]
        phi = 0.5 * (phi + np.arcsin(np.clip(ratio * np.sin(phi), -1.0, 1.0)))
    return phi + m * math.pi


def jacobi_am(u, k: float):
    """Jacobi amplitude am(u, k); am(K) = pi/2, am(u + 2K) = am(u) + pi."""
    if not 0.0 <= k < 1.0:
        raise DomainError(f"amplitude needs 0 <= k < 1, got {k!r}")
    u_arr = np.asarray(u, dtype=float)
    out = _am_from_complement(u_arr, math.sqrt((1.0 - k) * (1.0 + k)))
    return float(out) if np.isscalar(u) or u_arr.ndim == 0 else out


def jacobi_from_complement(u, kp: float):
    """(sn, cn, dn, am) at modulus k = sqrt(1 - kp^2), parameterized by kp.

    This is the precision-preserving entry point for near-separatrix moduli.
    dn is formed as sqrt(cn^2 + kp^2 sn^2), which is the identity
    1 - k^2 sn^2 rewritten without cancellation.
    """
    if not 0.0 < kp <= 1.0:
        raise DomainError(f"complement must lie in (0, 1], got {kp!r}")
    u_arr = np.asarray(u, dtype=float)
    am = _am_from_complement(u_arr, kp)
    sn = np.sin(am)
    cn = np.cos(am)
    dn = np.sqrt(cn * cn + (kp * kp) * sn * sn)
    if np.isscalar(u) or u_arr.ndim == 0:
        return float(sn), float(cn), float(dn), float(am)
    return sn, cn, dn, am


def jacobi_sn_cn_dn(u, k: float):
    """Jacobi sn, cn, dn with sn = sin(am), cn = cos(am), dn = sqrt(1-k^2 sn^2)."""
    if not 0.0 <= k < 1.0:
        raise DomainError(f"Jacobi functions need 0 <= k < 1, got {k!r}")
    sn, cn, dn, _ = jacobi_from_complement(u, math.sqrt((1.0 - k) * (1.0 + k)))
    return sn, cn, dn


@dataclass(frozen=True)
class Modulus:
    """Elliptic modulus with its complement carried explicitly.

    k is the orbit-family modulus and may exceed 1 (rotational family, where
    all functions are evaluated at 1/k). m is k mapped into [0, 1] and kp is
    the complement of m. Near the separatrix m and k round to 1.0 in double
    precision; kp remains accurate and is what every evaluation path uses.
    """

    k: float
    kp: float
    m: float

    @classmethod
    def from_k(cls, k: float) -> "Modulus":
        if k < 0.0:
            raise DomainError(f"modulus must be nonnegative, got {k!r}")
        if k == 1.0:
            raise DomainError("modulus 1 is the separatrix; no elliptic orbit")
        m = k if k < 1.0 else 1.0 / k
        return cls(k=k, kp=math.sqrt((1.0 - m) * (1.0 + m)), m=m)

    @property
    def rotational(self) -> bool:
        return self.k > 1.0

    @property
    def near_separatrix(self) -> bool:
        return self.kp < SEPARATRIX_KP


class CompleteIntegrals(NamedTuple):
    """K(m), E(m), E(m) - kp^2 K(m), and K(kp) for a Modulus (m in range)."""

    K: float
    E: float
    E_minus_kp2_K: float
    K_comp: float


def complete_integrals(mod: Modulus) -> CompleteIntegrals:
    big_k, big_e, combo = _k_e_from_complement(mod.kp)
    # K(kp): complement of kp is m itself
    k_comp = _k_from_complement(mod.m)
    return CompleteIntegrals(big_k, big_e, combo, k_comp)


def _illinois_root(f, lo: float, hi: float, f_tol: float, x_tol: float) -> float:
    """Bracketed root of a monotone f via the Illinois variant of regula falsi."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NumericalError(f"root not bracketed on [{lo!r}, {hi!r}]")
    side = 0
    x, f_x = lo, f_lo
    for _ in range(200):
        x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        f_x = f(x)
        if abs(f_x) <= f_tol or hi - lo <= x_tol:
            return x
        if f_lo * f_x < 0.0:
            hi, f_hi = x, f_x
            if side == -1:
                f_lo *= 0.5
            side = -1
        else:
            lo, f_lo = x, f_x
            if side == 1:
                f_hi *= 0.5
            side = 1
    return x


def solve_oscillatory_modulus(omega: float, p: int, q: int) -> Modulus | None:
    """Modulus of the oscillatory orbit in p:q resonance, K(k) = pi*omega*q/(2p).

    Returns None when the resonance does not exist (K is bounded below by
    pi/2). Solved by bracketed bisection/secant on ln(kp) so targets deep in
    the near-separatrix regime stay well conditioned.
    """
    _check_resonance_pair(omega, p, q)
    target = math.pi * omega * q / (2.0 * p)
    if target < math.pi / 2.0 - 1e-15:
        return None
    if abs(target - math.pi / 2.0) <= 1e-15:
        return Modulus(k=0.0, kp=1.0, m=0.0)

    def gap(ln_kp: float) -> float:
        return _k_from_complement(math.exp(ln_kp)) - target

    # K ~ ln(4/kp) for small kp gives the left end; widen until bracketed
    lo = math.log(4.0) - target - 2.0
    while gap(lo) <= 0.0:
        lo -= 2.0
    hi = -1e-17
    ln_kp = _illinois_root(gap, lo, hi, f_tol=1e-12 * max(1.0, target), x_tol=1e-14)
    kp = math.exp(ln_kp)
    return Modulus(k=math.sqrt((1.0 - kp) * (1.0 + kp)), kp=kp, m=math.sqrt((1.0 - kp) * (1.0 + kp)))


def solve_rotational_modulus(omega: float, r: int, q: int) -> Modulus:
    """Modulus k > 1 of the rotational orbit in r:q resonance.

    The rotation period 2K(1/k)/(omega k) must equal 2*pi*q/r, i.e. with
    m = 1/k the defining equation is m K(m) = pi*omega*q/r; the left side is a
    strictly increasing bijection of (0, 1) onto (0, inf), so a unique root
    exists for every positive omega, r, q. Solved on ln(mp) with
    m = sqrt(-expm1(2 ln mp)) to keep both ends of the range representable.
    """
    _check_resonance_pair(omega, r, q)
    target = math.pi * omega * q / r

    def m_of(ln_mp: float) -> float:
        return math.sqrt(-math.expm1(2.0 * ln_mp))

    def gap(ln_mp: float) -> float:
        return m_of(ln_mp) * _k_from_complement(math.exp(ln_mp)) - target

    hi = -1e-17
    while gap(hi) >= 0.0:  # pragma: no cover - hit only for targets < ~1e-16
        hi *= 0.5
        if hi > -1e-300:
            raise NumericalError("rotational modulus bracket collapsed")
    lo = -(target + 3.0)
    while gap(lo) <= 0.0:
        lo -= 2.0
    ln_mp = _illinois_root(gap, lo, hi, f_tol=1e-12 * max(1.0, target), x_tol=1e-14)
    mp = math.exp(ln_mp)
    m = m_of(ln_mp)
    return Modulus(k=1.0 / m, kp=mp, m=m)


def _check_resonance_pair(omega: float, first: int, q: int) -> None:
    if omega <= 0.0:
        raise DomainError(f"resonance solve needs omega > 0, got {omega!r}")
    if first < 1 or q < 1 or int(first) != first or int(q) != q:
        raise DomainError(f"resonance indices must be naturals, got {first!r}:{q!r}")
    if math.gcd(int(first), int(q)) != 1:
        raise DomainError(f"resonance indices must be coprime, got {first!r}:{q!r}")
