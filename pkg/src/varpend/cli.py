"""Command-line front end: every analysis as one deterministic subcommand.

Exit codes: 0 success, 1 domain or validation error, 2 numerical failure.
A key=value config file supplies defaults via --config; explicit flags win.
No subcommand uses randomness.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import averaging, melnikov
from .classify import ClassifierConfig, classify
from .elliptic import (complete_integrals, ellip_e, ellip_k, jacobi_sn_cn_dn,
                       solve_oscillatory_modulus, solve_rotational_modulus)
from .errors import DomainError, NumericalError
from .integrator import ANALYSIS_CONFIG, IntegratorConfig, integrate
from .model import Params, State
from .sweep import (AVERAGING_CLASSIFIER, BoundaryRequest, SweepSpec,
                    export_map, run_averaging_sweep, run_sweep)

__all__ = ["main"]

TWO_PI = 2.0 * math.pi


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract here is exit 1 for
    # every validation problem, so route errors through an exception
    def error(self, message):
        raise _CliError(message)


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _CliError(f"cannot read config file {path}: {exc}")
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _CliError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


class _Resolver:
    """Flag value if given, else config value, else default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _read_config(args.config) if args.config else {}

    def get(self, name: str, cast, default=None, required: bool = False):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.config:
            try:
                return cast(self.config[name])
            except (TypeError, ValueError):
                raise _CliError(
                    f"config key {name} has bad value {self.config[name]!r}")
        if required:
            raise _CliError(f"missing required option --{name.replace('_', '-')}")
        return default

    def flag(self, name: str, default: bool = False) -> bool:
        if getattr(self.args, name, False):
            return True
        if name in self.config:
            return self.config[name].lower() in ("1", "true", "yes", "on")
        return default


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise _CliError(f"cannot write {out}: {exc}")


def _params(res: _Resolver) -> Params:
    return Params(eps=res.get("eps", float, required=True),
                  beta=res.get("beta", float, required=True),
                  omega=res.get("omega", float, required=True))


def _initial(res: _Resolver) -> State:
    return State(theta=res.get("theta0", float, 0.1),
                 v=res.get("v0", float, 0.0),
                 tau=res.get("tau0", float, 0.0))


def _integrator(res: _Resolver) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=res.get("rtol", float, ANALYSIS_CONFIG.rel_tol),
        abs_tol=res.get("atol", float, ANALYSIS_CONFIG.abs_tol))


def _classifier(res: _Resolver) -> ClassifierConfig:
    return ClassifierConfig(
        transient_periods=res.get("transient", int, 300),
        sample_periods=res.get("sample", int, 200),
        q_max=res.get("qmax", int, 8),
        match_tol=res.get("match_tol", float, 1e-4))


def _cmd_simulate(res: _Resolver) -> int:
    p = _params(res)
    init = _initial(res)
    periods = res.get("periods", int, 100)
    if periods < 1:
        raise _CliError(f"periods must be positive, got {periods}")
    traj = integrate(init, p, up_to=init.tau + TWO_PI * periods,
                     cfg=_integrator(res), dense=res.flag("dense"))
    out = res.get("out", str)
    if out is None:
        taus, thetas, vs = ((traj.dense_tau, traj.dense_theta, traj.dense_v)
                            if traj.dense_tau is not None
                            else (traj.tau, traj.theta, traj.v))
        lines = ["tau,theta,v"]
        lines += [f"{float(t)!r},{float(th)!r},{float(v)!r}"
                  for t, th, v in zip(taus, thetas, vs)]
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        traj.to_csv(out)
    return 0


def _cmd_classify(res: _Resolver) -> int:
    label = classify(_initial(res), _params(res), _classifier(res),
                     integrator=_integrator(res))
    _emit(json.dumps(label.to_record(), indent=1) + "\n", res.get("out", str))
    return 0


def _threshold_fn(kind: str, q: int | None):
    if kind == "homoclinic":
        return lambda om: melnikov.homoclinic_threshold(om)
    if q is None:
        raise _CliError(f"--q is required for kind {kind}")
    if kind == "oscillation":
        return lambda om: melnikov.osc_threshold(om, q)
    return lambda om: melnikov.rot_threshold(om, q)


def _melnikov_distance_fn(kind: str, eps: float, beta: float, omega: float,
                          q: int | None):
    if kind == "homoclinic":
        return lambda t0: melnikov.homoclinic_melnikov(eps, beta, omega, t0)
    if q is None:
        raise _CliError(f"--q is required for kind {kind}")
    if kind == "oscillation":
        return lambda t0: melnikov.subharmonic_osc_melnikov(
            eps, beta, omega, q, t0)
    return lambda t0: melnikov.subharmonic_rot_melnikov(eps, beta, omega, q, t0)


def _cmd_melnikov(res: _Resolver) -> int:
    kind = res.get("kind", str, required=True)
    if kind not in ("homoclinic", "oscillation", "rotation"):
        raise _CliError(f"unknown melnikov kind {kind!r}")
    q = res.get("q", int)
    n = res.get("n", int, 200)
    if n < 2:
        raise _CliError(f"need at least 2 samples, got {n}")
    eps = res.get("eps", float)
    if eps is not None:
        # distance table M(tau0) at one parameter point
        beta = res.get("beta", float, required=True)
        omega = res.get("omega", float, required=True)
        dist = _melnikov_distance_fn(kind, eps, beta, omega, q)
        lines = ["tau0,distance"]
        for t0 in np.linspace(0.0, TWO_PI, n):
            lines.append(f"{float(t0)!r},{dist(float(t0))!r}")
        _emit("\n".join(lines) + "\n", res.get("out", str))
        return 0
    lo = res.get("omega_min", float, required=True)
    hi = res.get("omega_max", float, required=True)
    if not 0.0 < lo < hi:
        raise _CliError(f"omega range must be positive and increasing, "
                        f"got [{lo}, {hi}]")
    beta = res.get("beta", float)
    scale = 1.0 if beta is None else beta
    header = "omega,eps" if beta is not None else "omega,eps_over_beta"
    fn = _threshold_fn(kind, q)
    lines = [header]
    for om in np.linspace(lo, hi, n):
        val = fn(float(om))
        if val is None or not math.isfinite(val):
            continue
        lines.append(f"{float(om)!r},{scale * val!r}")
    _emit("\n".join(lines) + "\n", res.get("out", str))
    return 0


def _branch_record(p: Params, rot, theta: float | None,
                   stable: bool | None) -> dict | None:
    if theta is None:
        return None
    return {"theta": theta, "stable": stable,
            "residual": rot.residual(theta, p.beta_over_omega)}


def _cmd_averaging(res: _Resolver) -> int:
    r = res.get("r", int, 1)
    q = res.get("q", int, 1)
    eps_min = res.get("eps_min", float)
    if eps_min is not None:
        # existence boundary over an eps grid
        eps_max = res.get("eps_max", float, required=True)
        n = res.get("n", int, 50)
        if not 0.0 <= eps_min < eps_max or n < 2:
            raise _CliError("need 0 <= eps-min < eps-max and n >= 2")
        lines = ["eps,threshold_omega_over_beta"]
        for eps in np.linspace(eps_min, eps_max, n):
            thr = averaging.existence_threshold(float(eps), r, q)
            lines.append(f"{float(eps)!r},{thr!r}")
        _emit("\n".join(lines) + "\n", res.get("out", str))
        return 0
    p = _params(res)
    rot = averaging.solve_branches(p, r, q)
    doc = {
        "eps": p.eps, "beta": p.beta, "omega": p.omega,
        "r": rot.r, "q": rot.q, "s0": rot.s0,
        "a": rot.a, "b": rot.b,
        "threshold_omega_over_beta": rot.threshold_omega_over_beta,
        "omega_over_beta": (p.omega / p.beta if p.beta > 0.0 else None),
        "exists": rot.exists,
        "plus": _branch_record(p, rot, rot.theta_plus, rot.stable_plus),
        "minus": _branch_record(p, rot, rot.theta_minus, rot.stable_minus),
    }
    _emit(json.dumps(doc, indent=1) + "\n", res.get("out", str))
    return 0


def _parse_boundaries(text: str) -> tuple[BoundaryRequest, ...]:
    requests = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token == "homoclinic":
            requests.append(BoundaryRequest("homoclinic"))
            continue
        head, sep, tail = token.partition(":")
        kinds = {"osc": "oscillation", "rot": "rotation", "avg": "averaging"}
        if not sep or head not in kinds:
            raise _CliError(f"bad boundary token {token!r}; expected "
                            "homoclinic, osc:q, rot:q, or avg:r")
        try:
            index = int(tail)
        except ValueError:
            raise _CliError(f"bad boundary index in {token!r}")
        requests.append(BoundaryRequest(kinds[head], index))
    return tuple(requests)


def _cmd_sweep(res: _Resolver) -> int:
    plane = res.get("plane", str, "omega-eps")
    jobs = res.get("jobs", int, 1)
    out_dir = Path(res.get("out_dir", str, "."))
    formats = tuple(f.strip() for f in
                    res.get("formats", str, "csv,json,svg").split(",") if f.strip())
    eps_rng = (res.get("eps_min", float, required=True),
               res.get("eps_max", float, required=True),
               res.get("n_eps", int, required=True))
    if plane == "omega-eps":
        spec = SweepSpec(
            omega_range=(res.get("omega_min", float, required=True),
                         res.get("omega_max", float, required=True),
                         res.get("n_omega", int, required=True)),
            eps_range=eps_rng,
            beta=res.get("beta", float, required=True),
            classifier=_classifier(res),
            boundaries=_parse_boundaries(res.get("boundaries", str, "")))
        result = run_sweep(spec, jobs=jobs)
    elif plane == "ratio-eps":
        avg_default = AVERAGING_CLASSIFIER
        classifier = ClassifierConfig(
            transient_periods=res.get("transient", int,
                                      avg_default.transient_periods),
            sample_periods=res.get("sample", int, avg_default.sample_periods),
            q_max=res.get("qmax", int, avg_default.q_max),
            match_tol=res.get("match_tol", float, avg_default.match_tol))
        result = run_averaging_sweep(
            res.get("omega", float, required=True),
            (res.get("ratio_min", float, required=True),
             res.get("ratio_max", float, required=True),
             res.get("n_ratio", int, required=True)),
            eps_rng, r=res.get("r", int, 1), classifier=classifier, jobs=jobs)
    else:
        raise _CliError(f"unknown plane {plane!r}; expected omega-eps or "
                        "ratio-eps")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = export_map(result, out_dir, formats=formats)
    counts = ", ".join(f"{kind}={n}" for kind, n in sorted(result.counts().items()))
    sys.stdout.write(f"cells: {counts}\n")
    for fmt in formats:
        sys.stdout.write(f"{paths[fmt]}\n")
    return 0


def _check_line(name: str, err: float, tol: float) -> tuple[str, bool]:
    ok = err < tol
    return (f"{name}: max error {err:.3e} (tolerance {tol:g}) "
            f"{'ok' if ok else 'FAIL'}"), ok


def _cmd_elliptic_check(res: _Resolver) -> int:
    n = res.get("n", int, 25)
    if n < 5:
        raise _CliError(f"need n >= 5 grid points, got {n}")
    ks = np.linspace(0.02, 0.98, n)
    us = np.linspace(-3.0, 3.0, n)
    worst_pyth = 0.0
    worst_dn = 0.0
    for k in ks:
        for u in us:
            sn, cn, dn = jacobi_sn_cn_dn(float(u), float(k))
            worst_pyth = max(worst_pyth, abs(sn * sn + cn * cn - 1.0))
            worst_dn = max(worst_dn, abs(dn * dn + k * k * sn * sn - 1.0))
    # 40-node Gauss-Legendre quadrature of the defining integrals
    x, w = np.polynomial.legendre.leggauss(40)
    theta = 0.25 * math.pi * (x + 1.0)
    weight = 0.25 * math.pi * w
    worst_k = 0.0
    worst_e = 0.0
    for k in ks:
        m = float(k) ** 2
        root = np.sqrt(1.0 - m * np.sin(theta) ** 2)
        worst_k = max(worst_k, abs(float(np.sum(weight / root))
                                   - ellip_k(float(k))))
        worst_e = max(worst_e, abs(float(np.sum(weight * root))
                                   - ellip_e(float(k))))
    # round trips: the solved modulus must reproduce the resonance identity
    worst_osc = 0.0
    for om in np.linspace(0.55, 2.5, n):
        mod = solve_oscillatory_modulus(float(om), 1, 2)
        if mod is None or mod.m == 0.0:
            continue
        worst_osc = max(worst_osc,
                        abs(complete_integrals(mod).K - math.pi * om))
    worst_rot = 0.0
    for om in np.linspace(0.2, 2.5, n):
        mod = solve_rotational_modulus(float(om), 1, 1)
        worst_rot = max(worst_rot,
                        abs(mod.m * ellip_k(mod.m) - math.pi * om))
    lines = []
    all_ok = True
    for name, err, tol in (
            ("sn^2 + cn^2 = 1", worst_pyth, 1e-11),
            ("dn^2 + k^2 sn^2 = 1", worst_dn, 1e-11),
            ("K(k) vs quadrature", worst_k, 1e-11),
            ("E(k) vs quadrature", worst_e, 1e-11),
            ("oscillatory resonance residual", worst_osc, 1e-9),
            ("rotational resonance residual", worst_rot, 1e-9)):
        line, ok = _check_line(name, err, tol)
        lines.append(line)
        all_ok = all_ok and ok
    _emit("\n".join(lines) + "\n", res.get("out", str))
    if not all_ok:
        raise NumericalError("elliptic self-check failed")
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "melnikov": _cmd_melnikov,
    "averaging": _cmd_averaging,
    "sweep": _cmd_sweep,
    "elliptic-check": _cmd_elliptic_check,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value defaults file")
    sub.add_argument("--out", help="output file (default: standard output)")


def _add_point_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--eps", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--omega", type=float)


def _add_initial_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--theta0", type=float)
    sub.add_argument("--v0", type=float)
    sub.add_argument("--tau0", type=float)
    sub.add_argument("--rtol", type=float)
    sub.add_argument("--atol", type=float)


def _add_classifier_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--transient", type=int)
    sub.add_argument("--sample", type=int)
    sub.add_argument("--qmax", type=int)
    sub.add_argument("--match-tol", type=float, dest="match_tol")


def build_parser() -> _Parser:
    parser = _Parser(prog="varpend",
                     description="pendulum with periodically varying length: "
                                 "boundaries, simulation, regime maps")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="integrate one trajectory to CSV")
    _add_point_flags(sim)
    _add_initial_flags(sim)
    sim.add_argument("--periods", type=int)
    sim.add_argument("--dense", action="store_true",
                     help="record every accepted step, not just sections")
    _add_common(sim)

    cls = subs.add_parser("classify", help="label one trajectory's regime")
    _add_point_flags(cls)
    _add_initial_flags(cls)
    _add_classifier_flags(cls)
    _add_common(cls)

    mel = subs.add_parser("melnikov", help="threshold curves and distance tables")
    mel.add_argument("--kind", choices=("homoclinic", "oscillation", "rotation"))
    mel.add_argument("--q", type=int)
    mel.add_argument("--omega-min", type=float, dest="omega_min")
    mel.add_argument("--omega-max", type=float, dest="omega_max")
    mel.add_argument("--n", type=int)
    _add_point_flags(mel)
    _add_common(mel)

    avg = subs.add_parser("averaging", help="slow-rotation branches and "
                                            "existence boundaries")
    _add_point_flags(avg)
    avg.add_argument("--r", type=int)
    avg.add_argument("--q", type=int)
    avg.add_argument("--eps-min", type=float, dest="eps_min")
    avg.add_argument("--eps-max", type=float, dest="eps_max")
    avg.add_argument("--n", type=int)
    _add_common(avg)

    swp = subs.add_parser("sweep", help="regime map over a parameter plane")
    swp.add_argument("--plane", choices=("omega-eps", "ratio-eps"))
    swp.add_argument("--omega-min", type=float, dest="omega_min")
    swp.add_argument("--omega-max", type=float, dest="omega_max")
    swp.add_argument("--n-omega", type=int, dest="n_omega")
    swp.add_argument("--eps-min", type=float, dest="eps_min")
    swp.add_argument("--eps-max", type=float, dest="eps_max")
    swp.add_argument("--n-eps", type=int, dest="n_eps")
    swp.add_argument("--beta", type=float)
    swp.add_argument("--omega", type=float)
    swp.add_argument("--ratio-min", type=float, dest="ratio_min")
    swp.add_argument("--ratio-max", type=float, dest="ratio_max")
    swp.add_argument("--n-ratio", type=int, dest="n_ratio")
    swp.add_argument("--r", type=int)
    swp.add_argument("--boundaries")
    swp.add_argument("--jobs", type=int)
    swp.add_argument("--out-dir", dest="out_dir")
    swp.add_argument("--formats")
    _add_classifier_flags(swp)
    swp.add_argument("--config", help="key=value defaults file")

    ell = subs.add_parser("elliptic-check", help="special-function self-test")
    ell.add_argument("--n", type=int)
    _add_common(ell)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        resolver = _Resolver(args)
        return _HANDLERS[args.command](resolver)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
