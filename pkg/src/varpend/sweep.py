"""Parameter-plane regime maps with analytic boundary overlays.

A sweep classifies every cell of an (omega, eps) grid at fixed beta from one
declared initial condition, then samples the requested threshold curves on
the same abscissa grid so the map and its overlays share coordinates. A
second plane, (omega/beta, eps) at fixed small omega, serves the averaging
comparison; its cells are seeded from the plus branch of the averaged
rotation whenever that branch exists.

Cells are independent and pure, so parallel and serial runs produce
identical grids; scheduling is a static block partition.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .averaging import existence_threshold, solve_branches
from .classify import (DEFAULT_CLASSIFIER, ClassifierConfig, RegimeLabel,
                       classify, label_from_record)
from .errors import DomainError
from .melnikov import homoclinic_threshold, osc_threshold, rot_threshold
from .model import Params, State

__all__ = [
    "DEFAULT_INITIAL",
    "AVERAGING_CLASSIFIER",
    "BoundaryRequest",
    "BoundaryCurve",
    "SweepSpec",
    "SweepResult",
    "run_sweep",
    "run_averaging_sweep",
    "export_map",
    "import_map",
    "KIND_COLORS",
]

# the declared sweep initial condition (the source papers leave theirs
# unstated; this one is part of this artifact's contract)
DEFAULT_INITIAL = State(theta=0.1, v=0.0, tau=0.0)

# slow-rotation cells converge at rate ~ omega^2 |F'|, so the averaging
# plane needs a far longer transient than the default classifier
AVERAGING_CLASSIFIER = ClassifierConfig(transient_periods=20000,
                                        sample_periods=50)

_BOUNDARY_KINDS = ("homoclinic", "oscillation", "rotation", "averaging")


@dataclass(frozen=True)
class BoundaryRequest:
    """One requested overlay: a threshold family plus its resonance index."""

    kind: str
    resonance: int | None = None

    def __post_init__(self):
        if self.kind not in _BOUNDARY_KINDS:
            raise DomainError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "homoclinic":
            if self.resonance is not None:
                raise DomainError("homoclinic boundary carries no resonance")
        elif self.resonance is None or self.resonance < 1:
            raise DomainError(f"{self.kind} boundary needs a natural resonance")


@dataclass(frozen=True)
class BoundaryCurve:
    """Sampled threshold curve: finite ordinates on a monotone abscissa."""

    kind: str
    resonance: int | None
    abscissa: np.ndarray
    ordinate: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.abscissa, dtype=float)
        o = np.asarray(self.ordinate, dtype=float)
        if a.shape != o.shape or a.ndim != 1:
            raise DomainError("curve needs matching 1-d sample arrays")
        if not np.all(np.isfinite(o)) or not np.all(np.isfinite(a)):
            raise DomainError("curve samples must be finite")
        if a.size > 1 and not np.all(np.diff(a) > 0.0):
            raise DomainError("curve abscissa must increase")
        object.__setattr__(self, "abscissa", a)
        object.__setattr__(self, "ordinate", o)


@dataclass(frozen=True)
class SweepSpec:
    """Grid over (omega, eps) at fixed beta: (min, max, n) per axis."""

    omega_range: tuple[float, float, int]
    eps_range: tuple[float, float, int]
    beta: float
    classifier: ClassifierConfig = DEFAULT_CLASSIFIER
    initial: State = DEFAULT_INITIAL
    boundaries: tuple[BoundaryRequest, ...] = ()

    def __post_init__(self):
        for name, (lo, hi, n) in (("omega", self.omega_range),
                                  ("eps", self.eps_range)):
            if n < 2:
                raise DomainError(f"{name} axis needs at least 2 samples")
            if not lo < hi:
                raise DomainError(f"{name} range must increase")
        if self.omega_range[0] <= 0.0:
            raise DomainError("omega range must be positive")
        if self.eps_range[0] < 0.0 or self.beta < 0.0:
            raise DomainError("eps and beta must be nonnegative")
        # reject the whole grid up front if its top edge is out of range
        Params(eps=self.eps_range[1], beta=self.beta,
               omega=self.omega_range[0])

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi, n = self.omega_range
        xs = np.linspace(lo, hi, n)
        lo, hi, n = self.eps_range
        return xs, np.linspace(lo, hi, n)


@dataclass(frozen=True)
class SweepResult:
    """Classified grid plus overlay curves; labels indexed [iy][ix]."""

    x_name: str
    y_name: str
    fixed_name: str
    fixed_value: float
    xs: np.ndarray
    ys: np.ndarray
    labels: tuple[tuple[RegimeLabel, ...], ...]
    curves: tuple[BoundaryCurve, ...]

    def name_stem(self) -> str:
        tag = "" if self.fixed_name == "beta" else "avg_"
        return (f"sweep_{tag}{self.fixed_value:g}_"
                f"{self.xs.size}x{self.ys.size}")

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for row in self.labels:
            for lab in row:
                out[lab.kind] = out.get(lab.kind, 0) + 1
        return out


def _classify_cell(init: State, p: Params, cfg: ClassifierConfig) -> RegimeLabel:
    try:
        return classify(init, p, cfg)
    except Exception:
        return RegimeLabel("undecided", None, None)


def _run_grid(cell_fn, nx: int, ny: int, jobs: int) -> tuple:
    flat: list = [None] * (nx * ny)

    def block(k0: int, k1: int) -> None:
        for k in range(k0, k1):
            flat[k] = cell_fn(k % nx, k // nx)

    total = nx * ny
    if jobs <= 1:
        block(0, total)
    else:
        # static block partition: worker w owns one contiguous slice
        edges = np.linspace(0, total, jobs + 1).astype(int)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(block, int(a), int(b))
                       for a, b in zip(edges[:-1], edges[1:]) if a < b]
            for fut in futures:
                fut.result()
    return tuple(tuple(flat[iy * nx:(iy + 1) * nx]) for iy in range(ny))


def _melnikov_curve(req: BoundaryRequest, omegas: np.ndarray,
                    beta: float) -> BoundaryCurve | None:
    if req.kind == "homoclinic":
        fn = homoclinic_threshold
    elif req.kind == "oscillation":
        fn = lambda om: osc_threshold(om, req.resonance)
    else:
        fn = lambda om: rot_threshold(om, req.resonance)
    xs = []
    ys = []
    for om in omegas:
        val = fn(float(om))
        if val is None or not math.isfinite(val):
            continue
        xs.append(float(om))
        ys.append(beta * val)
    if not xs:
        return None
    return BoundaryCurve(req.kind, req.resonance, np.array(xs), np.array(ys))


def _averaging_curve(resonance: int, eps_grid: np.ndarray,
                     scale: float) -> BoundaryCurve | None:
    """Existence boundary as (scale * omega/beta threshold, eps) points;
    scale=beta maps onto the omega axis, scale=1 onto the ratio axis."""
    xs = []
    ys = []
    for eps in eps_grid:
        if eps <= 0.0:
            continue
        thr = existence_threshold(float(eps), resonance, 1)
        if not math.isfinite(thr):
            continue
        xs.append(scale * thr)
        ys.append(float(eps))
    if not xs:
        return None
    order = slice(None, None, -1) if len(xs) > 1 and xs[0] > xs[-1] else slice(None)
    return BoundaryCurve("averaging", resonance,
                         np.array(xs[order]), np.array(ys[order]))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Classify the grid and sample every requested boundary curve.

    Cell failures become undecided labels; the sweep itself never aborts.
    """
    if jobs < 1:
        raise DomainError(f"jobs must be positive, got {jobs!r}")
    xs, ys = spec.axes()

    def cell(ix: int, iy: int) -> RegimeLabel:
        p = Params(eps=float(ys[iy]), beta=spec.beta, omega=float(xs[ix]))
        return _classify_cell(spec.initial, p, spec.classifier)

    labels = _run_grid(cell, xs.size, ys.size, jobs)
    curves = []
    for req in spec.boundaries:
        if req.kind == "averaging":
            curve = _averaging_curve(req.resonance, ys, spec.beta)
        else:
            curve = _melnikov_curve(req, xs, spec.beta)
        if curve is not None:
            curves.append(curve)
    return SweepResult("omega", "eps", "beta", spec.beta, xs, ys,
                       labels, tuple(curves))


def run_averaging_sweep(omega: float, ratio_range: tuple[float, float, int],
                        eps_range: tuple[float, float, int], r: int = 1,
                        classifier: ClassifierConfig = AVERAGING_CLASSIFIER,
                        jobs: int = 1) -> SweepResult:
    """Map the (omega/beta, eps) plane at fixed small omega for r:1 rotations.

    Wherever the averaged plus branch exists the cell simulation starts on
    it (theta = theta_plus, sector velocity s0); elsewhere the default
    initial condition is used. Labels still come from full simulation.
    """
    if omega <= 0.0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    if int(r) != r or r < 1:
        raise DomainError(f"rotation index must be natural, got {r!r}")
    for name, (lo, hi, n) in (("ratio", ratio_range), ("eps", eps_range)):
        if n < 2 or not lo < hi:
            raise DomainError(f"bad {name} range {(lo, hi, n)!r}")
    if ratio_range[0] <= 0.0:
        raise DomainError("omega/beta range must be positive")
    if jobs < 1:
        raise DomainError(f"jobs must be positive, got {jobs!r}")
    xs = np.linspace(*ratio_range[:2], ratio_range[2])
    ys = np.linspace(*eps_range[:2], eps_range[2])

    def cell(ix: int, iy: int) -> RegimeLabel:
        p = Params(eps=float(ys[iy]), beta=omega / float(xs[ix]), omega=omega)
        try:
            rot = solve_branches(p, r, 1)
        except DomainError:
            return RegimeLabel("undecided", None, None)
        init = DEFAULT_INITIAL
        if rot.exists:
            v0 = rot.s0 / p.length_factor(0.0) ** 2
            init = State(theta=rot.theta_plus, v=v0, tau=0.0)
        return _classify_cell(init, p, classifier)

    labels = _run_grid(cell, xs.size, ys.size, jobs)
    curve = _averaging_curve(r, ys, 1.0)
    curves = (curve,) if curve is not None else ()
    return SweepResult("omega_over_beta", "eps", "omega", omega, xs, ys,
                       labels, curves)


def _grid_records(result: SweepResult) -> list[list[dict]]:
    return [[lab.to_record() for lab in row] for row in result.labels]


def _csv_text(result: SweepResult) -> str:
    lines = [f"{result.x_name},{result.y_name},kind,r,q"]
    fmt = lambda n: "" if n is None else str(n)
    for iy, row in enumerate(result.labels):
        for ix, lab in enumerate(row):
            lines.append(f"{float(result.xs[ix])!r},{float(result.ys[iy])!r},"
                         f"{lab.kind},{fmt(lab.r)},{fmt(lab.q)}")
    return "\n".join(lines) + "\n"


def _json_text(result: SweepResult) -> str:
    doc = {
        "plane": {"x": result.x_name, "y": result.y_name,
                  "fixed": result.fixed_name,
                  "fixed_value": result.fixed_value},
        "xs": result.xs.tolist(),
        "ys": result.ys.tolist(),
        "labels": _grid_records(result),
        "curves": [{"kind": c.kind, "resonance": c.resonance,
                    "abscissa": c.abscissa.tolist(),
                    "ordinate": c.ordinate.tolist()}
                   for c in result.curves],
    }
    return json.dumps(doc, indent=1)


def import_map(path) -> SweepResult:
    """Rebuild a SweepResult from its JSON export."""
    doc = json.loads(Path(path).read_text())
    labels = tuple(tuple(label_from_record(rec) for rec in row)
                   for row in doc["labels"])
    curves = tuple(BoundaryCurve(c["kind"], c["resonance"],
                                 np.array(c["abscissa"], dtype=float),
                                 np.array(c["ordinate"], dtype=float))
                   for c in doc["curves"])
    plane = doc["plane"]
    return SweepResult(plane["x"], plane["y"], plane["fixed"],
                       float(plane["fixed_value"]),
                       np.array(doc["xs"], dtype=float),
                       np.array(doc["ys"], dtype=float), labels, curves)


KIND_COLORS = {
    "equilibrium": "#eeeeee",
    "oscillation": "#4477cc",
    "rotation": "#33aa66",
    "rotation-oscillation": "#ddaa33",
    "chaotic": "#cc3344",
    "undecided": "#b3a6b8",
}

_CURVE_COLORS = {
    "homoclinic": "#000000",
    "oscillation": "#1133aa",
    "rotation": "#116633",
    "averaging": "#7722aa",
}

_SVG_PLOT = (60.0, 20.0, 480.0, 360.0)  # left, top, width, height


def _svg_text(result: SweepResult) -> str:
    left, top, width, height = _SVG_PLOT
    nx, ny = result.xs.size, result.ys.size
    x0, x1 = float(result.xs[0]), float(result.xs[-1])
    y0, y1 = float(result.ys[0]), float(result.ys[-1])
    cw, ch = width / nx, height / ny

    def sx(val: float) -> float:
        return left + (val - x0) / (x1 - x0) * width

    def sy(val: float) -> float:
        return top + height - (val - y0) / (y1 - y0) * height

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="760" '
           f'height="{top + height + 45:.0f}" font-family="sans-serif" '
           f'font-size="11">']
    # raster: sample (ix, iy) fills the cell centred on it
    for iy, row in enumerate(result.labels):
        for ix, lab in enumerate(row):
            cx = sx(float(result.xs[ix])) - 0.5 * cw
            cy = sy(float(result.ys[iy])) - 0.5 * ch
            out.append(f'<rect class="cell" x="{cx:.2f}" y="{cy:.2f}" '
                       f'width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" '
                       f'fill="{KIND_COLORS[lab.kind]}"/>')
    for curve in result.curves:
        pts = [(sx(float(a)), sy(float(o)))
               for a, o in zip(curve.abscissa, curve.ordinate)
               if y0 <= o <= y1 and x0 <= a <= x1]
        if len(pts) < 2:
            continue
        path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
        out.append(f'<polyline fill="none" stroke="{_CURVE_COLORS[curve.kind]}" '
                   f'stroke-width="1.6" points="{path}"/>')
    frame = (f'<rect x="{left:.1f}" y="{top:.1f}" width="{width:.1f}" '
             f'height="{height:.1f}" fill="none" stroke="#333"/>')
    out.append(frame)
    out.append(f'<text x="{left:.0f}" y="{top + height + 16:.0f}">{x0:g}</text>')
    out.append(f'<text x="{left + width - 20:.0f}" y="{top + height + 16:.0f}">'
               f'{x1:g}</text>')
    out.append(f'<text x="{left + width / 2 - 20:.0f}" '
               f'y="{top + height + 34:.0f}">{result.x_name}</text>')
    out.append(f'<text x="{left - 38:.0f}" y="{top + height:.0f}">{y0:g}</text>')
    out.append(f'<text x="{left - 38:.0f}" y="{top + 10:.0f}">{y1:g}</text>')
    out.append(f'<text x="8" y="{top + height / 2:.0f}">{result.y_name}</text>')
    lx = left + width + 18
    ly = top + 6
    seen = result.counts()
    for kind in KIND_COLORS:
        if seen.get(kind, 0) == 0:
            continue
        out.append(f'<rect x="{lx:.0f}" y="{ly:.0f}" width="12" height="12" '
                   f'fill="{KIND_COLORS[kind]}" stroke="#333"/>')
        out.append(f'<text x="{lx + 17:.0f}" y="{ly + 10:.0f}">{kind}</text>')
        ly += 18
    for curve in result.curves:
        tag = curve.kind if curve.resonance is None else \
            f"{curve.kind} {curve.resonance}"
        out.append(f'<line x1="{lx:.0f}" y1="{ly + 6:.0f}" x2="{lx + 12:.0f}" '
                   f'y2="{ly + 6:.0f}" stroke="{_CURVE_COLORS[curve.kind]}" '
                   f'stroke-width="1.6"/>')
        out.append(f'<text x="{lx + 17:.0f}" y="{ly + 10:.0f}">{tag}</text>')
        ly += 18
    out.append("</svg>")
    return "\n".join(out) + "\n"


_WRITERS = {"csv": _csv_text, "json": _json_text, "svg": _svg_text}


def export_map(result: SweepResult, out_dir,
               formats: tuple[str, ...] = ("csv", "json", "svg")) -> dict[str, Path]:
    """Write sweep_<beta>_<nx>x<ny>.<fmt> files; returns path per format."""
    out_dir = Path(out_dir)
    paths: dict[str, Path] = {}
    for fmt in formats:
        if fmt not in _WRITERS:
            raise DomainError(f"unknown export format {fmt!r}")
        path = out_dir / f"{result.name_stem()}.{fmt}"
        try:
            path.write_text(_WRITERS[fmt](result))
        except OSError as exc:
            raise OSError(f"cannot write map file {path}: {exc}") from exc
        paths[fmt] = path
    return paths
