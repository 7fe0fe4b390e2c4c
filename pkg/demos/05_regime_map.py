"""
Regime map with analytic overlays
=================================

Classify a grid of (omega, eps) cells at fixed damping and draw the
bifurcation boundaries on top. Coarser and shorter than the full map so it
finishes in seconds; raise the grid and classifier numbers for figures.
"""

from pathlib import Path

from varpend import BoundaryRequest, ClassifierConfig, SweepSpec, export_map, run_sweep

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

spec = SweepSpec(
    omega_range=(0.1, 1.2, 24),
    eps_range=(0.0, 0.3, 16),
    beta=0.05,
    classifier=ClassifierConfig(transient_periods=200, sample_periods=100),
    boundaries=(BoundaryRequest("homoclinic"),
                BoundaryRequest("oscillation", 2),
                BoundaryRequest("rotation", 1)),
)
result = run_sweep(spec, jobs=2)

print("cells by kind:")
for kind, count in sorted(result.counts().items()):
    print(f"  {kind:21s} {count}")

paths = export_map(result, out_dir)
for fmt, path in paths.items():
    print("wrote", path)
