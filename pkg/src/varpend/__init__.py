"""Pendulum with periodically varying length: bifurcation boundaries,
averaged rotations, direct simulation, and parameter-plane regime maps."""

from .averaging import (AveragedRotation, approximate_rotation_solution,
                        existence_boundary, existence_threshold,
                        solve_branches, stability, steady_sector_velocity)
from .classify import (DEFAULT_CLASSIFIER, ClassifierConfig, RegimeLabel,
                       classify, winding_number)
from .errors import DomainError, NumericalError
from .integrator import (ANALYSIS_CONFIG, SWEEP_CONFIG, IntegratorConfig,
                         Trajectory, integrate, poincare_map)
from .melnikov import (MelnikovResult, homoclinic_melnikov, homoclinic_result,
                       homoclinic_threshold, osc_threshold, oscillatory_result,
                       rot_threshold, rotational_result,
                       subharmonic_osc_melnikov, subharmonic_rot_melnikov)
from .model import COSINE, Excitation, Params, State
from .sweep import (BoundaryRequest, SweepResult, SweepSpec, export_map,
                    import_map, run_averaging_sweep, run_sweep)

__version__ = "0.1.0"

__all__ = [
    "AveragedRotation", "approximate_rotation_solution", "existence_boundary",
    "existence_threshold", "solve_branches", "stability",
    "steady_sector_velocity",
    "DEFAULT_CLASSIFIER", "ClassifierConfig", "RegimeLabel", "classify",
    "winding_number",
    "DomainError", "NumericalError",
    "ANALYSIS_CONFIG", "SWEEP_CONFIG", "IntegratorConfig", "Trajectory",
    "integrate", "poincare_map",
    "MelnikovResult", "homoclinic_melnikov", "homoclinic_result",
    "homoclinic_threshold", "osc_threshold", "oscillatory_result",
    "rot_threshold", "rotational_result", "subharmonic_osc_melnikov",
    "subharmonic_rot_melnikov",
    "COSINE", "Excitation", "Params", "State",
    "BoundaryRequest", "SweepResult", "SweepSpec", "export_map", "import_map",
    "run_averaging_sweep", "run_sweep",
    "__version__",
]
