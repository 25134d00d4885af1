"""Multizone sound rendering with joint pressure and particle-velocity matching.

Loudspeaker prefilters are designed by regularized least squares on control
points around a bright and a dark listening zone. Pressure matching (``pm``)
uses pressure alone. Joint pressure and velocity matching (``jpvm``) adds both
velocity components on L-shaped control groups. The radial-velocity variant
(``jpvm_plus``) keeps only the radial component on control-point pairs. A
modal toolbox explains at which frequencies contour control points lose sight
of the sound field.
"""

from .evaluation import (MetricsReport, NoiseExperimentResult, evaluate_bank, field_snapshot,
                         level_difference, mse, render_pressure, run_noise_experiment)
from .geometry import (AIR_DENSITY, SPEED_OF_SOUND, ControlLayout, EvalGrid, VirtualSource, Zone,
                       build_circular_array, build_control_layout, build_eval_grid,
                       build_rectangular_array, greens_function_3d)
from .matrices import (assemble_transfer_matrix, build_difference_matrix, build_system,
                       desired_vectors)
from .modal import (ConvergenceError, fourier_coeff_pressure, fourier_coeff_radial_diff,
                    fourier_coeff_tangential_diff, modal_pressure, modal_weight_point_source,
                    scan_observability)
from .scenario import PRESET_METHODS, MethodSpec, Scenario, reference_scenario
from .solver import (PrefilterBank, SolverConfig, SolverError, lwe, solve_prefilter_bank,
                     solve_single_freq, wng_estimate)

__version__ = "0.1.0"
