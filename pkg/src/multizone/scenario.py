"""Experiment description tying geometry, target source and solver settings together."""

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (AIR_DENSITY, BRIGHT, DARK, SPEED_OF_SOUND, Zone, build_control_layout,
                       build_eval_grid, build_rectangular_array, check_zones_disjoint,
                       scaled_plane_wave)
from .matrices import RADIAL, TANGENTIAL
from .solver import SolverConfig, bin_frequencies


@dataclass(frozen=True)
class MethodSpec:
    """Control-point layout and optimized quantities of one rendering method."""

    name: str
    style: str
    group_count: int
    quantities: tuple = ()
    kappa: float = 1.0


PRESET_METHODS = {
    "pm": MethodSpec("pm", "pairs", 24, (), 1.0),
    "jpvm": MethodSpec("jpvm", "l_shape", 16, (RADIAL, TANGENTIAL), 0.04),
    "jpvm_plus": MethodSpec("jpvm_plus", "pairs", 24, (RADIAL,), 0.04),
    # isolate the tangential term on the L-shaped layout
    "jpvm_radial_only": MethodSpec("jpvm_radial_only", "l_shape", 16, (RADIAL,), 0.04),
    "jpvm_tangential_only": MethodSpec("jpvm_tangential_only", "l_shape", 16, (TANGENTIAL,), 0.04),
}


@dataclass
class Scenario:
    loudspeakers: np.ndarray
    bright: Zone
    dark: tuple
    source: object
    methods: dict = field(default_factory=lambda: dict(PRESET_METHODS))
    solver: SolverConfig = field(default_factory=SolverConfig)
    fs: float = 8000.0
    filter_length: int = 256
    c: float = SPEED_OF_SOUND
    rho: float = AIR_DENSITY
    grid_spacing: float = 0.02
    grid_side: int = 21
    f_min: float = 100.0
    rir_length: int = 128
    layout_offset: float = 0.0

    def __post_init__(self):
        self.loudspeakers = np.asarray(self.loudspeakers, dtype=float)
        self.dark = tuple(self.dark)
        if self.bright.kind != BRIGHT or any(z.kind != DARK for z in self.dark):
            raise ValueError("zone kinds do not match their roles")
        check_zones_disjoint(self.zones)
        for zone in self.zones:
            d = np.linalg.norm(self.loudspeakers[:, :2] - zone.center, axis=1)
            if np.any(d <= zone.r_out):
                raise ValueError("loudspeakers must lie outside every zone")

    @property
    def zones(self):
        return (self.bright, *self.dark)

    @property
    def n_loudspeakers(self):
        return len(self.loudspeakers)

    @property
    def frequencies(self):
        return bin_frequencies(self.fs, self.filter_length)

    def layouts(self, method):
        spec = self.methods[method]
        return [build_control_layout(z, spec.style, spec.group_count, self.layout_offset)
                for z in self.zones]

    def solver_config(self, method):
        return replace(self.solver, kappa=self.methods[method].kappa)

    def eval_grids(self):
        return [build_eval_grid(z, self.grid_spacing, self.grid_side) for z in self.zones]


def reference_scenario(**overrides):
    """Two-zone free-field setup: 70 loudspeakers on a 3.95 m x 3 m rectangle,
    zones of radius 0.3 m one meter apart, plane wave from -50 degrees."""
    loudspeakers = build_rectangular_array(3.95, 3.0, 70)
    bright = Zone((0.0, 0.5), 0.275, 0.3, BRIGHT)
    dark = Zone((0.0, -0.5), 0.275, 0.3, DARK)
    source = scaled_plane_wave(np.deg2rad(-50.0), loudspeakers, bright.center)
    kwargs = dict(loudspeakers=loudspeakers, bright=bright, dark=(dark,), source=source,
                  solver=SolverConfig(lwe_max=10 / len(loudspeakers)))
    kwargs.update(overrides)
    return Scenario(**kwargs)
