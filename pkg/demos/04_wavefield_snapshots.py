"""
Looking at the rendered wavefield
=================================

Steady-state snapshots at 450 Hz and 700 Hz, near the frequencies where the
contour pressure does not observe the zone interior, and a pulse frame of
the broadband filters. Frames are written as PGM images to ./demo_frames.
"""

# %%
from pathlib import Path

import numpy as np

from multizone.evaluation import (evaluate_weights, field_snapshot, hann_pulse, raster_grid,
                                  steady_state_frame, write_pgm)
from multizone.scenario import reference_scenario
from multizone.solver import solve_frequency, solve_prefilter_bank

out = Path("demo_frames")
out.mkdir(exist_ok=True)
scenario = reference_scenario()
points, shape = raster_grid((-1.5, 1.5), (-1.2, 1.2), 0.02)

# %%
for f in (450.0, 700.0):
    for method in ("pm", "jpvm_plus"):
        omega = 2 * np.pi * f
        w, _ = solve_frequency(scenario, method, omega)
        frame = steady_state_frame(scenario.loudspeakers, w, points, omega).reshape(shape)
        write_pgm(frame, out / f"steady_{method}_{f:g}Hz.pgm", limit=1.0)
        e_d = evaluate_weights(scenario, [w], [f]).energy_dark[0]
        print(f"{f:5g} Hz  {method:<10} dark-zone energy {e_d:.2e}")

# %%
# A Hann pulse through the JPVM+ filters, shortly after the wavefront has
# crossed the zones.
bank = solve_prefilter_bank(scenario, "jpvm_plus")
frame = field_snapshot(bank, hann_pulse(32), points, 200, scenario.loudspeakers, scenario.fs)
write_pgm(frame.reshape(shape), out / "pulse_jpvm_plus_t200.pgm", limit=1.0)
print(f"frames written to {out.resolve()}")
