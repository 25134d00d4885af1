"""
Robustness to measurement noise
===============================

The filters are designed from 128-sample free-field impulse responses with
white Gaussian noise added at a given SNR, then evaluated on the exact
model. Velocity-based designs work with pressure differences of closely
spaced microphones, so they are expected to suffer more from noise.
"""

# %%
import numpy as np

from multizone.evaluation import run_noise_experiment
from multizone.scenario import reference_scenario

results = run_noise_experiment(reference_scenario(), [10.0, 20.0, 30.0, 60.0, np.inf], seed=0)

# %%
print(f"{'SNR':>5}" + "".join(f"{m:>22}" for m in results[0].delta_l_db))
for res in results:
    cells = "".join(f"{res.delta_l_db[m]:10.2f} /{res.mse_bright_db[m]:8.2f}  "
                    for m in res.delta_l_db)
    print(f"{res.snr:5g}  {cells}")
print("cells: level difference [dB] / bright-zone MSE [dB]")
