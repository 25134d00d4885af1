"""
White noise gain and loudspeaker weight energy
==============================================

For a circular array and a small bright zone at its center, every
loudspeaker is equally far from the zone center. The target source sits on
the array circle, so the desired level at the center equals that of a single
loudspeaker. The white noise gain there then reduces to the inverse of the
loudspeaker weight energy whenever the zone is reproduced accurately.
"""

# %%
import numpy as np

from multizone.evaluation import wng_lwe_study

study = wng_lwe_study()
for f, mc, inv in zip(study.frequencies[::6], study.wng_monte_carlo_db[::6],
                      study.wng_inverse_lwe_db[::6]):
    print(f"{f:7.1f} Hz   Monte Carlo {mc:7.2f} dB   1/LWE {inv:7.2f} dB")
print(f"largest deviation {np.max(np.abs(study.deviation_db)):.3f} dB")
