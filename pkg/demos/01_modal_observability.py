"""
Which circular harmonics can a control contour observe?
=======================================================

A point source 2.5 m from the zone center is expanded into circular
harmonics on the two control circles (0.275 m and 0.3 m). Where a
coefficient vanishes on every contour, pressure matching cannot see that
mode, and the interior field of that order is left uncontrolled.
"""

# %%
import numpy as np

from multizone.modal import (fourier_coeff_pressure, fourier_coeff_radial_diff,
                             fourier_coeff_tangential_diff, scan_observability)

R_IN, R_OUT, R0, PHI0 = 0.275, 0.3, 2.5, np.pi

# %%
# Magnitude of the order-1 coefficient on both circles and of their
# difference. Near 728 Hz the pressure coefficients are small on both
# circles at once, but the radial difference is not.
for f in (300.0, 600.0, 728.0, 900.0):
    omega = 2 * np.pi * f
    a_in = abs(fourier_coeff_pressure(1, R_IN, R0, PHI0, omega))
    a_out = abs(fourier_coeff_pressure(1, R_OUT, R0, PHI0, omega))
    rad = abs(fourier_coeff_radial_diff(1, R_IN, R_OUT, R0, PHI0, omega))
    print(f"{f:6.0f} Hz   |a_in| {a_in:.2e}   |a_out| {a_out:.2e}   |radial diff| {rad:.2e}")

# %%
# Minima of the joint observability, per order.
for m in range(4):
    pair = scan_observability(m, [R_IN, R_OUT], (100, 2000), 2.0, R0, PHI0)
    outer = scan_observability(m, [R_OUT], (100, 2000), 2.0, R0, PHI0)
    print(f"m = {m}: both circles {np.round(pair, 1)}   outer circle only {np.round(outer, 1)}")

# %%
# The tangential difference of a rotated contour only rescales each
# coefficient by exp(i m dphi) - 1. It carries no new information and is
# exactly zero for m = 0.
dphi = (R_OUT - R_IN) / R_OUT
for m in (0, 1, 4):
    t = fourier_coeff_tangential_diff(m, R_OUT, dphi, R0, PHI0, 2 * np.pi * 728)
    a = fourier_coeff_pressure(m, R_OUT, R0, PHI0, 2 * np.pi * 728)
    print(f"m = {m}: tangential diff {abs(t):.3e}, |a_m| |exp(i m dphi) - 1| "
          f"{abs(a) * abs(np.exp(1j * m * dphi) - 1):.3e}")
