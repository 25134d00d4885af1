"""Circular-harmonic observability of point-source fields on zone contours.

A point source at radius ``r0`` and azimuth ``phi0`` in the plane of the zone is
expanded in spherical harmonics around the zone center. Restricting the
expansion to the plane (colatitude pi/2 for source and observer) gives the
Fourier coefficients of the pressure on a circle of radius ``R``::

    a_m(R) = sum_{n >= |m|} alpha_mn * j_n(k R) * b_mn * P_n^|m|(0)

with modal weights ``alpha_mn = -i k h_n^(2)(k r0) b_mn P_n^|m|(0) exp(-i m phi0)``.
Radial and tangential pressure differences follow by linearity.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .geometry import SPEED_OF_SOUND
from .special import normalized_legendre_equator, spherical_bessel_j, spherical_hankel2

GOLDEN = (math.sqrt(5) - 1) / 2
PRESSURE = "pressure"
RADIAL_DIFF = "radial_diff"
TANGENTIAL_DIFF = "tangential_diff"


class ConvergenceError(RuntimeError):
    pass


def modal_weight_point_source(m, n, r0, phi0, omega, c=SPEED_OF_SOUND):
    """In-plane modal weight ``alpha_mn`` of a unit point source."""
    if abs(m) > n:
        raise ValueError(f"|m| must not exceed n, got m={m}, n={n}")
    if r0 <= 0 or omega <= 0:
        raise ValueError("need r0 > 0 and omega > 0")
    k = omega / c
    return (-1j * k * spherical_hankel2(n, k * r0) * normalized_legendre_equator(m, n)
            * np.exp(-1j * m * phi0))


def truncation_cap(m, k, radius, r0):
    return max(math.ceil(math.e * k * max(radius, r0) / 2) + 30, abs(m) + 30)


def _truncate(terms, tol, run):
    """Index one past the end of the first run of ``run`` negligible terms."""
    partial = np.cumsum(terms)
    small = np.abs(terms) < tol * np.abs(partial)
    count = 0
    for i, s in enumerate(small):
        count = count + 1 if s else 0
        if count == run:
            return i + 1
    return None


def _coefficient(m, radial_factor, r_max, r0, phi0, omega, c, tol, run):
    """Sum ``alpha_mn * radial_factor(n, k) * b_mn P_n^|m|(0)`` over non-vanishing ``n``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if r_max >= r0:
        raise ValueError("the interior expansion needs the contour inside the source radius")
    k = omega / c
    cap = truncation_cap(m, k, r_max, r0)
    # P_n^|m|(0) vanishes for odd n + |m|
    n = np.arange(abs(m), cap + 1, 2)
    legendre2 = normalized_legendre_equator(m, n) ** 2
    terms = (-1j * k * spherical_hankel2(n, k * r0) * legendre2 * radial_factor(n, k)
             * np.exp(-1j * m * phi0))
    stop = _truncate(terms, tol, run)
    if stop is None:
        raise ConvergenceError(f"modal sum for m={m} did not converge below order {cap}")
    return terms[:stop].sum(), int(n[stop - 1])


def fourier_coeff_pressure(m, R, r0, phi0, omega, c=SPEED_OF_SOUND, tol=1e-12, run=8,
                           full_output=False):
    """Fourier coefficient ``a_m`` of the pressure on the circle of radius ``R``."""
    value, order = _coefficient(m, lambda n, k: spherical_bessel_j(n, k * R), R, r0, phi0,
                                omega, c, tol, run)
    return (value, order) if full_output else value


def fourier_coeff_radial_diff(m, R_in, R_out, r0, phi0, omega, c=SPEED_OF_SOUND, tol=1e-12,
                              run=8, full_output=False):
    """Fourier coefficient of ``P(R_in, phi) - P(R_out, phi)``."""
    if R_in > R_out:
        raise ValueError("need R_in <= R_out")

    def factor(n, k):
        return spherical_bessel_j(n, k * R_in) - spherical_bessel_j(n, k * R_out)

    if R_in == R_out:
        return (0j, abs(m)) if full_output else 0j
    value, order = _coefficient(m, factor, R_out, r0, phi0, omega, c, tol, run)
    return (value, order) if full_output else value


def fourier_coeff_tangential_diff(m, R_out, dphi, r0, phi0, omega, c=SPEED_OF_SOUND, tol=1e-12,
                                  run=8, full_output=False):
    """Fourier coefficient of ``P(R_out, phi + dphi) - P(R_out, phi)``.

    A rotation only shifts the phase of each circular harmonic, so this is
    ``a_m(R_out) * (exp(i m dphi) - 1)``.
    """
    if dphi <= 0:
        raise ValueError("dphi must be positive")
    a, order = fourier_coeff_pressure(m, R_out, r0, phi0, omega, c, tol, run, full_output=True)
    value = a * (np.exp(1j * m * dphi) - 1)
    return (value, order) if full_output else value


def modal_pressure(r, phi, r0, phi0, omega, c=SPEED_OF_SOUND, tol=1e-12, run=8):
    """Pressure of a unit point source at an in-plane point ``(r, phi)`` from the modal sum.

    Requires ``r < r0``.
    """
    if r >= r0:
        raise ValueError("the interior expansion needs r < r0")
    k = omega / c
    cap = truncation_cap(0, k, r, r0)
    terms = np.zeros(cap + 1, dtype=complex)
    for n in range(cap + 1):
        m = np.arange(-n, n + 1)
        angular = np.sum(normalized_legendre_equator(m, n) ** 2 * np.exp(1j * m * (phi - phi0)))
        terms[n] = (-1j * k * spherical_hankel2(n, k * r0) * spherical_bessel_j(n, k * r)
                    * angular)
    # odd orders with even total parity are not zero here, so test runs directly
    stop = _truncate(terms, tol, 2 * run)
    if stop is None:
        raise ConvergenceError(f"modal pressure did not converge below order {cap}")
    return terms[:stop].sum()


@dataclass
class ModalSpectrum:
    """One Fourier coefficient over frequency."""

    m: int
    kind: str
    frequencies: np.ndarray
    values: np.ndarray
    orders: np.ndarray
    r_out: float
    r0: float
    phi0: float
    r_in: float | None = None
    dphi: float | None = None

    @property
    def magnitude(self):
        return np.abs(self.values)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frequency_hz", "real", "imag", "magnitude", "truncation_order"])
            for f, v, n in zip(self.frequencies, self.values, self.orders):
                writer.writerow([repr(float(f)), repr(float(v.real)), repr(float(v.imag)),
                                 repr(float(abs(v))), int(n)])


def modal_spectrum(kind, m, frequencies, r_out, r0, phi0=0.0, r_in=None, dphi=None,
                   c=SPEED_OF_SOUND):
    """Evaluate ``a_m``, ``Delta a_rad,m`` or ``Delta a_tan,m`` on a frequency grid."""
    frequencies = np.asarray(frequencies, dtype=float)
    if kind == PRESSURE:
        def fn(omega):
            return fourier_coeff_pressure(m, r_out, r0, phi0, omega, c, full_output=True)
    elif kind == RADIAL_DIFF:
        if r_in is None:
            raise ValueError("radial differences need r_in")

        def fn(omega):
            return fourier_coeff_radial_diff(m, r_in, r_out, r0, phi0, omega, c, full_output=True)
    elif kind == TANGENTIAL_DIFF:
        if dphi is None:
            raise ValueError("tangential differences need dphi")

        def fn(omega):
            return fourier_coeff_tangential_diff(m, r_out, dphi, r0, phi0, omega, c,
                                                 full_output=True)
    else:
        raise ValueError(f"unknown coefficient kind {kind!r}")
    out = [fn(2 * np.pi * f) for f in frequencies]
    values = np.array([v for v, _ in out], dtype=complex)
    orders = np.array([n for _, n in out], dtype=int)
    return ModalSpectrum(m, kind, frequencies, values, orders, r_out, r0, phi0, r_in, dphi)


def observability(m, radii, r0, frequency, phi0=0.0, c=SPEED_OF_SOUND):
    """``|a_m(R)|`` for one radius, ``max_R |a_m(R)|`` for several."""
    omega = 2 * np.pi * frequency
    return max(abs(fourier_coeff_pressure(m, R, r0, phi0, omega, c)) for R in radii)


def golden_section_minimize(fn, a, b, xtol):
    """Golden-section search for a minimum of a unimodal ``fn`` on ``[a, b]``."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > xtol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    return (a + b) / 2


def scan_observability(m, radii, f_range, step, r0, phi0=0.0, c=SPEED_OF_SOUND, xtol=0.1,
                       min_prominence_db=3.0):
    """Frequencies of the local minima of the contour observability of degree ``m``.

    Parameters
    ----------
    m : int
    radii : float or sequence of float
        One radius scans ``|a_m(R)|``; two (or more) scan the largest magnitude
        over the radii.
    f_range : (float, float)
        Scan interval in Hz.
    step : float
        Grid step in Hz. Minima are bracketed on the grid and then refined by
        golden-section search to ``xtol`` Hz.
    r0, phi0 : float
        Source radius and azimuth relative to the zone center.
    min_prominence_db : float
        Minimum depth of a notch relative to its surroundings. With several
        radii the envelope has shallow kinks where two magnitude curves cross
        near a shared peak (well under 1 dB); these are not observability
        losses and are dropped. ``0`` keeps every local minimum.

    Returns
    -------
    list of float
        Ascending minimum frequencies; empty if the scan has no qualifying minimum.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    f_lo, f_hi = f_range
    if step <= 0:
        raise ValueError("scan step must be positive")
    if f_lo <= 0 or f_hi <= f_lo:
        raise ValueError("frequency range must satisfy 0 < f_start < f_stop")
    if step > f_hi - f_lo:
        raise ValueError("scan step exceeds the frequency range")
    if min_prominence_db < 0:
        raise ValueError("min_prominence_db must be non-negative")
    grid = np.arange(f_lo, f_hi + step / 2, step)

    def fn(f):
        return observability(m, radii, r0, f, phi0, c)

    level = 20 * np.log10(np.array([fn(f) for f in grid]))
    idx, _ = find_peaks(-level, prominence=min_prominence_db)
    return [golden_section_minimize(fn, grid[i - 1], grid[i + 1], xtol) for i in idx]
