"""Reproduction metrics, the sensor-noise experiment and wavefield snapshots.

Metrics are evaluated with the free-field model on square grids inside each
zone. Per-bin errors and energies are stored linearly; every dB quantity is
derived from them on access.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import windows

from .geometry import (SPEED_OF_SOUND, _as3d, build_circular_array, desired_field,
                       greens_function_3d, transfer_functions)
from .matrices import stacked_points
from .solver import (PrefilterBank, SolverConfig, bin_frequencies, lwe, solve_prefilter_bank,
                     solve_single_freq)

DB_FLOOR = -120.0
METRICS_SCHEMA = "# multizone metrics v1"
NOISE_SCHEMA = "# multizone noise-sweep v1"
TABLE_METHODS = ("pm", "jpvm", "jpvm_plus")
NOISE_SCALINGS = ("per_response", "global")
# stream ids that keep noise realizations of different layouts apart
_STYLE_IDS = {"pairs": 0, "l_shape": 1}


def to_db(x, floor=DB_FLOOR):
    """``10 log10(x)`` clipped from below at ``floor`` (zero maps to the floor)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.maximum(10 * np.log10(x), floor)


def render_pressure(loudspeakers, w, points, omega, c=SPEED_OF_SOUND):
    """Reproduced pressure ``g(x)^T w`` at ``points``."""
    w = np.asarray(w)
    if w.shape[0] != len(loudspeakers):
        raise ValueError(f"{w.shape[0]} weights for {len(loudspeakers)} loudspeakers")
    return transfer_functions(points, loudspeakers, omega, c) @ w


def mse(rendered, desired):
    """Mean squared magnitude of the difference, averaged over the grid points."""
    rendered, desired = np.asarray(rendered), np.asarray(desired)
    if rendered.shape != desired.shape:
        raise ValueError(f"shape mismatch {rendered.shape} vs {desired.shape}")
    return float(np.mean(np.abs(rendered - desired) ** 2))


def level_difference(E_B, E_D):
    """``10 log10(E_B / E_D)`` in dB; ``+inf`` where the dark zone is silent."""
    E_B, E_D = np.asarray(E_B, dtype=float), np.asarray(E_D, dtype=float)
    if np.any(E_B < 0) or np.any(E_D < 0):
        raise ValueError("energies must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(E_D > 0, 10 * np.log10(E_B / np.where(E_D > 0, E_D, 1)), np.inf)
    return out if out.ndim else float(out)


def _broadband(values_db, frequencies, f_min):
    sel = (frequencies > f_min) & np.isfinite(values_db)
    if not np.any(sel):
        raise ValueError(f"no finite bins above {f_min} Hz")
    return float(np.mean(values_db[sel]))


@dataclass
class MetricsReport:
    """Per-bin reproduction metrics of one prefilter design.

    All arrays run over the solved bins ``k = 1..L/2``.
    """

    method: str
    frequencies: np.ndarray
    mse_bright: np.ndarray
    mse_dark: np.ndarray
    energy_bright: np.ndarray
    energy_dark: np.ndarray
    energy_desired: np.ndarray
    lwe: np.ndarray
    f_min: float = 100.0

    @property
    def mse_bright_db(self):
        return to_db(self.mse_bright)

    @property
    def mse_dark_db(self):
        return to_db(self.mse_dark)

    @property
    def mse_bright_normalized_db(self):
        """Bright-zone error relative to the desired energy."""
        return to_db(self.mse_bright / self.energy_desired)

    @property
    def level_difference_db(self):
        return level_difference(self.energy_bright, self.energy_dark)

    @property
    def wng_db(self):
        """White noise gain estimate ``1 / LWE`` in dB."""
        return -to_db(self.lwe)

    def broadband(self, f_min=None):
        """Means of the per-bin dB values over bins above ``f_min``."""
        f_min = self.f_min if f_min is None else f_min
        f = self.frequencies
        return {
            "delta_l_db": _broadband(self.level_difference_db, f, f_min),
            "mse_bright_db": _broadband(self.mse_bright_db, f, f_min),
            "mse_dark_db": _broadband(self.mse_dark_db, f, f_min),
            "mse_bright_normalized_db": _broadband(self.mse_bright_normalized_db, f, f_min),
            "wng_db": _broadband(self.wng_db, f, f_min),
        }

    COLUMNS = ("frequency_hz", "mse_bright", "mse_dark", "mse_bright_db", "mse_dark_db",
               "mse_bright_normalized_db", "energy_bright", "energy_dark", "delta_l_db", "lwe",
               "wng_db")

    def rows(self):
        cols = [self.frequencies, self.mse_bright, self.mse_dark, self.mse_bright_db,
                self.mse_dark_db, self.mse_bright_normalized_db, self.energy_bright,
                self.energy_dark, self.level_difference_db, self.lwe, self.wng_db]
        return [list(map(float, r)) for r in zip(*cols)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(METRICS_SCHEMA + "\n")
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for row in self.rows():
                writer.writerow([repr(v) for v in row])


def read_csv_table(path):
    """Read a CSV written by this package as ``(header, rows)``, skipping comment lines."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def evaluate_weights(scenario, weights, frequencies, method=""):
    """Metrics of per-frequency weights ``weights[i]`` at ``frequencies[i]``."""
    bright_grid, *dark_grids = scenario.eval_grids()
    dark_points = (np.concatenate([g.points for g in dark_grids]) if dark_grids
                   else np.zeros((0, 2)))
    n = len(frequencies)
    out = {key: np.zeros(n) for key in ("mb", "md", "eb", "ed", "edes", "lwe")}
    for i, (f, w) in enumerate(zip(frequencies, weights)):
        omega = 2 * np.pi * f
        p_b = render_pressure(scenario.loudspeakers, w, bright_grid.points, omega, scenario.c)
        h_b = desired_field(scenario.source, bright_grid.points, omega, "bright", scenario.c)
        p_d = render_pressure(scenario.loudspeakers, w, dark_points, omega, scenario.c)
        out["mb"][i] = mse(p_b, h_b)
        out["md"][i] = np.mean(np.abs(p_d) ** 2) if len(p_d) else 0.0
        out["eb"][i] = np.mean(np.abs(p_b) ** 2)
        out["ed"][i] = out["md"][i]
        out["edes"][i] = np.mean(np.abs(h_b) ** 2)
        out["lwe"][i] = lwe(w)
    return MetricsReport(method, np.asarray(frequencies, dtype=float), out["mb"], out["md"],
                         out["eb"], out["ed"], out["edes"], out["lwe"], scenario.f_min)


def evaluate_bank(scenario, bank, method=""):
    """Metrics of a prefilter bank on the solved bins ``1..L/2``."""
    return evaluate_weights(scenario, bank.weights[1:], bank.frequencies[1:], method)


# -- sensor-noise experiment ---------------------------------------------------

def synthesize_rirs(points, loudspeakers, fs, length, c=SPEED_OF_SOUND, half_width=32):
    """Free-field impulse responses as Hann-windowed sinc fractional delays.

    Returns
    -------
    ndarray of shape (n_points, n_loudspeakers, length)
        ``h[p, l, n] = sinc(n - tau) w(n - tau) / (4 pi r)`` with
        ``tau = r fs / c`` and a Hann window of half-width ``half_width``.
    """
    d = np.linalg.norm(_as3d(points)[:, None, :] - _as3d(loudspeakers)[None, :, :], axis=-1)
    tau = d * fs / c
    if np.any(tau > length - 1):
        raise ValueError(f"propagation delay {tau.max():.1f} samples exceeds the RIR length {length}")
    arg = np.arange(length) - tau[..., None]
    win = np.where(np.abs(arg) < half_width, 0.5 + 0.5 * np.cos(np.pi * arg / half_width), 0.0)
    return np.sinc(arg) * win / (4 * np.pi * d[..., None])


def unit_noise(shape, seed, stream):
    """White Gaussian sequences with one independent generator per response.

    ``shape`` is ``(n_points, n_loudspeakers, length)``; response ``(p, l)`` is
    drawn from ``SeedSequence(seed, spawn_key=(*stream, p, l))`` so results do
    not depend on evaluation order.
    """
    n_p, n_l, length = shape
    out = np.empty(shape)
    for p in range(n_p):
        for l in range(n_l):
            ss = np.random.SeedSequence(seed, spawn_key=(*stream, p, l))
            out[p, l] = np.random.default_rng(ss).standard_normal(length)
    return out


def scale_noise(clean, noise, snr_db, scaling="per_response"):
    """Scale ``noise`` so that clean-to-noise energy equals ``snr_db``.

    ``per_response`` matches the ratio for each (point, loudspeaker) pair,
    ``global`` only over the whole set.
    """
    if scaling not in NOISE_SCALINGS:
        raise ValueError(f"noise scaling must be one of {NOISE_SCALINGS}")
    ratio = 10 ** (snr_db / 10)
    if scaling == "per_response":
        gain = np.sqrt(np.sum(clean ** 2, -1) / ratio / np.sum(noise ** 2, -1))[..., None]
    else:
        gain = np.sqrt(np.sum(clean ** 2) / ratio / np.sum(noise ** 2))
    return noise * gain


def rir_transfer(rirs, L):
    """Frequency bins ``0..L/2`` of impulse responses, shape (L/2 + 1, n_points, n_ls)."""
    return np.moveaxis(np.fft.rfft(rirs, n=L, axis=-1), -1, 0)


@dataclass
class NoiseExperimentResult:
    """Broadband metrics of each method at one sensor SNR."""

    snr: float
    seed: int
    delta_l_db: dict = field(default_factory=dict)
    mse_bright_db: dict = field(default_factory=dict)
    mse_bright_normalized_db: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict, repr=False, compare=False)


def run_noise_experiment(scenario, snr_list, seed=0, methods=TABLE_METHODS,
                         scaling="per_response", workers=None):
    """Design filters from noisy impulse responses and evaluate them on the clean model.

    Parameters
    ----------
    scenario : Scenario
    snr_list : sequence of float
        Sensor SNRs in dB. ``inf`` designs from the analytic free-field model.
    seed : int
        Root seed. A given (point, loudspeaker) response gets the same unit
        noise sequence at every SNR.
    methods : sequence of str
    scaling : {"per_response", "global"}

    Returns
    -------
    list of NoiseExperimentResult
    """
    snr_list = list(snr_list)
    if not snr_list:
        raise ValueError("SNR list must not be empty")
    results = [NoiseExperimentResult(float(s), int(seed)) for s in snr_list]
    for method in methods:
        spec = scenario.methods[method]
        layouts = scenario.layouts(method)
        stream = (_STYLE_IDS.get(spec.style, 2), spec.group_count)
        clean = noise = None
        for res in results:
            if np.isinf(res.snr):
                transfer = None
            else:
                if clean is None:
                    clean = synthesize_rirs(stacked_points(layouts), scenario.loudspeakers,
                                            scenario.fs, scenario.rir_length, scenario.c)
                    noise = unit_noise(clean.shape, seed, stream)
                noisy = clean + scale_noise(clean, noise, res.snr, scaling)
                transfer = rir_transfer(noisy, scenario.filter_length)
            bank = solve_prefilter_bank(scenario, method, transfer=transfer, workers=workers)
            report = evaluate_bank(scenario, bank, method)
            bb = report.broadband()
            res.delta_l_db[method] = bb["delta_l_db"]
            res.mse_bright_db[method] = bb["mse_bright_db"]
            res.mse_bright_normalized_db[method] = bb["mse_bright_normalized_db"]
            res.reports[method] = report
    return results


NOISE_COLUMNS = ("snr_db", "seed", "method", "delta_l_db", "mse_bright_db",
                 "mse_bright_normalized_db")


def write_noise_csv(results, path):
    with open(path, "w", newline="") as fh:
        fh.write(NOISE_SCHEMA + "\n")
        writer = csv.writer(fh)
        writer.writerow(NOISE_COLUMNS)
        for res in results:
            for method in res.delta_l_db:
                writer.writerow([repr(res.snr), res.seed, method, repr(res.delta_l_db[method]),
                                 repr(res.mse_bright_db[method]),
                                 repr(res.mse_bright_normalized_db[method])])


# -- white noise gain ----------------------------------------------------------

def monte_carlo_wng(loudspeakers, w, point, omega, n_draws=4000, seed=0, c=SPEED_OF_SOUND):
    """White noise gain at ``point`` estimated from random transducer noise.

    Each loudspeaker adds circular complex Gaussian noise of unit variance
    through its own prefilter; the WNG is the reproduced signal power over the
    mean noise power at the point.
    """
    g = transfer_functions(np.atleast_2d(point), loudspeakers, omega, c)[0]
    rng = np.random.default_rng(seed)
    n = (rng.standard_normal((n_draws, len(w))) + 1j * rng.standard_normal((n_draws, len(w))))
    n /= np.sqrt(2)
    noise = n @ (g * w)
    return float(np.abs(g @ w) ** 2 / np.mean(np.abs(noise) ** 2))


@dataclass
class WngStudy:
    frequencies: np.ndarray
    wng_monte_carlo_db: np.ndarray
    wng_inverse_lwe_db: np.ndarray

    @property
    def deviation_db(self):
        return self.wng_monte_carlo_db - self.wng_inverse_lwe_db


def wng_lwe_study(radius=2.0, count=64, zone_radius=0.1, spacing=0.02, lwe_max=None,
                  fs=8000.0, L=256, f_range=(100.0, 2000.0), n_draws=4000, seed=0,
                  c=SPEED_OF_SOUND):
    """Compare the Monte Carlo white noise gain with ``1 / LWE`` on a circular array.

    A bright disk of radius ``zone_radius`` sits at the array center and is
    filled with pressure-matching control points on a square grid. The target
    is a point source on the array circle, placed halfway between two
    loudspeakers. The WNG is measured at the zone center, where all
    loudspeakers are equally far away, for the bins inside ``f_range``.
    """
    loudspeakers = build_circular_array(radius, count)
    lwe_max = 10 / count if lwe_max is None else lwe_max
    phi_y = np.deg2rad(-50.0) + np.pi / count
    y = radius * np.array([np.cos(phi_y), np.sin(phi_y), 0.0])
    ticks = np.arange(-zone_radius, zone_radius + spacing / 2, spacing)
    gx, gy = np.meshgrid(ticks, ticks)
    pts = np.c_[gx.ravel(), gy.ravel()]
    pts = pts[np.hypot(*pts.T) <= zone_radius + 1e-12]
    config = SolverConfig(kappa=1.0, lwe_max=lwe_max)
    freqs = bin_frequencies(fs, L)
    freqs = freqs[(freqs >= f_range[0]) & (freqs <= f_range[1])]
    mc, inv = np.zeros(len(freqs)), np.zeros(len(freqs))
    for i, f in enumerate(freqs):
        omega = 2 * np.pi * f
        G = transfer_functions(pts, loudspeakers, omega, c)
        h = greens_function_3d(y, _as3d(pts), omega, c)
        w = solve_single_freq(G, np.zeros((0, len(pts))), h, np.zeros(0), config)
        mc[i] = 10 * np.log10(monte_carlo_wng(loudspeakers, w, np.zeros(2), omega, n_draws,
                                              seed, c))
        inv[i] = -10 * np.log10(lwe(w))
    return WngStudy(freqs, mc, inv)


# -- time-domain wavefields ----------------------------------------------------

def hann_pulse(length):
    """Symmetric von Hann pulse with unit peak."""
    if length < 3:
        raise ValueError("pulse needs at least 3 samples")
    return windows.hann(length, sym=True)


def raster_grid(x_range, y_range, spacing):
    """Points of a rectangular raster in row-major order, and its (ny, nx) shape."""
    if spacing <= 0:
        raise ValueError("raster spacing must be positive")
    xs = np.arange(x_range[0], x_range[1] + spacing / 2, spacing)
    ys = np.arange(y_range[0], y_range[1] + spacing / 2, spacing)
    gx, gy = np.meshgrid(xs, ys)
    return np.c_[gx.ravel(), gy.ravel()], gx.shape


def snapshot_duration(filters, pulse, positions, loudspeakers, fs, c=SPEED_OF_SOUND,
                      half_width=32):
    """Number of samples after which every snapshot frame is silent."""
    d = np.linalg.norm(_as3d(positions)[:, None, :] - _as3d(loudspeakers)[None, :, :], axis=-1)
    n_drive = len(pulse) + filters.shape[1] - 1
    return int(np.ceil(n_drive + d.max() * fs / c + half_width))


def field_snapshot(filters, pulse, positions, t, loudspeakers, fs, c=SPEED_OF_SOUND,
                   normalize=True, half_width=32):
    """Time-domain pressure at ``positions`` and sample ``t``.

    Every loudspeaker plays the pulse convolved with its prefilter; the signal
    reaches each position after the free-field delay (band-limited sinc
    interpolation) with ``1 / (4 pi r)`` attenuation.

    Parameters
    ----------
    filters : ndarray of shape (n_ls, L) or PrefilterBank
    pulse : ndarray
        Excitation, at most ``L`` samples long.
    positions : ndarray of shape (n, 2)
    t : int
        Sample index, ``0 <= t < snapshot_duration(...)``.
    normalize : bool
        Scale the frame to unit peak magnitude (an all-zero frame stays zero).
    """
    if isinstance(filters, PrefilterBank):
        filters = filters.filters
    filters = np.asarray(filters, dtype=float)
    pulse = np.asarray(pulse, dtype=float)
    if filters.shape[0] != len(loudspeakers):
        raise ValueError("one filter per loudspeaker required")
    if len(pulse) > filters.shape[1]:
        raise ValueError("pulse must not be longer than the filters")
    duration = snapshot_duration(filters, pulse, positions, loudspeakers, fs, c, half_width)
    if not 0 <= t < duration:
        raise ValueError(f"sample {t} outside the simulated duration of {duration} samples")
    drive = np.array([np.convolve(pulse, h) for h in filters])
    d = np.linalg.norm(_as3d(positions)[:, None, :] - _as3d(loudspeakers)[None, :, :], axis=-1)
    lag = t - d * fs / c
    n0 = np.floor(lag).astype(int) - half_width + 1
    idx = n0[..., None] + np.arange(2 * half_width)
    arg = lag[..., None] - idx
    kernel = np.sinc(arg) * np.where(np.abs(arg) < half_width,
                                     0.5 + 0.5 * np.cos(np.pi * arg / half_width), 0.0)
    valid = (idx >= 0) & (idx < drive.shape[1])
    ls = np.arange(len(loudspeakers))[None, :, None]
    samples = np.where(valid, drive[ls, np.clip(idx, 0, drive.shape[1] - 1)], 0.0)
    frame = np.sum(np.sum(samples * kernel, -1) / (4 * np.pi * d), -1)
    if normalize:
        peak = np.max(np.abs(frame))
        if peak > 0:
            frame = frame / peak
    return frame


def steady_state_frame(loudspeakers, w, positions, omega, phase=0.0, c=SPEED_OF_SOUND,
                       normalize=True):
    """Instantaneous value ``Re{P(x) exp(i phase)}`` of a monochromatic field."""
    frame = np.real(render_pressure(loudspeakers, w, positions, omega, c) * np.exp(1j * phase))
    if normalize:
        peak = np.max(np.abs(frame))
        if peak > 0:
            frame = frame / peak
    return frame


def write_pgm(frame, path, limit=None):
    """Write a 2D array as an 8-bit binary PGM, mapping ``[-limit, limit]`` to ``[0, 255]``.

    Row 0 of ``frame`` (lowest ``y`` of a raster) becomes the bottom image row.
    """
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2:
        raise ValueError("PGM export needs a 2D frame")
    limit = np.max(np.abs(frame)) if limit is None else limit
    scaled = np.zeros_like(frame) if limit == 0 else np.clip(frame / limit, -1, 1)
    pixels = np.round((scaled + 1) * 127.5).astype(np.uint8)[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{frame.shape[1]} {frame.shape[0]}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"{path} is not a binary PGM")
    width, height = int(tokens[1]), int(tokens[2])
    # exactly one whitespace byte separates the header from the pixels
    pixels = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    return pixels.reshape(height, width)[::-1]


def write_raster_csv(frame, path):
    np.savetxt(path, np.asarray(frame, dtype=float), delimiter=",", fmt="%.17g")
