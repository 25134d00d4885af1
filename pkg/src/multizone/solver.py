"""Regularized joint pressure/velocity least-squares solver and FIR prefilter synthesis.

For every frequency the loudspeaker weights minimize::

    kappa ||G w - h_p||^2 + (1 - kappa) ||S (D G w - h_vel)||^2 + beta ||w||^2

where ``S`` is a diagonal weighting of the velocity rows (see
:class:`SolverConfig`). ``kappa = 1`` is plain pressure matching. The Tikhonov
parameter ``beta`` is grown geometrically until the loudspeaker weight energy
``||w||^2`` drops below ``lwe_max``.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as splin

from .geometry import AIR_DENSITY, SPEED_OF_SOUND
from .matrices import build_system

VELOCITY_WEIGHTINGS = ("pressure_difference", "impedance", "none")


class SolverError(RuntimeError):
    """Raised when the regularization schedule cannot meet the LWE bound."""

    def __init__(self, message, bin_index=None):
        super().__init__(message if bin_index is None else f"bin {bin_index}: {message}")
        self.bin_index = bin_index


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the per-frequency solve.

    Attributes
    ----------
    kappa : float
        Pressure weight in [0, 1]; the velocity rows get ``1 - kappa``.
    lwe_max : float
        Upper bound on ``||w||^2``.
    beta_initial, beta_max : float
        First and largest Tikhonov parameter, relative to ``mean(diag(A^H A))``.
    beta_growth : float
        Factor applied to ``beta`` per iteration, > 1.
    velocity_weighting : {"pressure_difference", "impedance", "none"}
        Unit convention of the velocity rows before they enter the cost.
        ``"pressure_difference"`` multiplies each finite-difference row by
        ``omega rho spacing``, i.e. the optimization sees pressure differences
        ``P_in - P_out`` (up to a constant phase). ``"impedance"`` multiplies by
        ``impedance`` (``rho c``), giving velocity in pressure units.
        ``"none"`` keeps SI velocity, which makes the velocity term negligible
        next to the pressure term.
    velocity_gain : float
        Extra scalar applied on top of the weighting.
    kappa_overrides : dict
        Per-bin replacement of ``kappa``, keyed by FFT bin index.
    """

    kappa: float = 0.04
    lwe_max: float = 1.0
    beta_initial: float = 1e-8
    beta_growth: float = 2.0
    beta_max: float = 1e8
    velocity_weighting: str = "pressure_difference"
    velocity_gain: float = 0.25
    impedance: float = AIR_DENSITY * SPEED_OF_SOUND
    kappa_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        kappas = [self.kappa, *self.kappa_overrides.values()]
        if any(not 0 <= k <= 1 for k in kappas):
            raise ValueError("kappa must lie in [0, 1]")
        if self.lwe_max <= 0:
            raise ValueError("lwe_max must be positive")
        if self.beta_growth <= 1:
            raise ValueError("beta_growth must exceed 1")
        if not 0 < self.beta_initial < self.beta_max:
            raise ValueError("need 0 < beta_initial < beta_max")
        if self.velocity_weighting not in VELOCITY_WEIGHTINGS:
            raise ValueError(f"velocity_weighting must be one of {VELOCITY_WEIGHTINGS}")

    def kappa_for_bin(self, k):
        return self.kappa_overrides.get(k, self.kappa)


def velocity_row_weights(D, config):
    """Diagonal weights applied to the velocity rows of the stacked system."""
    if config.velocity_weighting == "pressure_difference":
        # every row holds +-1/(omega rho spacing); its inverse recovers the spacing factor
        scale = 1 / np.max(np.abs(D), axis=1) if len(D) else np.zeros(0)
    elif config.velocity_weighting == "impedance":
        scale = np.full(len(D), config.impedance)
    else:
        scale = np.ones(len(D))
    return config.velocity_gain * scale


def stacked_system(G, D, h_p, h_vel, config, kappa=None):
    kappa = config.kappa if kappa is None else kappa
    if kappa == 1:
        # velocity rows carry zero weight; leaving them out keeps kappa = 1 bit-identical
        # to pressure matching
        D, h_vel = D[:0], h_vel[:0]
    s = velocity_row_weights(D, config)[:, None]
    A = np.concatenate([np.sqrt(kappa) * G, np.sqrt(1 - kappa) * s * (D @ G)])
    b = np.concatenate([np.sqrt(kappa) * h_p, np.sqrt(1 - kappa) * s[:, 0] * h_vel])
    return A, b


def solve_single_freq(G, D, h_p, h_vel, config, omega=None, kappa=None, full_output=False):
    """Regularized least-squares loudspeaker weights for one frequency.

    Parameters
    ----------
    G : ndarray of shape (n_points, n_ls)
    D : ndarray of shape (n_vel, n_points)
    h_p : ndarray of shape (n_points,)
    h_vel : ndarray of shape (n_vel,)
    config : SolverConfig
    omega : float, optional
        Only used in error messages.
    kappa : float, optional
        Overrides ``config.kappa``.
    full_output : bool
        Also return the selected ``beta``.

    Returns
    -------
    w : ndarray of shape (n_ls,)
    beta : float
        Only if ``full_output``.
    """
    A, b = stacked_system(G, D, h_p, h_vel, config, kappa)
    AhA = A.conj().T @ A
    Ahb = A.conj().T @ b
    scale = np.mean(np.real(np.diag(AhA)))
    if scale == 0:
        w = np.zeros(A.shape[1], dtype=complex)
        return (w, 0.0) if full_output else w
    lam, V = np.linalg.eigh(AhA)
    proj = np.abs(V.conj().T @ Ahb) ** 2
    beta = config.beta_initial * scale
    beta_ceiling = config.beta_max * scale
    while np.sum(proj / (lam + beta) ** 2) > config.lwe_max:
        beta *= config.beta_growth
        if beta > beta_ceiling:
            where = "" if omega is None else f" at omega={omega:.6g} rad/s"
            raise SolverError(f"LWE bound {config.lwe_max:.4g} not met up to beta={beta_ceiling:.4g}{where}")
    n = AhA.shape[0]
    w = splin.solve(AhA + beta * np.eye(n), Ahb, assume_a="pos")
    return (w, beta) if full_output else w


def lwe(w):
    """Loudspeaker weight energy ``||w||^2``."""
    w = np.asarray(w)
    if w.size == 0:
        raise ValueError("empty weight vector")
    return float(np.sum(np.abs(w) ** 2))


def wng_estimate(w):
    """White noise gain approximated by ``1 / LWE`` (linear scale)."""
    e = lwe(w)
    if e == 0:
        raise ValueError("white noise gain is undefined for all-zero weights")
    return 1 / e


def bin_frequencies(fs, L):
    """Frequencies (Hz) of bins ``0..L/2``."""
    return np.arange(L // 2 + 1) * fs / L


@dataclass
class PrefilterBank:
    """Per-bin loudspeaker weights and the causal FIR filters derived from them.

    ``weights[k]`` is the weight vector at ``f_k = k fs / L`` for
    ``k = 0..L/2``. DC is never solved. The FIR synthesis drops the DC and
    Nyquist bins (a real filter needs a real Nyquist coefficient), mirrors the
    spectrum and delays the result by ``L/2`` samples.
    """

    fs: float
    weights: np.ndarray
    betas: np.ndarray | None = None

    @property
    def L(self):
        return 2 * (self.weights.shape[0] - 1)

    @property
    def n_loudspeakers(self):
        return self.weights.shape[1]

    @property
    def frequencies(self):
        return bin_frequencies(self.fs, self.L)

    @property
    def filters(self):
        """Real FIR filters, shape (n_loudspeakers, L)."""
        spec = self.weights.copy()
        spec[0] = 0
        spec[-1] = 0
        h = np.fft.irfft(spec, n=self.L, axis=0)
        return np.roll(h, self.L // 2, axis=0).T

    def lwe(self):
        return np.sum(np.abs(self.weights) ** 2, axis=1)

    def to_csv(self, path):
        """Write ``fs,L,N_L`` followed by one row of ``L`` coefficients per loudspeaker."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fs", "L", "N_L"])
            writer.writerow([repr(float(self.fs)), self.L, self.n_loudspeakers])
            for row in self.filters:
                writer.writerow([repr(float(v)) for v in row])

    def to_npz(self, path):
        np.savez(path, fs=self.fs, weights=self.weights, filters=self.filters,
                 betas=np.array([]) if self.betas is None else self.betas)

    @classmethod
    def from_npz(cls, path):
        with np.load(path) as data:
            betas = data["betas"]
            return cls(float(data["fs"]), data["weights"], betas if betas.size else None)


def read_filters_csv(path):
    """Read a bank CSV back as ``(fs, filters)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["fs", "L", "N_L"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    fs, L, n_ls = float(rows[1][0]), int(rows[1][1]), int(rows[1][2])
    filters = np.array([[float(v) for v in r] for r in rows[2:]])
    if filters.shape != (n_ls, L):
        raise ValueError(f"{path}: expected {n_ls} rows of {L} coefficients, got {filters.shape}")
    return fs, filters


def solve_frequency(scenario, method, omega, G=None, kappa=None, layouts=None):
    """Weights of ``method`` at one angular frequency, with the selected ``beta``.

    ``G`` replaces the free-field transfer matrix of the control points.
    """
    spec = scenario.methods[method]
    config = scenario.solver_config(method)
    layouts = scenario.layouts(method) if layouts is None else layouts
    system = build_system(scenario.loudspeakers, layouts, scenario.source, omega,
                          spec.quantities, scenario.c, scenario.rho, G=G)
    return solve_single_freq(system.G, system.D, system.h_p, system.h_vel, config, omega,
                             kappa=config.kappa if kappa is None else kappa, full_output=True)


def solve_prefilter_bank(scenario, method="jpvm_plus", transfer=None, workers=None):
    """Design the prefilters of ``method`` for every bin of the scenario.

    Parameters
    ----------
    scenario : Scenario
    method : str
        Key of ``scenario.methods``.
    transfer : ndarray of shape (L/2 + 1, n_points, n_ls), optional
        Transfer functions used for the design instead of the free-field model.
    workers : int, optional
        Solve bins on a thread pool of this size.

    Returns
    -------
    PrefilterBank
    """
    config = scenario.solver_config(method)
    layouts = scenario.layouts(method)
    fs, L = scenario.fs, scenario.filter_length
    if L % 2 or L <= 0:
        raise ValueError("filter length must be a positive even number")
    if fs <= 0:
        raise ValueError("sampling frequency must be positive")
    freqs = bin_frequencies(fs, L)

    def solve_bin(k):
        G = None if transfer is None else transfer[k]
        try:
            return solve_frequency(scenario, method, 2 * np.pi * freqs[k], G=G,
                                   kappa=config.kappa_for_bin(k), layouts=layouts)
        except SolverError as err:
            raise SolverError(str(err), bin_index=k) from err

    bins = range(1, L // 2 + 1)
    if workers:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(solve_bin, bins))
    else:
        results = [solve_bin(k) for k in bins]
    n_ls = len(scenario.loudspeakers)
    weights = np.zeros((L // 2 + 1, n_ls), dtype=complex)
    betas = np.zeros(L // 2 + 1)
    for k, (w, beta) in zip(bins, results):
        weights[k] = w
        betas[k] = beta
    return PrefilterBank(float(fs), weights, betas)
