"""Per-frequency transfer matrix, finite-difference velocity operator and targets.

Row order of ``G`` follows the layouts in the order given (bright zone first),
and within a layout the order of :attr:`ControlLayout.points`: outer circle,
inner circle, then the added outer points of an L-shape. Rows of ``D`` are
grouped by quantity (radial, then tangential) and, inside a quantity, by
layout.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import AIR_DENSITY, BRIGHT, SPEED_OF_SOUND, desired_field, transfer_functions

RADIAL = "radial"
TANGENTIAL = "tangential"
QUANTITIES = (RADIAL, TANGENTIAL)


@dataclass
class TransferMatrixSet:
    omega: float
    G: np.ndarray
    D: np.ndarray
    h_p: np.ndarray
    h_vel: np.ndarray
    quantities: tuple

    @property
    def n_loudspeakers(self):
        return self.G.shape[1]


def _normalize_quantities(quantities):
    quantities = tuple(quantities)
    for q in quantities:
        if q not in QUANTITIES:
            raise ValueError(f"unknown velocity quantity {q!r}")
    # fixed order independent of how the caller listed them
    return tuple(q for q in QUANTITIES if q in quantities)


def stacked_points(layouts):
    return np.concatenate([layout.points for layout in layouts], axis=0)


def assemble_transfer_matrix(loudspeakers, layouts, omega, c=SPEED_OF_SOUND):
    """Green's functions from every loudspeaker to every control point.

    Returns
    -------
    G : ndarray of shape (n_control_points, n_loudspeakers)
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    return transfer_functions(stacked_points(layouts), loudspeakers, omega, c)


def build_difference_matrix(layouts, quantities, omega, rho=AIR_DENSITY):
    """Finite-difference operator mapping control-point pressures to velocity components.

    Radial rows compute ``-(P_in - P_out) / (i omega rho dR)`` and tangential
    rows ``-(P_out_add - P_out) / (i omega rho R_out dphi)``, both attributed to
    the outer point of the group.

    Returns
    -------
    D : ndarray of shape (n_velocity_rows, n_control_points)
    """
    quantities = _normalize_quantities(quantities)
    n_cols = sum(layout.n_points for layout in layouts)
    if not quantities:
        return np.zeros((0, n_cols), dtype=complex)
    if omega <= 0:
        raise ValueError("omega must be positive")
    rows = []
    for q in quantities:
        offset = 0
        for layout in layouts:
            M = layout.group_count
            block = np.zeros((M, n_cols), dtype=complex)
            mu = np.arange(M)
            if q == RADIAL:
                fac = -1 / (1j * omega * rho * layout.radial_spacing)
                block[mu, offset + M + mu] = fac
            else:
                if layout.points_outer_add is None:
                    raise ValueError("tangential differences need an L-shaped layout")
                fac = -1 / (1j * omega * rho * layout.tangential_spacing)
                block[mu, offset + 2 * M + mu] = fac
            block[mu, offset + mu] = -fac
            rows.append(block)
            offset += layout.n_points
    return np.concatenate(rows, axis=0)


def desired_vectors(source, layouts, omega, quantities=(RADIAL,), c=SPEED_OF_SOUND, rho=AIR_DENSITY):
    """Desired pressures at the control points and their finite-difference velocities.

    The velocity target uses the same operator as the reproduced field, so the
    optimization compares like with like.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    h_p = np.concatenate([desired_field(source, layout.points, omega, layout.zone.kind, c)
                          for layout in layouts])
    D = build_difference_matrix(layouts, quantities, omega, rho)
    return h_p, D @ h_p


def build_system(loudspeakers, layouts, source, omega, quantities=(RADIAL,),
                 c=SPEED_OF_SOUND, rho=AIR_DENSITY, G=None):
    """Assemble everything the solver needs for one frequency.

    ``G`` may be supplied to replace the free-field model, e.g. by transfer
    functions estimated from noisy impulse responses.
    """
    quantities = _normalize_quantities(quantities)
    if layouts[0].zone.kind != BRIGHT:
        raise ValueError("the first layout must belong to the bright zone")
    if G is None:
        G = assemble_transfer_matrix(loudspeakers, layouts, omega, c)
    D = build_difference_matrix(layouts, quantities, omega, rho)
    h_p = np.concatenate([desired_field(source, layout.points, omega, layout.zone.kind, c)
                          for layout in layouts])
    return TransferMatrixSet(omega, G, D, h_p, D @ h_p, quantities)
