"""Loudspeaker arrays, listening zones, control-point layouts and target fields.

Positions are numpy arrays with coordinates in the last axis. Loudspeakers are
stored in 3D (``z = 0`` for planar setups). All other points are 2D and lie in
the ``z = 0`` plane.
"""

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_SOUND = 343.0
AIR_DENSITY = 1.2

BRIGHT = "bright"
DARK = "dark"


def _as3d(points):
    points = np.asarray(points, dtype=float)
    if points.shape[-1] == 3:
        return points
    if points.shape[-1] != 2:
        raise ValueError(f"expected 2D or 3D coordinates, got shape {points.shape}")
    return np.concatenate([points, np.zeros(points.shape[:-1] + (1,))], axis=-1)


@dataclass(frozen=True)
class Zone:
    center: np.ndarray
    r_in: float
    r_out: float
    kind: str = BRIGHT

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float)[:2])
        if not 0 < self.r_in < self.r_out:
            raise ValueError(f"zone radii must satisfy 0 < r_in < r_out, got {self.r_in}, {self.r_out}")
        if self.kind not in (BRIGHT, DARK):
            raise ValueError(f"zone kind must be 'bright' or 'dark', got {self.kind!r}")

    @property
    def radial_spacing(self):
        return self.r_out - self.r_in


def check_zones_disjoint(zones):
    for i, a in enumerate(zones):
        for b in zones[i + 1:]:
            if np.linalg.norm(a.center - b.center) <= a.r_out + b.r_out:
                raise ValueError("zones overlap: center distance must exceed the sum of outer radii")


@dataclass(frozen=True)
class ControlLayout:
    """Control points around one zone.

    ``points_outer[mu]``, ``points_inner[mu]`` (and ``points_outer_add[mu]`` for
    the L-shape) form group ``mu``. :attr:`points` stacks them in the row order
    used by the transfer matrix: all outer points, all inner points, then the
    added outer points.
    """

    zone: Zone
    style: str
    points_outer: np.ndarray
    points_inner: np.ndarray
    points_outer_add: np.ndarray | None
    delta_phi: float

    @property
    def group_count(self):
        return len(self.points_outer)

    @property
    def points(self):
        blocks = [self.points_outer, self.points_inner]
        if self.points_outer_add is not None:
            blocks.append(self.points_outer_add)
        return np.concatenate(blocks, axis=0)

    @property
    def n_points(self):
        return len(self.points)

    @property
    def radial_spacing(self):
        return float(np.linalg.norm(self.points_inner[0] - self.points_outer[0]))

    @property
    def tangential_spacing(self):
        # arc length; the chord differs by < 0.03 % for the spacings used here
        return self.zone.r_out * self.delta_phi


@dataclass(frozen=True)
class VirtualSource:
    """Target source for the bright zone.

    ``kind`` is ``"plane_wave"`` (``azimuth`` is the direction the wave comes
    from, the phase reference is ``reference``), ``"point_source"`` (``position``
    in meters) or ``"silence"``.
    """

    kind: str
    azimuth: float = 0.0
    position: np.ndarray | None = None
    amplitude: float = 1.0
    reference: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.kind not in ("plane_wave", "point_source", "silence"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "point_source" and self.position is None:
            raise ValueError("point source needs a position")
        object.__setattr__(self, "reference", np.asarray(self.reference, dtype=float)[:2])
        if self.position is not None:
            object.__setattr__(self, "position", _as3d(self.position))

    @property
    def propagation_direction(self):
        return -np.array([np.cos(self.azimuth), np.sin(self.azimuth)])


@dataclass(frozen=True)
class EvalGrid:
    points: np.ndarray
    spacing: float

    @property
    def n_points(self):
        return len(self.points)


def build_rectangular_array(width, height, count, center=(0.0, 0.0)):
    """Place ``count`` loudspeakers on a rectangle's perimeter by equal arc length.

    Placement starts at the lower-left corner and runs counter-clockwise, so
    the corners are hit whenever the arc step divides the side lengths.

    Returns
    -------
    ndarray of shape (count, 3)
    """
    if count < 4:
        raise ValueError("a rectangular array needs at least 4 loudspeakers")
    if width <= 0 or height <= 0:
        raise ValueError("array dimensions must be positive")
    cx, cy = np.asarray(center, dtype=float)[:2]
    corners = np.array([[-width / 2, -height / 2], [width / 2, -height / 2],
                        [width / 2, height / 2], [-width / 2, height / 2]])
    side = np.array([width, height, width, height])
    edges = np.concatenate([[0.0], np.cumsum(side)])
    s = np.arange(count) * edges[-1] / count
    seg = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, 3)
    t = (s - edges[seg]) / side[seg]
    xy = corners[seg] + t[:, None] * (corners[(seg + 1) % 4] - corners[seg])
    return _as3d(xy + [cx, cy])


def build_circular_array(radius, count, center=(0.0, 0.0), offset=0.0):
    phi = offset + 2 * np.pi * np.arange(count) / count
    xy = np.asarray(center, dtype=float)[:2] + radius * np.c_[np.cos(phi), np.sin(phi)]
    return _as3d(xy)


def _circle(center, radius, phi):
    return center + radius * np.c_[np.cos(phi), np.sin(phi)]


def build_control_layout(zone, style, group_count, offset=0.0):
    """Distribute control-point groups uniformly around a zone.

    Parameters
    ----------
    zone : Zone
    style : {"pairs", "l_shape"}
        ``pairs`` puts one point on each of the two concentric circles at a
        shared azimuth. ``l_shape`` adds a third point on the outer circle,
        rotated by ``delta_phi = (r_out - r_in) / r_out`` so that the
        tangential arc equals the radial gap.
    group_count : int
        Number of groups, at least 3.
    offset : float
        Azimuth of the first group in radians.
    """
    if group_count < 3:
        raise ValueError("a control layout needs at least 3 groups")
    phi = offset + 2 * np.pi * np.arange(group_count) / group_count
    outer = _circle(zone.center, zone.r_out, phi)
    inner = _circle(zone.center, zone.r_in, phi)
    if style == "pairs":
        return ControlLayout(zone, style, outer, inner, None, 2 * np.pi / group_count)
    if style == "l_shape":
        dphi = zone.radial_spacing / zone.r_out
        added = _circle(zone.center, zone.r_out, phi + dphi)
        return ControlLayout(zone, style, outer, inner, added, dphi)
    raise ValueError(f"unknown layout style {style!r}")


def build_eval_grid(zone, spacing, side_count):
    """Square ``side_count x side_count`` grid centered on the zone.

    Raises if any grid point falls outside the outer control radius.
    """
    if spacing <= 0:
        raise ValueError("grid spacing must be positive")
    half = (side_count - 1) / 2 * spacing
    if half * np.sqrt(2) > zone.r_out:
        raise ValueError(
            f"grid of half-width {half:.4g} m extends beyond the outer radius {zone.r_out} m")
    ticks = np.arange(side_count) * spacing - half
    gx, gy = np.meshgrid(ticks, ticks)
    return EvalGrid(zone.center + np.c_[gx.ravel(), gy.ravel()], float(spacing))


def mean_distance(loudspeakers, point):
    """Arithmetic mean distance from all loudspeakers to ``point``."""
    return float(np.mean(np.linalg.norm(_as3d(loudspeakers) - _as3d(point), axis=-1)))


def scaled_plane_wave(azimuth, loudspeakers, bright_center):
    """Plane wave with the magnitude of a point source at the mean loudspeaker distance."""
    r_bar = mean_distance(loudspeakers, bright_center)
    return VirtualSource("plane_wave", azimuth=azimuth, amplitude=1 / (4 * np.pi * r_bar),
                         reference=bright_center)


def greens_function_3d(y, x, omega, c=SPEED_OF_SOUND):
    """Free-field Green's function ``exp(-i k |y - x|) / (4 pi |y - x|)``.

    ``y`` and ``x`` broadcast against each other, e.g. ``y[None, :, :]`` and
    ``x[:, None, :]`` give a (points, sources) matrix.
    """
    d = np.linalg.norm(_as3d(y) - _as3d(x), axis=-1)
    if np.any(d == 0):
        raise ValueError("Green's function evaluated at a coincident source and field point")
    return np.exp(-1j * (omega / c) * d) / (4 * np.pi * d)


def transfer_functions(points, loudspeakers, omega, c=SPEED_OF_SOUND):
    """Matrix of Green's functions with rows = points and columns = loudspeakers."""
    return greens_function_3d(_as3d(loudspeakers)[None, :, :], _as3d(points)[:, None, :], omega, c)


def desired_field(source, x, omega, zone_kind=BRIGHT, c=SPEED_OF_SOUND):
    """Target transfer function at positions ``x`` (shape (..., 2)).

    Zero in the dark zone and for a silent source.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    if zone_kind == DARK or source.kind == "silence":
        return np.zeros(shape, dtype=complex)
    if source.kind == "plane_wave":
        k = omega / c
        proj = (x[..., :2] - source.reference) @ source.propagation_direction
        return source.amplitude * np.exp(-1j * k * proj)
    return source.amplitude * greens_function_3d(source.position, x, omega, c)
