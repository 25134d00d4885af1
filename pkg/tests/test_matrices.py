import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multizone.geometry import (AIR_DENSITY, BRIGHT, DARK, VirtualSource, Zone, desired_field,
                                build_circular_array, build_control_layout,
                                build_rectangular_array, greens_function_3d)
from multizone.matrices import (RADIAL, TANGENTIAL, assemble_transfer_matrix,
                                build_difference_matrix, build_system, desired_vectors)

BRIGHT_ZONE = Zone((0, 0.5), 0.275, 0.3, BRIGHT)
DARK_ZONE = Zone((0, -0.5), 0.275, 0.3, DARK)
LS = build_rectangular_array(3.95, 3.0, 70)


def layouts(style, groups):
    return [build_control_layout(z, style, groups) for z in (BRIGHT_ZONE, DARK_ZONE)]


@pytest.mark.parametrize("style,groups,quantities,n_vel", [
    ("pairs", 24, (), 0),
    ("pairs", 24, (RADIAL,), 48),
    ("l_shape", 16, (RADIAL, TANGENTIAL), 64),
    ("l_shape", 16, (TANGENTIAL,), 32),
])
def test_system_shapes(style, groups, quantities, n_vel):
    src = VirtualSource("plane_wave", azimuth=-0.8, reference=(0, 0.5))
    sys_ = build_system(LS, layouts(style, groups), src, 2 * np.pi * 500, quantities)
    assert sys_.G.shape == (96, 70)
    assert sys_.D.shape == (n_vel, 96)
    assert sys_.h_vel.shape == (n_vel,)
    np.testing.assert_array_equal(sys_.h_p[48:], 0)


def test_transfer_matrix_row_order():
    lay = layouts("l_shape", 16)
    G = assemble_transfer_matrix(LS, lay, 100.0)
    # row 16 is the first inner point, row 32 the first added point, row 48 the dark zone
    assert G[16, 3] == greens_function_3d(LS[3], lay[0].points_inner[0], 100.0)
    assert G[32, 3] == greens_function_3d(LS[3], lay[0].points_outer_add[0], 100.0)
    assert G[48, 3] == greens_function_3d(LS[3], lay[1].points_outer[0], 100.0)


def test_difference_matrix_entries():
    omega = 2 * np.pi * 300
    D = build_difference_matrix(layouts("pairs", 24), (RADIAL,), omega)
    fac = -1 / (1j * omega * AIR_DENSITY * 0.025)
    assert D[0, 24] == pytest.approx(fac)
    assert D[0, 0] == pytest.approx(-fac)
    assert D[24, 48 + 24] == pytest.approx(fac)
    assert np.count_nonzero(D) == 2 * 48


def test_quantity_order_is_fixed():
    omega = 1000.0
    lay = layouts("l_shape", 16)
    a = build_difference_matrix(lay, (TANGENTIAL, RADIAL), omega)
    b = build_difference_matrix(lay, (RADIAL, TANGENTIAL), omega)
    np.testing.assert_array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(c=st.complex_numbers(max_magnitude=1e3), f=st.floats(20, 4000))
def test_difference_of_constant_field_vanishes(c, f):
    D = build_difference_matrix(layouts("l_shape", 16), (RADIAL, TANGENTIAL), 2 * np.pi * f)
    np.testing.assert_allclose(D @ np.full(96, c), 0, atol=1e-12 * (1 + abs(c)))


def test_tangential_needs_l_shape():
    with pytest.raises(ValueError):
        build_difference_matrix(layouts("pairs", 24), (TANGENTIAL,), 10.0)


def test_unknown_quantity_rejected():
    with pytest.raises(ValueError):
        build_difference_matrix(layouts("pairs", 24), ("axial",), 10.0)


def test_pressure_only_has_empty_operator():
    D = build_difference_matrix(layouts("pairs", 24), (), 10.0)
    assert D.shape == (0, 96)


def test_radial_row_approximates_euler_velocity_along_pair():
    """Pair difference ~ velocity component along x_in - x_out at the pair midpoint."""
    src = np.array([2.0, 1.5, 0.0])
    omega = 2 * np.pi * 400
    k = omega / 343
    lay = [build_control_layout(BRIGHT_ZONE, "pairs", 8)]
    D = build_difference_matrix(lay, (RADIAL,), omega)
    p = greens_function_3d(src, lay[0].points, omega)
    v_fd = D @ p
    mid = (lay[0].points_inner + lay[0].points_outer) / 2
    e = (lay[0].points_inner - lay[0].points_outer) / 0.025
    r_vec = np.c_[mid, np.zeros(8)] - src
    r = np.linalg.norm(r_vec, axis=1)
    grad = (greens_function_3d(src, mid, omega) * (-1j * k - 1 / r))[:, None] * r_vec / r[:, None]
    v_exact = -np.sum(grad[:, :2] * e, axis=1) / (1j * omega * AIR_DENSITY)
    # central-difference error is about (k dR)^2 / 24, 1.4e-3 here
    np.testing.assert_allclose(v_fd, v_exact, rtol=5e-3)


def test_desired_vectors_match_build_system():
    src = VirtualSource("plane_wave", azimuth=-0.8, reference=(0, 0.5))
    lay = layouts("pairs", 24)
    h_p, h_v = desired_vectors(src, lay, 700.0, (RADIAL,))
    sys_ = build_system(LS, lay, src, 700.0, (RADIAL,))
    np.testing.assert_array_equal(h_p, sys_.h_p)
    np.testing.assert_array_equal(h_v, sys_.h_vel)


def test_build_system_requires_bright_first():
    src = VirtualSource("silence")
    lay = layouts("pairs", 24)[::-1]
    with pytest.raises(ValueError):
        build_system(LS, lay, src, 100.0)


def test_explicit_transfer_matrix_is_used():
    lay = layouts("pairs", 24)
    G = np.ones((96, 70), dtype=complex)
    sys_ = build_system(LS, lay, VirtualSource("silence"), 100.0, G=G)
    assert sys_.G is G


def test_nonpositive_frequency_rejected():
    with pytest.raises(ValueError):
        assemble_transfer_matrix(build_circular_array(2, 8), layouts("pairs", 24), 0.0)


def test_single_loudspeaker_transfer_is_a_column_of_greens_values():
    ls = np.array([[1.5, 0.2, 0.0]])
    lay = layouts("pairs", 3)
    G = assemble_transfer_matrix(ls, lay, 700.0)
    assert G.shape == (12, 1)
    pts = np.concatenate([lay[0].points, lay[1].points])
    np.testing.assert_array_equal(G[:, 0], greens_function_3d(ls[0], pts, 700.0))


def test_swapping_loudspeakers_swaps_columns():
    lay = layouts("l_shape", 16)
    G = assemble_transfer_matrix(LS, lay, 900.0)
    perm = np.arange(70)
    perm[[4, 41]] = perm[[41, 4]]
    np.testing.assert_array_equal(assemble_transfer_matrix(LS[perm], lay, 900.0), G[:, perm])


def test_pairs_radial_block_structure():
    omega = 2 * np.pi * 250
    D = build_difference_matrix(layouts("pairs", 24), (RADIAL,), omega)
    eye, zero = np.eye(24), np.zeros((24, 24))
    block = np.block([[-eye, eye, zero, zero], [zero, zero, -eye, eye]])
    np.testing.assert_allclose(D, -1 / (1j * omega * AIR_DENSITY * 0.025) * block, rtol=1e-14)


def test_velocity_of_single_loudspeaker_equals_direct_difference():
    omega = 2 * np.pi * 1100
    lay = layouts("l_shape", 16)
    ls = LS[9:10]
    sys_ = build_system(ls, lay, VirtualSource("silence"), omega, (RADIAL, TANGENTIAL))
    v = sys_.D @ sys_.G[:, 0]
    p = lambda pts: greens_function_3d(ls[0], pts, omega)
    fac = -1 / (1j * omega * AIR_DENSITY)
    z = lay[0]
    np.testing.assert_allclose(v[:16], fac * (p(z.points_inner) - p(z.points_outer)) / 0.025,
                               rtol=1e-13)
    # denominator: the arc length R_out dphi between the outer and the added point
    tan = fac * (p(z.points_outer_add) - p(z.points_outer)) / 0.025
    np.testing.assert_allclose(v[32:48], tan, rtol=1e-13)


def test_silence_gives_zero_targets():
    h_p, h_v = desired_vectors(VirtualSource("silence"), layouts("l_shape", 16), 500.0,
                               (RADIAL, TANGENTIAL))
    assert not np.any(h_p) and not np.any(h_v)


def test_point_target_at_a_loudspeaker_reproduces_its_column():
    lay = layouts("pairs", 24)
    src = VirtualSource("point_source", position=LS[20, :2])
    h_p, _ = desired_vectors(src, lay, 800.0, ())
    G = assemble_transfer_matrix(LS, lay, 800.0)
    np.testing.assert_array_equal(h_p[:48], G[:48, 20])
    assert not np.any(h_p[48:])


def test_plane_wave_velocity_target_matches_impedance_relation():
    f = 60.0
    omega = 2 * np.pi * f
    src = VirtualSource("plane_wave", azimuth=0.4, reference=(0, 0.5))
    lay = [layouts("pairs", 24)[0]]
    _, h_v = desired_vectors(src, lay, omega, (RADIAL,))
    # the wave comes from the azimuth, so it travels along -(cos, sin)
    k_hat = -np.array([np.cos(0.4), np.sin(0.4)])
    e = (lay[0].points_inner - lay[0].points_outer) / 0.025
    p_mid = desired_field(src, (lay[0].points_inner + lay[0].points_outer) / 2, omega)
    expected = p_mid * (e @ k_hat) / (AIR_DENSITY * 343.0)
    k_dr = omega / 343 * 0.025
    np.testing.assert_allclose(h_v, expected, atol=k_dr ** 2 * np.max(np.abs(expected)))


def test_difference_operator_is_invariant_under_point_permutation():
    omega = 2 * np.pi * 640
    lay = layouts("pairs", 24)
    G = assemble_transfer_matrix(LS, lay, omega)
    D = build_difference_matrix(lay, (RADIAL,), omega)
    perm = np.random.default_rng(5).permutation(96)
    ref = D @ G
    # only the summation order changes, so entries agree up to rounding
    np.testing.assert_allclose(D[:, perm] @ G[perm], ref, rtol=0,
                               atol=1e-13 * np.max(np.abs(D)) * np.max(np.abs(G)))
