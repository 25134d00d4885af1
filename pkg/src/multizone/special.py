"""Special functions for the spherical-harmonic description of in-plane sound fields.

All functions broadcast over array arguments and return numpy scalars/arrays.
The associated Legendre functions follow the Condon-Shortley phase convention
(the convention of :func:`scipy.special.lpmv`). Every product used by the modal
analysis has the form ``P_n^|m|(0) * P_n^|m|(0)``, so the phase cancels there.
"""

import numpy as np
from scipy import special as sps


def spherical_bessel_j(n, x):
    """Spherical Bessel function of the first kind, ``j_n(x)``, for real ``x >= 0``."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("order n must be non-negative")
    x = np.asarray(x, dtype=float)
    out = sps.spherical_jn(n, x)
    # scipy returns nan for subnormal arguments; the series x^n / (2n+1)!! gives 1 or 0 there
    tiny = np.abs(x) < 1e-200
    if np.any(tiny):
        out = np.where(tiny, np.where(n == 0, 1.0, 0.0), out)
    return out


def spherical_bessel_y(n, x):
    """Spherical Bessel function of the second kind, ``y_n(x)``, for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("y_n is singular at x = 0")
    return sps.spherical_yn(n, x)


def spherical_hankel2(n, x):
    """Spherical Hankel function of the second kind, ``h_n^(2)(x) = j_n(x) - i y_n(x)``.

    This is the outgoing radial solution for the ``exp(+i omega t)`` time convention.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("spherical Hankel function is singular at x = 0")
    return sps.spherical_jn(n, x) - 1j * sps.spherical_yn(n, x)


def spherical_bessel_j_derivative(n, x):
    return sps.spherical_jn(n, x, derivative=True)


def spherical_bessel_y_derivative(n, x):
    return sps.spherical_yn(n, x, derivative=True)


def assoc_legendre(n, m, x):
    """Associated Legendre function ``P_n^m(x)`` with Condon-Shortley phase.

    Parameters
    ----------
    n : int
        Order, ``n >= 0``.
    m : int
        Degree, ``0 <= m <= n``.
    x : float or ndarray
        Argument in ``[-1, 1]``.
    """
    n_arr, m_arr = np.asarray(n), np.asarray(m)
    if np.any(m_arr < 0) or np.any(m_arr > n_arr):
        raise ValueError(f"degree must satisfy 0 <= m <= n, got n={n}, m={m}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ValueError("argument must lie in [-1, 1]")
    return sps.lpmv(m_arr, n_arr, x)


def sh_norm(m, n):
    """Spherical-harmonic normalization ``sqrt((2n+1)/(4 pi) (n-|m|)!/(n+|m|)!)``.

    Evaluated through log-gamma so large orders neither overflow nor underflow
    before the square root.
    """
    m_abs = np.abs(np.asarray(m))
    n = np.asarray(n)
    if np.any(m_abs > n):
        raise ValueError(f"|m| must not exceed n, got n={n}, m={m}")
    log_ratio = sps.gammaln(n - m_abs + 1) - sps.gammaln(n + m_abs + 1)
    return np.sqrt((2 * n + 1) / (4 * np.pi) * np.exp(log_ratio))


def normalized_legendre_equator(m, n):
    """Return ``sh_norm(m, n) * P_n^|m|(0)`` without forming either factor.

    ``P_n^|m|(0)`` overflows double precision for ``n`` beyond ~150 while the
    normalization underflows, so the in-plane factor is assembled in log space
    from ``P_n^m(0) = (-1)^((n+m)/2) (n+m-1)!! / (n-m)!!`` (zero for odd ``n+m``).
    """
    m_abs = np.abs(np.asarray(m))
    n = np.asarray(n)
    if np.any(m_abs > n):
        raise ValueError(f"|m| must not exceed n, got n={n}, m={m}")
    m_b, n_b = np.broadcast_arrays(m_abs, n)
    out = np.zeros(m_b.shape)
    even = (n_b + m_b) % 2 == 0
    ne, me = n_b[even], m_b[even]
    # (n+m-1)!! / (n-m)!! for even n+m, via (2p)!! = 2^p p! and (2p-1)!! = (2p)!/(2^p p!)
    p_plus = (ne + me) // 2
    p_minus = (ne - me) // 2
    log_dfact_num = sps.gammaln(2 * p_plus + 1) - p_plus * np.log(2) - sps.gammaln(p_plus + 1)
    log_dfact_den = p_minus * np.log(2) + sps.gammaln(p_minus + 1)
    log_norm = 0.5 * (np.log((2 * ne + 1) / (4 * np.pi))
                      + sps.gammaln(ne - me + 1) - sps.gammaln(ne + me + 1))
    sign = np.where(p_plus % 2 == 0, 1.0, -1.0)
    out[even] = sign * np.exp(log_norm + log_dfact_num - log_dfact_den)
    return out[()] if out.ndim == 0 else out


def cylindrical_bessel_j(n, x):
    """Cylindrical Bessel function of the first kind ``J_n(x)``."""
    return sps.jv(n, x)
