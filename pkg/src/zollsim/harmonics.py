"""Orthonormal complex spherical harmonics with the Condon-Shortley phase.

    Y_lm(theta, phi) = P_lm(cos theta) exp(i m phi),   int |Y_lm|^2 dOmega = 1

Coefficients are stored flat with ``index(l, m) = l*l + l + m``.
"""
import numpy as np


def index(l, m):
    return l * l + l + m


def basis_size(lmax):
    return (lmax + 1) ** 2


def degrees_orders(lmax):
    ls = np.repeat(np.arange(lmax + 1), 2 * np.arange(lmax + 1) + 1)
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(lmax + 1)])
    return ls, ms


def legendre_table(lmax, x):
    """Normalized associated Legendre values, shape (len(x), (lmax+1)^2).

    Column index(l, m) holds P_lm(x) for -l <= m <= l, using
    P_{l,-m} = (-1)^m P_lm.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = np.zeros((x.size, basis_size(lmax)))
    pmm = np.full(x.size, 1.0 / np.sqrt(4 * np.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = -np.sqrt((2 * m + 1) / (2.0 * m)) * u * pmm
        out[:, index(m, m)] = pmm
        if m == lmax:
            break
        p_prev, p_cur = pmm, np.sqrt(2 * m + 3.0) * x * pmm
        out[:, index(m + 1, m)] = p_cur
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
            p_prev, p_cur = p_cur, a * (x * p_cur - b * p_prev)
            out[:, index(l, m)] = p_cur
    for m in range(1, lmax + 1):
        sign = -1.0 if m % 2 else 1.0
        for l in range(m, lmax + 1):
            out[:, index(l, -m)] = sign * out[:, index(l, m)]
    return out


def ylm(lmax, theta, phi):
    """Y_lm at points, shape (npts, (lmax+1)^2)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).ravel()
    _, ms = degrees_orders(lmax)
    return legendre_table(lmax, np.cos(theta)) * np.exp(1j * np.outer(phi, ms))


def ylm_ambient(lmax, xyz):
    xyz = np.atleast_2d(np.asarray(xyz, dtype=float))
    r = np.linalg.norm(xyz, axis=-1)
    theta = np.arccos(np.clip(xyz[:, 2] / r, -1, 1))
    phi = np.arctan2(xyz[:, 1], xyz[:, 0])
    return ylm(lmax, theta, phi)


def legendre_p(l, x):
    """Unnormalized Legendre polynomial P_l(x) (l may be -1, giving 1)."""
    if l < 0:
        return np.ones_like(np.asarray(x, dtype=float))
    return np.polynomial.legendre.legval(x, [0] * l + [1])
