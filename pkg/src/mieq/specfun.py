"""Special functions for sphere scattering on real and complex arguments.

Spherical Bessel functions use the ratio form of the downward recurrence,
seeded by a continued fraction evaluated with the modified Lentz method, and
normalized by a closed-form low-order value.  Spherical Hankel functions of
the first kind use the upward recurrence.  Legendre polynomials and their
first two derivatives come from three-term recurrences that stay exact at
the endpoints.  Scalar and vector spherical harmonics follow the
Condon-Shortley phase convention.

All functions are pure; nothing is cached between calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TINY = 1e-300
_CF_EPS = 1e-17
_CF_MAXITER = 200_000
# exp(|Im z|) beyond this overflows double precision
_IMAG_LIMIT = 700.0


def _check_arg(z: complex) -> complex:
    z = complex(z)
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise ValueError(f"non-finite argument {z}")
    if abs(z.imag) > _IMAG_LIMIT:
        raise OverflowError(
            f"|Im z| = {abs(z.imag):.3g} exceeds the representable range"
        )
    return z


def _ratio_cf(n: int, z: complex) -> complex:
    """Continued fraction for j_n(z) / j_{n-1}(z), modified Lentz."""
    # r_n = 1 / (b_n - 1 / (b_{n+1} - ...)),  b_k = (2k + 1) / z
    f = (2 * n + 1) / z
    if f == 0:
        f = _TINY
    c = f
    d = 0.0
    for k in range(n + 1, n + 1 + _CF_MAXITER):
        b = (2 * k + 1) / z
        d = b - d
        if d == 0:
            d = _TINY
        c = b - 1.0 / c
        if c == 0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return 1.0 / f
    raise RuntimeError(f"continued fraction for j_{n}({z}) did not converge")


def spherical_bessel_j(n_max: int, z: complex) -> np.ndarray:
    """Spherical Bessel functions ``j_0(z) .. j_{n_max}(z)``.

    Parameters
    ----------
    n_max : int
        Highest order, ``n_max >= 0``.
    z : complex
        Argument.  ``z = 0`` is handled analytically.

    Returns
    -------
    ndarray of complex, shape ``(n_max + 1,)``

    Raises
    ------
    OverflowError
        If ``|Im z|`` is too large for double precision.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    z = _check_arg(z)
    out = np.zeros(n_max + 1, dtype=complex)
    if z == 0:
        out[0] = 1.0
        return out
    j0 = np.sin(z) / z
    if n_max == 0:
        out[0] = j0
        return out

    # ratios r_n = j_n / j_{n-1}, stable in the downward direction
    ratio = np.zeros(n_max + 1, dtype=complex)
    ratio[n_max] = _ratio_cf(n_max, z)
    for n in range(n_max - 1, 0, -1):
        denom = (2 * n + 1) / z - ratio[n + 1]
        if denom == 0:
            denom = _TINY
        ratio[n] = 1.0 / denom

    j1_closed = (np.sin(z) / z - np.cos(z)) / z
    # j_0 has zeros at z = k*pi; seed from j_1 there instead
    if abs(z) < 1.0 or abs(j0) >= 0.25 * abs(j1_closed):
        out[0] = j0
        start = 1
    else:
        out[0] = j0
        out[1] = j1_closed
        start = 2
    for n in range(start, n_max + 1):
        out[n] = ratio[n] * out[n - 1]
    return out


def spherical_hankel_h1(n_max: int, z: complex) -> np.ndarray:
    """Spherical Hankel functions of the first kind ``h_0 .. h_{n_max}``.

    Uses the upward recurrence, which is stable for real arguments and for
    complex arguments with moderate imaginary part.

    Raises
    ------
    ZeroDivisionError
        At ``z = 0`` where the functions are singular.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    z = _check_arg(z)
    if z == 0:
        raise ZeroDivisionError("spherical Hankel function is singular at z = 0")
    out = np.zeros(n_max + 1, dtype=complex)
    e = np.exp(1j * z)
    out[0] = -1j * e / z
    if n_max >= 1:
        out[1] = -e * (z + 1j) / (z * z)
    for n in range(1, n_max):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def derivative_from_sequence(f: np.ndarray, z: complex) -> np.ndarray:
    """d/dz of a spherical Bessel-type sequence, ``f_n' = f_{n-1} - (n+1) f_n / z``.

    ``f_0' = -f_1`` needs ``f`` to hold at least two orders; the last order
    of the result is computed from ``f_{n-1}`` as well, so every entry is
    valid.
    """
    n = np.arange(f.size)
    d = np.empty_like(f)
    d[1:] = f[:-1] - (n[1:] + 1) * f[1:] / z
    d[0] = -f[1] if f.size > 1 else np.nan
    return d


def riccati_bessel_psi(n_max: int, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """``psi_n(z) = z j_n(z)`` and its derivative for ``n = 0 .. n_max``."""
    j = spherical_bessel_j(n_max + 1, z)
    psi = z * j[: n_max + 1]
    dpsi = np.empty(n_max + 1, dtype=complex)
    dpsi[0] = np.cos(z)
    n = np.arange(1, n_max + 1)
    dpsi[1:] = z * j[:n_max] - n * j[1 : n_max + 1]
    return psi, dpsi


def riccati_bessel_xi(n_max: int, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """``xi_n(z) = z h_n^(1)(z)`` and its derivative for ``n = 0 .. n_max``."""
    h = spherical_hankel_h1(n_max + 1, z)
    xi = z * h[: n_max + 1]
    dxi = np.empty(n_max + 1, dtype=complex)
    dxi[0] = np.exp(1j * z)
    n = np.arange(1, n_max + 1)
    dxi[1:] = z * h[:n_max] - n * h[1 : n_max + 1]
    return xi, dxi


def log_derivative_psi(n_max: int, z: complex, extra: int = 15) -> np.ndarray:
    """Logarithmic derivative ``D_n(z) = psi_n'(z) / psi_n(z)`` by downward recurrence."""
    z = _check_arg(z)
    start = int(max(n_max, round(abs(z)))) + extra
    d = np.zeros(start + 1, dtype=complex)
    for n in range(start, 0, -1):
        d[n - 1] = n / z - 1.0 / (d[n] + n / z)
    return d[: n_max + 1]


@dataclass(frozen=True)
class LegendreRow:
    """``P_n``, ``P_n'`` and ``P_n''`` at one argument."""

    n: int
    P: float
    dP: float
    ddP: float


def legendre_arrays(n_max: int, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``P_n(xi)``, ``P_n'(xi)``, ``P_n''(xi)`` for ``n = 0 .. n_max``.

    Returns three arrays of shape ``(n_max + 1,) + shape(xi)``.
    """
    xi = np.clip(np.asarray(xi, dtype=float), -1.0, 1.0)
    shape = (n_max + 1,) + xi.shape
    p = np.zeros(shape)
    dp = np.zeros(shape)
    ddp = np.zeros(shape)
    p[0] = 1.0
    if n_max >= 1:
        p[1] = xi
        dp[1] = 1.0
    for n in range(1, n_max):
        p[n + 1] = ((2 * n + 1) * xi * p[n] - n * p[n - 1]) / (n + 1)
        # differentiated forms of P'_{n+1} = xi P'_n + (n+1) P_n, valid at xi = +-1
        dp[n + 1] = xi * dp[n] + (n + 1) * p[n]
        ddp[n + 1] = xi * ddp[n] + (n + 2) * dp[n]
    return p, dp, ddp


def legendre_row(n_max: int, xi: float) -> list[LegendreRow]:
    """Legendre values and derivatives at a scalar ``xi`` in ``[-1, 1]``."""
    if not -1.0 <= xi <= 1.0:
        raise ValueError(f"xi = {xi} outside [-1, 1]")
    p, dp, ddp = legendre_arrays(n_max, xi)
    return [LegendreRow(n, float(p[n]), float(dp[n]), float(ddp[n])) for n in range(n_max + 1)]


def _direction_angles(dirs: np.ndarray):
    dirs = np.asarray(dirs, dtype=float)
    ct = np.clip(dirs[..., 2], -1.0, 1.0)
    rho = np.hypot(dirs[..., 0], dirs[..., 1])
    st = rho
    safe = rho > 0
    eiphi = np.where(safe, (dirs[..., 0] + 1j * dirs[..., 1]) / np.where(safe, rho, 1.0), 1.0)
    return ct, st, eiphi


def scalar_harmonics(n_max: int, dirs) -> np.ndarray:
    """Orthonormal spherical harmonics ``Y_nm`` at unit vectors ``dirs``.

    Returns an array of shape ``dirs.shape[:-1] + (n_max + 1, 2 n_max + 1)``
    indexed ``[..., n, m + n_max]``; entries with ``|m| > n`` are zero.
    Condon-Shortley phase is included.
    """
    ct, st, eiphi = _direction_angles(dirs)
    base = ct.shape
    L = n_max
    pbar = np.zeros(base + (L + 1, L + 1))  # [n, m], normalized on [-1, 1]
    pbar[..., 0, 0] = np.sqrt(0.5)
    for m in range(1, L + 1):
        pbar[..., m, m] = np.sqrt((2 * m + 1) / (2 * m)) * st * pbar[..., m - 1, m - 1]
    for m in range(0, L):
        pbar[..., m + 1, m] = np.sqrt(2 * m + 3) * ct * pbar[..., m, m]
    for m in range(0, L + 1):
        for n in range(m + 2, L + 1):
            a = np.sqrt((4 * n * n - 1) / (n * n - m * m))
            b = np.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
            pbar[..., n, m] = a * (ct * pbar[..., n - 1, m] - b * pbar[..., n - 2, m])

    y = np.zeros(base + (L + 1, 2 * L + 1), dtype=complex)
    phase = np.ones(base, dtype=complex)
    inv = 1.0 / np.sqrt(2 * np.pi)
    for m in range(0, L + 1):
        sign = -1.0 if m % 2 else 1.0
        vals = sign * pbar[..., :, m] * (phase * inv)[..., None]
        y[..., :, L + m] = vals
        if m > 0:
            y[..., :, L - m] = sign * np.conj(vals)
        phase = phase * eiphi
    return y


def scalar_harmonics_dtheta(n_max: int, dirs) -> np.ndarray:
    """``dY_nm / dtheta`` with the same layout as :func:`scalar_harmonics`.

    Uses the ladder identity
    ``2 dY_nm/dtheta = c+ e^{-i phi} Y_{n,m+1} - c- e^{i phi} Y_{n,m-1}``,
    which involves no division by ``sin(theta)``.
    """
    _, _, eiphi = _direction_angles(dirs)
    y = scalar_harmonics(n_max, dirs)
    L = n_max
    out = np.zeros_like(y)
    for n in range(1, L + 1):
        for m in range(-n, n + 1):
            acc = 0.0
            if m + 1 <= n:
                acc = acc + np.sqrt((n - m) * (n + m + 1)) * np.conj(eiphi) * y[..., n, L + m + 1]
            if m - 1 >= -n:
                acc = acc - np.sqrt((n + m) * (n - m + 1)) * eiphi * y[..., n, L + m - 1]
            out[..., n, L + m] = 0.5 * acc
    return out


def vector_harmonics(n_max: int, dirs) -> np.ndarray:
    """Vector spherical harmonics ``X_nm = L Y_nm / sqrt(n(n+1))``, Cartesian.

    ``L = -i r x grad`` is applied through its ladder components, so the
    result is finite and exact on the polar axis.

    Returns shape ``dirs.shape[:-1] + (n_max + 1, 2 n_max + 1, 3)``; the
    ``n = 0`` row is zero.
    """
    y = scalar_harmonics(n_max, dirs)
    L = n_max
    out = np.zeros(y.shape + (3,), dtype=complex)
    for n in range(1, L + 1):
        norm = 1.0 / np.sqrt(n * (n + 1))
        for m in range(-n, n + 1):
            up = np.sqrt((n - m) * (n + m + 1)) * y[..., n, L + m + 1] if m < n else 0.0
            dn = np.sqrt((n + m) * (n - m + 1)) * y[..., n, L + m - 1] if m > -n else 0.0
            out[..., n, L + m, 0] = norm * 0.5 * (up + dn)
            out[..., n, L + m, 1] = norm * (up - dn) / 2j
            out[..., n, L + m, 2] = norm * m * y[..., n, L + m]
    return out


def vector_harmonic_X(n: int, m: int, direction) -> np.ndarray:
    """Single vector spherical harmonic ``X_nm`` at a unit vector (complex 3-vector)."""
    if n < 1 or abs(m) > n:
        raise ValueError(f"invalid (n, m) = ({n}, {m})")
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-10:
        raise ValueError("direction must be a unit vector")
    return vector_harmonics(n, direction)[n, n + m]


def legendre_matrix(n_max: int, xi) -> np.ndarray:
    """The 2x2 matrices ``M_n(xi)`` for ``n = 1 .. n_max``.

    ``M_n = (2n+1)/(n(n+1)) [[P', P''], [-(1-xi^2) P'' + xi P', -xi P'' - P']]``.
    Shape ``(n_max, 2, 2) + shape(xi)``.
    """
    xi = np.asarray(xi, dtype=float)
    _, dp, ddp = legendre_arrays(n_max, xi)
    n = np.arange(1, n_max + 1).reshape((-1,) + (1,) * xi.ndim)
    w = (2 * n + 1) / (n * (n + 1))
    dp, ddp = dp[1:], ddp[1:]
    out = np.empty((n_max, 2, 2) + xi.shape)
    out[:, 0, 0] = w * dp
    out[:, 0, 1] = w * ddp
    out[:, 1, 0] = w * (-(1 - xi**2) * ddp + xi * dp)
    out[:, 1, 1] = w * (-xi * ddp - dp)
    return out
