"""Exterior and interior Mie coefficients of a homogeneous sphere.

The coefficients follow the Bohren-Huffman convention: ``a_n`` (electric)
and ``b_n`` (magnetic) for the scattered field, ``c_n`` and ``d_n`` for the
interior field, with ``c_n`` sharing the denominator of ``b_n`` and ``d_n``
that of ``a_n``.  They are evaluated in logarithmic-derivative form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import specfun
from .material import MaterialModel, permittivity, wavenumber_in_medium

TAIL_TOL = 1e-14
NMaxPolicy = Union[str, int]


@dataclass(frozen=True)
class MieSet:
    """Truncated Mie coefficients at one frequency.

    Arrays ``a, b, c, d`` hold orders ``n = 1 .. n_max`` (index ``n - 1``).
    """

    x: float
    eps: complex
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    k: float = float("nan")
    radius: float = float("nan")

    @property
    def n_max(self) -> int:
        return int(self.a.size)

    @property
    def m(self) -> complex:
        """Relative refractive index, branch with ``Im >= 0``."""
        return wavenumber_in_medium(1.0, self.eps)

    @property
    def k_V(self) -> complex:
        return wavenumber_in_medium(self.k, self.eps)

    def orders(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)


def wiscombe_n_max(x: float, mx: complex) -> int:
    """Starting truncation ``ceil(x + 4.05 x^(1/3) + 2) + ceil(|m x|)``."""
    return int(math.ceil(x + 4.05 * x ** (1.0 / 3.0) + 2.0) + math.ceil(abs(mx)))


def _raw_coefficients(eps: complex, x: float, n_max: int):
    n = np.arange(1, n_max + 1)
    if eps == 1:
        zero = np.zeros(n_max, dtype=complex)
        one = np.ones(n_max, dtype=complex)
        return zero, zero.copy(), one, one.copy()
    m = wavenumber_in_medium(1.0, eps)
    mx = m * x
    psi, _ = specfun.riccati_bessel_psi(n_max, x)
    xi, _ = specfun.riccati_bessel_xi(n_max, x)
    D = specfun.log_derivative_psi(n_max, mx)[1:]
    psi_in = mx * specfun.spherical_bessel_j(n_max, mx)[1:]

    ga = D / m + n / x
    gb = m * D + n / x
    den_a = ga * xi[1:] - xi[:-1]
    den_b = gb * xi[1:] - xi[:-1]
    a = (ga * psi[1:] - psi[:-1]) / den_a
    b = (gb * psi[1:] - psi[:-1]) / den_b
    d = -1j / (psi_in * den_a)
    c = -1j * m / (psi_in * den_b)
    return a, b, c, d


def mie_coefficients(eps: complex, x: float, n_max: NMaxPolicy = "auto", *, k=float("nan"), radius=float("nan")) -> MieSet:
    """Mie coefficients for relative permittivity ``eps`` and size parameter ``x``.

    Parameters
    ----------
    eps : complex
        Relative permittivity of the sphere (``Im eps >= 0``).
    x : float
        Size parameter ``k a``.
    n_max : "auto" or int
        ``"auto"`` starts from :func:`wiscombe_n_max`, extends until the tail
        ``|a_n| + |b_n|`` drops below ``1e-14`` and trims everything past the
        first such order.  An integer requests exactly that many orders with
        no trimming, which interior-field work needs since ``c_n, d_n`` decay
        more slowly than ``a_n, b_n``.
    """
    eps = complex(eps)
    if not x > 0:
        raise ValueError("size parameter must be > 0")
    if eps == 0:
        raise ValueError("eps = 0 gives a vanishing refractive index; the Mie series is undefined")
    mx = wavenumber_in_medium(1.0, eps) * x
    try:
        if n_max == "auto":
            N = wiscombe_n_max(x, mx)
            while True:
                a, b, c, d = _raw_coefficients(eps, x, N)
                tail = np.abs(a) + np.abs(b)
                small = np.nonzero(tail < TAIL_TOL)[0]
                if small.size or eps == 1:
                    cut = int(small[0]) + 1 if small.size else 1
                    a, b, c, d = a[:cut], b[:cut], c[:cut], d[:cut]
                    break
                N += max(4, N // 4)
                if N > 20_000:
                    raise RuntimeError("Mie series failed to converge")
        elif isinstance(n_max, (int, np.integer)) and n_max >= 1:
            a, b, c, d = _raw_coefficients(eps, x, int(n_max))
        else:
            raise ValueError(f"invalid n_max policy {n_max!r}")
    except (OverflowError, FloatingPointError, ZeroDivisionError) as exc:
        raise type(exc)(f"{exc} (x = {x}, eps = {eps})") from exc
    return MieSet(x=float(x), eps=eps, a=a, b=b, c=c, d=d, k=k, radius=radius)


def mie_set(model: MaterialModel, radius_um: float, wavelength_um: float, n_max_policy: NMaxPolicy = "auto") -> MieSet:
    """Mie coefficients of a sphere of ``radius_um`` at vacuum ``wavelength_um``."""
    if not radius_um > 0 or not wavelength_um > 0:
        raise ValueError("radius and wavelength must be > 0")
    eps = permittivity(model, wavelength_um)
    k = 2.0 * np.pi / wavelength_um
    try:
        return mie_coefficients(eps, k * radius_um, n_max_policy, k=k, radius=radius_um)
    except (OverflowError, FloatingPointError, ZeroDivisionError) as exc:
        raise type(exc)(f"{exc} at wavelength {wavelength_um} um, radius {radius_um} um") from exc


def absorption_terms(mie: MieSet) -> tuple[np.ndarray, np.ndarray]:
    """Signed per-order absorption combinations ``Re a - |a|^2`` and ``Re b - |b|^2``."""
    return mie.a.real - np.abs(mie.a) ** 2, mie.b.real - np.abs(mie.b) ** 2


def transparent_identity_residual(mie: MieSet) -> tuple[np.ndarray, np.ndarray]:
    """``|Re a_n - |a_n|^2|`` and ``|Re b_n - |b_n|^2|`` per order.

    Both vanish for a lossless sphere and are positive otherwise.
    """
    ra, rb = absorption_terms(mie)
    return np.abs(ra), np.abs(rb)


def cross_sections(mie: MieSet) -> tuple[float, float, float]:
    """Single-plane-wave ``(C_sca, C_abs, C_ext)`` in units of ``1/k^2``-scaled area.

    Returns the sums multiplied by ``2 pi / k^2`` when ``mie.k`` is set,
    otherwise the dimensionless ``k^2 C / (2 pi)``.
    """
    n = mie.orders()
    w = 2 * n + 1
    sca = float(np.sum(w * (np.abs(mie.a) ** 2 + np.abs(mie.b) ** 2)))
    ext = float(np.sum(w * (mie.a.real + mie.b.real)))
    scale = 2 * np.pi / mie.k**2 if np.isfinite(mie.k) else 1.0
    return sca * scale, (ext - sca) * scale, ext * scale
