"""Two-photon wavepackets and the observables of the two-photon scattering process.

Probabilities are reduced: they are the physical probabilities divided by
``dOmega^2``, the squared solid angle of the input cones.  Multiply by
``dOmega^2`` to restore absolute values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import specfun
from .geometry import ScatteringGeometry, fig3_geometry
from .material import C_LIGHT, UM
from .mie import MieSet, absorption_terms
from .response import A_coefficient, S_coefficient

SYM_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    """Gauss-Legendre nodes (rad/s) and weights on an interval."""

    omega: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_legendre(cls, lo: float, hi: float, n: int = 64) -> "FrequencyGrid":
        if not hi > lo:
            raise ValueError("empty frequency interval")
        x, w = leggauss(n)
        half = 0.5 * (hi - lo)
        return cls(omega=0.5 * (hi + lo) + half * x, weights=half * w)


@dataclass(frozen=True)
class GaussianProfile:
    """Gaussian amplitude profile whose intensity has FWHM ``fwhm`` (rad/s) at ``center`` (rad/s)."""

    center: float
    fwhm: float

    @classmethod
    def from_wavelength(cls, center_um: float, fwhm_um: float) -> "GaussianProfile":
        """Convert a vacuum-wavelength centre and linewidth to angular frequency."""
        if not (center_um > 0 and fwhm_um > 0):
            raise ValueError("center_um and fwhm_um must be > 0")
        w0 = 2.0 * np.pi * C_LIGHT / (center_um * UM)
        return cls(center=w0, fwhm=w0 * fwhm_um / center_um)

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.exp(-2.0 * np.log(2.0) * ((omega - self.center) / self.fwhm) ** 2)

    @property
    def sigma_amplitude(self) -> float:
        """Standard deviation ``s`` of the amplitude, ``u = exp(-(w - w0)^2 / (4 s^2))``."""
        return self.fwhm / np.sqrt(8.0 * np.log(2.0))


def gaussian_overlap(p: GaussianProfile, q: GaussianProfile) -> float:
    """Closed-form ``int u_p(w) u_q(w) dw`` over the real line."""
    s1, s2 = p.sigma_amplitude, q.sigma_amplitude
    alpha = 1.0 / (4 * s1**2) + 1.0 / (4 * s2**2)
    return float(np.sqrt(np.pi / alpha) * np.exp(-((p.center - q.center) ** 2) / (4 * (s1**2 + s2**2))))


@dataclass(frozen=True)
class TwoPhotonSpectrum:
    """Joint amplitude ``phi[l1, l2, i, j] = phi_{l1 l2}(omega_i, omega_j)`` on a tensor grid."""

    sigma: int
    phi: np.ndarray  # (2, 2, n, n) complex
    grid: FrequencyGrid

    def symmetry_error(self) -> float:
        swapped = np.transpose(self.phi, (1, 0, 3, 2))
        return float(np.abs(swapped - self.sigma * self.phi).max())

    def norm(self) -> float:
        W = np.outer(self.grid.weights, self.grid.weights)
        return float(np.sum(W * np.abs(self.phi) ** 2))

    def central_frequency(self) -> float:
        """Intensity-weighted mean single-photon frequency (rad/s)."""
        W = np.outer(self.grid.weights, self.grid.weights)
        dens = np.sum(np.abs(self.phi) ** 2, axis=(0, 1)) * W
        w = self.grid.omega
        mean = 0.5 * (w[:, None] + w[None, :])
        return float(np.sum(dens * mean) / np.sum(dens))

    def central_wavelength_um(self) -> float:
        return 2.0 * np.pi * C_LIGHT / self.central_frequency() / UM

    def index_of(self, omega: float) -> int:
        i = int(np.argmin(np.abs(self.grid.omega - omega)))
        if not np.isclose(self.grid.omega[i], omega, rtol=1e-13, atol=0.0):
            raise ValueError(f"frequency {omega} is not a grid node")
        return i


class DegenerateSpectrumError(ValueError):
    """The (anti)symmetrized amplitude vanishes identically."""


def make_symmetrized_spectrum(
    sigma: int,
    weights,
    u: Union[GaussianProfile, Callable],
    v: Union[GaussianProfile, Callable],
    grid: Optional[FrequencyGrid] = None,
    n_nodes: int = 64,
) -> TwoPhotonSpectrum:
    """``phi_{l1 l2}(w1, w2) = N [w_{l1 l2} u(w1) v(w2) + sigma w_{l2 l1} u(w2) v(w1)]``.

    Parameters
    ----------
    sigma : {+1, -1}
    weights : (2, 2) complex array
    u, v : profiles evaluated on the grid
    grid : FrequencyGrid, optional
        Defaults to ``n_nodes`` Gauss-Legendre nodes spanning five FWHM
        beyond both Gaussian centres.

    Raises
    ------
    DegenerateSpectrumError
        If the result has zero norm on the grid.
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    w = np.asarray(weights, dtype=complex)
    if w.shape != (2, 2):
        raise ValueError("weights must be 2x2")
    if grid is None:
        if not (isinstance(u, GaussianProfile) and isinstance(v, GaussianProfile)):
            raise ValueError("a grid is required for non-Gaussian profiles")
        lo = min(u.center - 5 * u.fwhm, v.center - 5 * v.fwhm)
        hi = max(u.center + 5 * u.fwhm, v.center + 5 * v.fwhm)
        grid = FrequencyGrid.gauss_legendre(lo, hi, n_nodes)
    uu = u(grid.omega)
    vv = v(grid.omega)
    direct = np.einsum("ab,i,j->abij", w, uu, vv)
    exch = np.einsum("ba,j,i->abij", w, uu, vv)
    phi = direct + sigma * exch
    Wt = np.outer(grid.weights, grid.weights)
    nrm = float(np.sum(Wt * np.abs(phi) ** 2))
    scale = float(np.sum(Wt * np.abs(direct) ** 2))
    if nrm <= 1e-24 * max(scale, 1e-300):
        raise DegenerateSpectrumError("symmetrized spectrum vanishes (e.g. sigma = -1 with u = v and symmetric weights)")
    return TwoPhotonSpectrum(sigma=sigma, phi=phi / np.sqrt(nrm), grid=grid)


@dataclass(frozen=True)
class OverlapMatrix:
    """``I[l1, l2, l1', l2'] = int conj(phi_{l1 l2}) phi_{l1' l2'}`` (0-based indices)."""

    sigma: int
    I: np.ndarray  # (2, 2, 2, 2)

    def trace(self) -> complex:
        return complex(np.einsum("abab->", self.I))

    @property
    def I12_12(self) -> float:
        return float(self.I[0, 1, 0, 1].real)

    def property_errors(self) -> dict:
        """Deviations from unit trace, Hermiticity and pair-exchange symmetry."""
        I = self.I
        return {
            "trace": abs(self.trace() - 1.0),
            "hermitian": float(np.abs(np.conj(I) - np.transpose(I, (2, 3, 0, 1))).max()),
            "exchange": float(np.abs(np.transpose(I, (1, 0, 3, 2)) - I).max()),
        }


def overlap_matrix(spec: TwoPhotonSpectrum) -> OverlapMatrix:
    W = np.outer(spec.grid.weights, spec.grid.weights)
    I = np.einsum("abij,cdij,ij->abcd", np.conj(spec.phi), spec.phi, W)
    return OverlapMatrix(sigma=spec.sigma, I=I)


# Coincidence detection ------------------------------------------------------


def coincidence_amplitude_grid(g: ScatteringGeometry, mie: MieSet, spec: TwoPhotonSpectrum, Lam1: int, Lam2: int) -> np.ndarray:
    """Bracketed direct + exchange amplitude on the whole grid, ``[i, j]`` for ``(omega_i, omega_j)``.

    Omits the ``dOmega / sqrt(2)`` prefactor.
    """
    s = g.s_matrix(mie)
    L1, L2 = Lam1 - 1, Lam2 - 1
    direct = np.einsum("a,b->ab", s[0, :, 0, L1], s[1, :, 1, L2])
    exch = np.einsum("a,b->ab", s[0, :, 1, L2], s[1, :, 0, L1])
    phi = spec.phi
    phi_swapped = np.transpose(phi, (0, 1, 3, 2))
    return np.einsum("ab,abij->ij", direct, phi) + np.einsum("ab,abij->ij", exch, phi_swapped)


def coincidence_amplitude(g, mie, spec: TwoPhotonSpectrum, omega1: float, omega2: float, Lam1: int, Lam2: int) -> complex:
    """Amplitude for detecting ``(omega1, out1, Lam1)`` together with ``(omega2, out2, Lam2)``."""
    i, j = spec.index_of(omega1), spec.index_of(omega2)
    s = g.s_matrix(mie)
    L1, L2 = Lam1 - 1, Lam2 - 1
    acc = 0j
    for a in range(2):
        for b in range(2):
            acc += spec.phi[a, b, i, j] * s[0, a, 0, L1] * s[1, b, 1, L2]
            acc += spec.phi[a, b, j, i] * s[0, a, 1, L2] * s[1, b, 0, L1]
    return complex(acc)


def coincidence_density(g, mie, spec, omega1, omega2, Lam1, Lam2) -> float:
    """Reduced joint detection density ``|amplitude|^2 / 2``."""
    return 0.5 * abs(coincidence_amplitude(g, mie, spec, omega1, omega2, Lam1, Lam2)) ** 2


def coincidence_density_grid(g, mie, spec, Lam1, Lam2) -> np.ndarray:
    return 0.5 * np.abs(coincidence_amplitude_grid(g, mie, spec, Lam1, Lam2)) ** 2


# Counter-propagating geometry specializations -------------------------------


def t_oe_eo(mie: MieSet) -> tuple[complex, complex]:
    """``T^oe`` (odd ``a_n``, even ``b_n``) and ``T^eo`` (even ``a_n``, odd ``b_n``)."""
    N = mie.n_max
    p, _, _ = specfun.legendre_arrays(N, 0.0)
    t_oe = 0j
    t_eo = 0j
    for n in range(1, N + 1):
        an, bn = mie.a[n - 1], mie.b[n - 1]
        if n % 2:  # n = 2m + 1
            mm = (n - 1) // 2
            c = (4 * mm + 3) / (2 * mm + 2) * p[2 * mm]
            t_oe += c * an
            t_eo += c * bn
        else:  # n = 2m
            c = (2 * n + 1) * p[n]
            t_oe += c * bn
            t_eo += c * an
    return t_oe / (2 * np.pi), t_eo / (2 * np.pi)


def l_k_pm(mie: MieSet) -> tuple[float, float, float, float]:
    """``(L+, L-, K+, K-)``: alternating-sign sums of scattering and absorption terms."""
    n = mie.orders()
    w = 2 * n + 1
    alt = np.where(n % 2 == 1, 1.0, -1.0)  # (-1)^(n+1)
    a2, b2 = np.abs(mie.a) ** 2, np.abs(mie.b) ** 2
    ta, tb = absorption_terms(mie)
    Lp = np.sum(w * (a2 + b2)) / (2 * np.pi)
    Lm = np.sum(alt * w * (a2 - b2)) / (2 * np.pi)
    Kp = np.sum(w * (ta + tb)) / (2 * np.pi)
    Km = np.sum(alt * w * (ta - tb)) / (2 * np.pi)
    return float(Lp), float(Lm), float(Kp), float(Km)


@dataclass(frozen=True)
class ProcessProbabilities:
    """Reduced probabilities that two, one or zero particles leave as scattered light."""

    p2s: float
    p1s: float
    p0s: float

    def scaled(self, solid_angle: float) -> "ProcessProbabilities":
        f = solid_angle**2
        return ProcessProbabilities(self.p2s * f, self.p1s * f, self.p0s * f)


def fig3_probabilities(L: tuple[float, float, float, float], sigma: int, I12: float) -> ProcessProbabilities:
    """Closed forms in the counter-propagating geometry, from ``(L+, L-, K+, K-)``."""
    Lp, Lm, Kp, Km = L
    f = sigma * (1.0 - 4.0 * I12)
    return ProcessProbabilities(
        p2s=Lp * Lp + f * Lm * Lm,
        p1s=2.0 * (Lp * Kp + f * Lm * Km),
        p0s=Kp * Kp + f * Km * Km,
    )


def _power_tables(g: ScatteringGeometry, mie: MieSet):
    """``S[i, l, j, l']`` and ``A[i, l, j, l']`` between input ports (0-based)."""
    S = np.empty((2, 2, 2, 2), dtype=complex)
    A = np.empty_like(S)
    ins = g.ins()
    for i in range(2):
        for l in range(2):
            for j in range(2):
                for lp in range(2):
                    p1, p2 = ins[i].port(l + 1), ins[j].port(lp + 1)
                    S[i, l, j, lp] = S_coefficient(mie, p1, p2)
                    A[i, l, j, lp] = A_coefficient(mie, p1, p2)
    return S, A


def general_probabilities(g: ScatteringGeometry, mie: MieSet, overlap: OverlapMatrix) -> ProcessProbabilities:
    """Overlap-weighted averages of products of power coefficients, any geometry."""
    S, A = _power_tables(g, mie)
    I = overlap.I
    sigma = overlap.sigma

    def avg(Q):
        return np.einsum("abcd,abcd->", I, Q)

    def direct(X, Y):  # X(m1 l1; m1 l1') Y(m2 l2; m2 l2')
        return np.einsum("ac,bd->abcd", X[0, :, 0, :], Y[1, :, 1, :])

    def exchange(X, Y):  # X(m2 l1; m1 l1') Y(m1 l2; m2 l2')
        return np.einsum("ac,bd->abcd", X[1, :, 0, :], Y[0, :, 1, :])

    p2 = avg(direct(S, S)) + sigma * avg(exchange(S, S))
    p1 = avg(direct(S, A) + direct(A, S)) + sigma * avg(exchange(S, A) + exchange(A, S))
    p0 = avg(direct(A, A)) + sigma * avg(exchange(A, A))
    return ProcessProbabilities(float(p2.real), float(p1.real), float(p0.real))


def process_probabilities(mie: MieSet, spec_or_overlap, geometry: Union[ScatteringGeometry, str] = "fig3") -> ProcessProbabilities:
    """Reduced ``(p2s, p1s, p0s)``.

    ``geometry="fig3"`` uses the closed forms, which depend on the spectrum
    only through ``I^{12}_{12}``; a :class:`ScatteringGeometry` uses the full
    overlap matrix.
    """
    ov = overlap_matrix(spec_or_overlap) if isinstance(spec_or_overlap, TwoPhotonSpectrum) else spec_or_overlap
    if isinstance(geometry, str):
        if geometry != "fig3":
            raise ValueError(f"unknown geometry mode {geometry!r}")
        return fig3_probabilities(l_k_pm(mie), ov.sigma, ov.I12_12)
    return general_probabilities(geometry, mie, ov)


__all__ = [
    "FrequencyGrid",
    "GaussianProfile",
    "gaussian_overlap",
    "TwoPhotonSpectrum",
    "DegenerateSpectrumError",
    "make_symmetrized_spectrum",
    "OverlapMatrix",
    "overlap_matrix",
    "coincidence_amplitude",
    "coincidence_amplitude_grid",
    "coincidence_density",
    "coincidence_density_grid",
    "t_oe_eo",
    "l_k_pm",
    "ProcessProbabilities",
    "fig3_probabilities",
    "general_probabilities",
    "process_probabilities",
    "fig3_geometry",
]
