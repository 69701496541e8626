"""Response coefficients of the sphere.

Everything the two-photon observables need is contracted from the Mie
coefficients through the operator ``J_xi``, which maps two coefficient
sequences ``(p_n, q_n)`` to a 2-vector

    J_xi{p, q} = (1/pi) sum_n (2n+1)/(n(n+1)) (p_n, q_n) . M_n(xi)

with the Legendre matrix ``M_n`` of :func:`mieq.specfun.legendre_matrix`.
A coefficient between two ports ``(n, e)`` and ``(n', e')`` is then
``J_{n.n'} . (e.e', (e.n')(n.e'))``.

Only the scattered field enters; the forward delta-function part of the
transmission is not represented.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import specfun
from .mie import MieSet, absorption_terms, mie_coefficients, wiscombe_n_max
from .quadrature import SphereRule, sphere_rule

UNIT_TOL = 1e-10


def _unit(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} must have unit norm, got |v| = {nrm}")
    return v


@dataclass(frozen=True)
class PolarizedPort:
    """A plane-wave direction with one real transverse polarization."""

    dir: np.ndarray
    pol_vector: np.ndarray
    pol_index: int = 1

    def __post_init__(self):
        d = _unit(self.dir, "dir")
        e = _unit(self.pol_vector, "pol_vector")
        if abs(d @ e) > UNIT_TOL:
            raise ValueError("polarization must be orthogonal to the direction")
        if self.pol_index not in (1, 2):
            raise ValueError("pol_index must be 1 or 2")
        object.__setattr__(self, "dir", d)
        object.__setattr__(self, "pol_vector", e)

    def transformed(self, R: np.ndarray) -> "PolarizedPort":
        return PolarizedPort(R @ self.dir, R @ self.pol_vector, self.pol_index)


def _k_or_unit(mie: MieSet) -> float:
    return mie.k if np.isfinite(mie.k) else 1.0


def j_operator(p: Sequence[complex], q: Sequence[complex], xi: float) -> np.ndarray:
    """The row vector ``J_xi{p, q}`` as a complex 2-array."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("p and q must be 1-D sequences of equal length")
    if not -1.0 - 1e-12 <= xi <= 1.0 + 1e-12:
        raise ValueError(f"xi = {xi} outside [-1, 1]")
    M = specfun.legendre_matrix(p.size, float(np.clip(xi, -1.0, 1.0)))
    return (p @ M[:, 0, :] + q @ M[:, 1, :]) / np.pi


def _j_many(p: np.ndarray, q: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``J_xi`` for an array of ``xi``; returns shape ``xi.shape + (2,)``."""
    M = specfun.legendre_matrix(p.size, np.clip(xi, -1.0, 1.0))
    row = np.einsum("n,nj...->...j", p, M[:, 0]) + np.einsum("n,nj...->...j", q, M[:, 1])
    return row / np.pi


def _pair_vector(p1: PolarizedPort, p2: PolarizedPort) -> np.ndarray:
    e1, n1, e2, n2 = p1.pol_vector, p1.dir, p2.pol_vector, p2.dir
    return np.array([e1 @ e2, (e1 @ n2) * (n1 @ e2)])


def _contract(mie: MieSet, p, q, p1: PolarizedPort, p2: PolarizedPort) -> complex:
    return complex(j_operator(p, q, float(p1.dir @ p2.dir)) @ _pair_vector(p1, p2))


def s_coefficient(mie: MieSet, inc: PolarizedPort, out: PolarizedPort) -> complex:
    """Dimensionless scattering coefficient from port ``inc`` to port ``out``."""
    return _contract(mie, -0.5 * mie.a, -0.5 * mie.b, out, inc)


def S_coefficient(mie: MieSet, port1: PolarizedPort, port2: PolarizedPort) -> complex:
    """Power scattering coefficient, the solid-angle integral of ``conj(s1) s2``."""
    return _contract(mie, np.abs(mie.a) ** 2 + 0j, np.abs(mie.b) ** 2 + 0j, port1, port2)


def A_coefficient(mie: MieSet, port1: PolarizedPort, port2: PolarizedPort) -> complex:
    """Power absorption coefficient built from ``Re a - |a|^2`` and ``Re b - |b|^2``."""
    ta, tb = absorption_terms(mie)
    return _contract(mie, ta + 0j, tb + 0j, port1, port2)


def E_coefficient(mie: MieSet, port1: PolarizedPort, port2: PolarizedPort) -> complex:
    """Extinction coefficient built from ``Re a`` and ``Re b``."""
    return _contract(mie, mie.a.real + 0j, mie.b.real + 0j, port1, port2)


def scattering_amplitudes(mie: MieSet, inc: PolarizedPort, out_dirs: np.ndarray) -> np.ndarray:
    """Transverse amplitude vectors ``t(N)`` with ``s(inc -> N, e) = e . t(N)``.

    ``out_dirs`` has shape ``(M, 3)``; the result is ``(M, 3)`` and is
    orthogonal to each ``N``.
    """
    N = np.asarray(out_dirs, dtype=float)
    xi = N @ inc.dir
    J = _j_many(-0.5 * mie.a, -0.5 * mie.b, xi)  # (M, 2)
    t = J[:, :1] * inc.pol_vector[None, :] + (J[:, 1] * (N @ inc.pol_vector))[:, None] * inc.dir[None, :]
    return t - np.sum(N * t, axis=1, keepdims=True) * N


def cross_sections_multiwave(mie: MieSet, waves: Sequence[tuple[PolarizedPort, complex]]) -> tuple[float, float, float]:
    """``(C_sca, C_ext, C_abs)`` for a superposition of plane waves.

    Each wave is a port with a complex amplitude; the amplitudes of waves
    sharing a direction form that direction's polarization vector.  Areas
    are in squared length units of ``1/mie.k`` (``k = 1`` if unset).
    """
    if not waves:
        raise ValueError("need at least one wave")
    k = _k_or_unit(mie)
    scale = (2.0 * np.pi / k) ** 2
    sca = 0j
    absn = 0j
    for pi, ci in waves:
        for pj, cj in waves:
            w = np.conj(ci) * cj
            sca += w * S_coefficient(mie, pi, pj)
            absn += w * A_coefficient(mie, pi, pj)
    c_sca = float(scale * sca.real)
    c_abs = float(scale * absn.real)
    return c_sca, c_sca + c_abs, c_abs


def quadrature_S_route(mie: MieSet, port1: PolarizedPort, port2: PolarizedPort, rule: SphereRule) -> complex:
    """``sum_Lambda oint conj(s1) s2`` using the transverse projector as the polarization sum."""
    t1 = scattering_amplitudes(mie, port1, rule.dirs)
    t2 = scattering_amplitudes(mie, port2, rule.dirs)
    return complex(np.sum(rule.weights * np.sum(np.conj(t1) * t2, axis=1)))


def optical_theorem_residual(mie: MieSet, port1: PolarizedPort, port2: PolarizedPort, rule: SphereRule | None = None) -> float:
    """Energy-balance residual ``|A + S - E|`` relative to the extinction scale.

    ``S`` is obtained by angular quadrature of scattering amplitudes, ``A``
    from the closed form and ``E = -s(2 -> 1) - conj(s(1 -> 2))`` from the
    forward-type scattering coefficients.  The scale is
    ``sqrt(|E11| |E22|)``; the residual is reported as 0 when all terms
    vanish identically.
    """
    if rule is None:
        rule = sphere_rule(max(64, mie.n_max + 2), max(128, 2 * mie.n_max + 4))
    S = quadrature_S_route(mie, port1, port2, rule)
    A = A_coefficient(mie, port1, port2)
    E = -s_coefficient(mie, port2, port1) - np.conj(s_coefficient(mie, port1, port2))
    num = abs(A + S - E)
    scale = np.sqrt(abs(E_coefficient(mie, port1, port1)) * abs(E_coefficient(mie, port2, port2)))
    if num == 0.0:
        return 0.0
    return float(num / scale) if scale > 0 else float("inf")


# Interior field -------------------------------------------------------------


@dataclass(frozen=True)
class InteriorExpansion:
    """Interior Mie coefficients with an order suited to field evaluation."""

    mie: MieSet
    k: float
    k_V: complex
    radius: float
    eps: complex = field(default=0j)


def interior_expansion(mie: MieSet, extra_orders: int = 10) -> InteriorExpansion:
    """Recompute ``c_n, d_n`` to an untrimmed order large enough for the interior field.

    Interior coefficients decay more slowly than ``a_n, b_n``, so the
    exterior truncation is not reused.
    """
    if not (np.isfinite(mie.k) and np.isfinite(mie.radius)):
        raise ValueError("interior evaluation needs a MieSet with k and radius")
    mx = mie.m * mie.x
    N = max(mie.n_max, wiscombe_n_max(mie.x, mx)) + extra_orders
    full = mie_coefficients(mie.eps, mie.x, N, k=mie.k, radius=mie.radius)
    return InteriorExpansion(mie=full, k=mie.k, k_V=full.k_V, radius=mie.radius, eps=mie.eps)


def _radial_factors(N: int, z: complex):
    """``j_n(z)``, ``j_n(z)/z`` and ``psi_n'(z)/z`` for ``n = 1..N`` with the ``z -> 0`` limits."""
    if z == 0:
        j = np.zeros(N, dtype=complex)
        jz = np.zeros(N, dtype=complex)
        dpz = np.zeros(N, dtype=complex)
        jz[0] = 1.0 / 3.0
        dpz[0] = 2.0 / 3.0
        return j, jz, dpz
    jj = specfun.spherical_bessel_j(N, z)
    n = np.arange(1, N + 1)
    j = jj[1:]
    dpsi = z * jj[:-1] - n * jj[1:]
    return j, j / z, dpsi / z


def _incident_projections(N: int, inc: PolarizedPort):
    """``alpha_nm = (n x X*_nm(n)) . e`` and ``beta_nm = X*_nm(n) . e``, shape ``(N, 2N+1)``."""
    X = specfun.vector_harmonics(N, inc.dir)[1:]  # (N, 2N+1, 3)
    Xc = np.conj(X)
    beta = Xc @ inc.pol_vector
    alpha = np.cross(inc.dir, Xc) @ inc.pol_vector
    return alpha, beta


def interior_field_grid(exp: InteriorExpansion, inc: PolarizedPort, radii: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Interior field ``F(s|n) . e`` on the tensor grid ``radii x dirs``.

    Returns shape ``(len(radii), len(dirs), 3)``.  Points with ``r = 0`` use
    the analytic limit, where only the dipole terms survive.
    """
    mie = exp.mie
    N = mie.n_max
    dirs = np.asarray(dirs, dtype=float)
    Y = specfun.scalar_harmonics(N, dirs)[:, 1:]  # (M, N, 2N+1)
    X = specfun.vector_harmonics(N, dirs)[:, 1:]  # (M, N, 2N+1, 3)
    alpha, beta = _incident_projections(N, inc)
    n = np.arange(1, N + 1)
    ya = np.einsum("mnq,nq->mn", Y, alpha)
    xa = np.einsum("mnqk,nq->mnk", X, alpha)
    xb = np.einsum("mnqk,nq->mnk", X, beta)
    radial_term = np.sqrt(n * (n + 1))[None, :, None] * ya[:, :, None] * dirs[:, None, :]
    tangential_term = np.cross(dirs[:, None, :], xa)
    pref = 4.0 * np.pi * (1j ** n)
    out = np.empty((len(radii), len(dirs), 3), dtype=complex)
    for i, r in enumerate(np.asarray(radii, dtype=float)):
        j, jz, dpz = _radial_factors(N, exp.k_V * r)
        cd = pref * mie.d
        fld = np.einsum("n,mnk->mk", cd * jz, radial_term)
        fld += np.einsum("n,mnk->mk", -1j * cd * dpz, tangential_term)
        fld += np.einsum("n,mnk->mk", pref * mie.c * j, xb)
        out[i] = fld
    return out


def internal_field(mie: MieSet, inc: PolarizedPort, point) -> np.ndarray:
    """Interior field at one point ``|point| < radius`` for unit incident amplitude."""
    point = np.asarray(point, dtype=float).reshape(3)
    r = float(np.linalg.norm(point))
    if not r < mie.radius:
        raise ValueError("point must lie strictly inside the sphere")
    exp = interior_expansion(mie)
    d = point / r if r > 0 else np.array([0.0, 0.0, 1.0])
    return interior_field_grid(exp, inc, np.array([r]), d[None, :])[0, 0]


def pointwise_absorption_coefficient(mie: MieSet, inc: PolarizedPort, point, component: int) -> complex:
    """Absorption amplitude density at ``point`` for Cartesian ``component`` (0, 1, 2).

    Zero outside the sphere and for lossless material.
    """
    point = np.asarray(point, dtype=float).reshape(3)
    if np.linalg.norm(point) >= mie.radius or mie.eps.imag <= 0:
        return 0j
    F = internal_field(mie, inc, point)
    return complex(-np.sqrt(4.0 * mie.k**3 * mie.eps.imag) / (4.0 * np.pi) * F[component])
