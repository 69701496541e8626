"""Brute-force reference routes for the closed-form response coefficients.

* :func:`quadrature_S` integrates ``sum_Lambda conj(s1) s2`` over outgoing
  directions with an explicit polarization basis at each node.
* :func:`quadrature_A` integrates the squared pointwise absorption
  amplitudes over the sphere volume using the interior multipole field.
* :func:`direct_scattering_dyadic` builds the far-field dyadic from an
  explicit ``m``-sum of vector spherical harmonics, bypassing the Legendre
  closed form.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import specfun
from .mie import MieSet, mie_coefficients
from .quadrature import pairwise_sum, radial_rule, sphere_rule
from .response import (
    A_coefficient,
    PolarizedPort,
    S_coefficient,
    _j_many,
    interior_expansion,
    interior_field_grid,
    s_coefficient,
)

SPECTRAL_TOL = 1e-8
VOLUME_TOL = 1e-3
DYADIC_TOL = 1e-10


class UnderResolvedError(RuntimeError):
    """Doubling the quadrature order moved the result by more than the tolerance."""


def _auto_basis(dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = np.array([0.0, 0.0, 1.0])
    e1 = np.cross(z, dirs)
    nrm = np.linalg.norm(e1, axis=1)
    polar = nrm < 1e-12
    if np.any(polar):
        e1[polar] = np.cross(np.array([1.0, 0.0, 0.0]), dirs[polar])
        nrm[polar] = np.linalg.norm(e1[polar], axis=1)
    e1 = e1 / nrm[:, None]
    e2 = np.cross(dirs, e1)
    return e1, e2


def _s_on_nodes(mie: MieSet, port: PolarizedPort, dirs: np.ndarray, basis) -> np.ndarray:
    """``s(port -> N, Lambda)`` at every node for both basis vectors; shape ``(M, 2)``."""
    J = _j_many(-0.5 * mie.a, -0.5 * mie.b, dirs @ port.dir)  # (M, 2)
    out = np.empty((len(dirs), 2), dtype=complex)
    for lam, e in enumerate(basis):
        out[:, lam] = J[:, 0] * (e @ port.pol_vector) + J[:, 1] * (e @ port.dir) * (dirs @ port.pol_vector)
    return out


def quadrature_S(
    mie: MieSet,
    port1: PolarizedPort,
    port2: PolarizedPort,
    angular_order: int = 64,
    n_phi: Optional[int] = None,
    check: bool = False,
    tol: float = SPECTRAL_TOL,
) -> complex:
    """Literal solid-angle integral of ``sum_Lambda conj(s(1 -> N Lambda)) s(2 -> N Lambda)``.

    Parameters
    ----------
    angular_order : int
        Gauss-Legendre nodes in ``cos(theta)``; must be ``>= n_max + 2``.
    n_phi : int, optional
        Trapezoid nodes in ``phi``, default ``2 * angular_order``.
    check : bool
        Also evaluate at double order and raise :class:`UnderResolvedError`
        if the two differ by more than ``tol`` relative.
    """
    if angular_order < mie.n_max + 2:
        raise ValueError(f"angular_order {angular_order} < n_max + 2 = {mie.n_max + 2}")
    n_phi = 2 * angular_order if n_phi is None else n_phi
    rule = sphere_rule(angular_order, n_phi)
    basis = _auto_basis(rule.dirs)
    s1 = _s_on_nodes(mie, port1, rule.dirs, basis)
    s2 = s1 if port2 is port1 else _s_on_nodes(mie, port2, rule.dirs, basis)
    val = complex(pairwise_sum(rule.weights * np.sum(np.conj(s1) * s2, axis=1)))
    if check:
        ref = quadrature_S(mie, port1, port2, 2 * angular_order, 2 * n_phi)
        if abs(ref - val) > tol * max(abs(ref), 1e-300):
            raise UnderResolvedError(f"quadrature_S moved by {abs(ref - val):.3e} on doubling")
    return val


def _volume_fields(mie: MieSet, ports: Sequence[PolarizedPort], radial_order: int, angular_order: int, n_phi: int):
    exp = interior_expansion(mie)
    rule = sphere_rule(angular_order, n_phi)
    r, wr = radial_rule(mie.radius, radial_order)
    fields = [interior_field_grid(exp, p, r, rule.dirs) for p in ports]
    W = wr[:, None] * rule.weights[None, :]
    return fields, W


def quadrature_A(
    mie: MieSet,
    port1: PolarizedPort,
    port2: PolarizedPort,
    radial_order: int = 48,
    angular_order: int = 64,
    n_phi: Optional[int] = None,
    check: bool = False,
    tol: float = VOLUME_TOL,
) -> complex:
    """Volume integral ``sum_Upsilon int d^3R conj(a_1^{R Upsilon}) a_2^{R Upsilon}``.

    ``mie`` must carry ``k`` and ``radius``.  The interior field is
    re-expanded to an order suited to the interior (see
    :func:`mieq.response.interior_expansion`).
    """
    n_phi = 2 * angular_order if n_phi is None else n_phi
    if mie.eps.imag <= 0:
        return 0j
    (F1, F2), W = _volume_fields(mie, [port1, port2], radial_order, angular_order, n_phi)
    integrand = W * np.sum(np.conj(F1) * F2, axis=2)
    val = complex(mie.k**3 * mie.eps.imag / (4 * np.pi**2) * pairwise_sum(integrand.ravel()))
    if check:
        ref = quadrature_A(mie, port1, port2, 2 * radial_order, angular_order, n_phi)
        if abs(ref - val) > tol * max(abs(ref), 1e-300):
            raise UnderResolvedError(f"quadrature_A moved by {abs(ref - val):.3e} on doubling radial order")
    return val


def quadrature_A_matrix(mie: MieSet, ports: Sequence[PolarizedPort], radial_order: int = 48, angular_order: int = 64, n_phi: Optional[int] = None) -> np.ndarray:
    """All pairwise volume integrals among ``ports`` sharing one field evaluation per port."""
    n_phi = 2 * angular_order if n_phi is None else n_phi
    P = len(ports)
    if mie.eps.imag <= 0:
        return np.zeros((P, P), dtype=complex)
    fields, W = _volume_fields(mie, ports, radial_order, angular_order, n_phi)
    pref = mie.k**3 * mie.eps.imag / (4 * np.pi**2)
    out = np.empty((P, P), dtype=complex)
    for i in range(P):
        for j in range(P):
            out[i, j] = pref * pairwise_sum((W * np.sum(np.conj(fields[i]) * fields[j], axis=2)).ravel())
    return out


def direct_scattering_dyadic(mie: MieSet, N, n) -> np.ndarray:
    """Far-field scattering dyadic from the explicit vector-harmonic ``m``-sum.

    ``(4 pi i / k) sum_{n,m} [a_n (N x X_nm(N)) (n x X*_nm(n)) + b_n X_nm(N) X*_nm(n)]``.
    """
    N = np.asarray(N, dtype=float)
    n = np.asarray(n, dtype=float)
    L = mie.n_max
    XN = specfun.vector_harmonics(L, N)
    Xn = specfun.vector_harmonics(L, n)
    k = mie.k if np.isfinite(mie.k) else 1.0
    D = np.zeros((3, 3), dtype=complex)
    for l in range(1, L + 1):
        for q in range(-l, l + 1):
            xN = XN[l, L + q]
            xn = np.conj(Xn[l, L + q])
            D += mie.a[l - 1] * np.outer(np.cross(N, xN), np.cross(n, xn))
            D += mie.b[l - 1] * np.outer(xN, xn)
    return 4j * np.pi / k * D


def dyadic_s(mie: MieSet, inc: PolarizedPort, out: PolarizedPort) -> complex:
    """``s`` contracted from :func:`direct_scattering_dyadic`."""
    k = mie.k if np.isfinite(mie.k) else 1.0
    D = direct_scattering_dyadic(mie, out.dir, inc.dir)
    return complex(1j * k / (2 * np.pi) * out.pol_vector @ D @ inc.pol_vector)


# CI matrix -------------------------------------------------------------------

CI_PERMITTIVITIES = (10 + 1j, 2 + 0.2j, 4 + 0.5j)
CI_SIZES = (0.5, 1.0)
CI_WAVELENGTH_UM = 10.0


def ci_port_pairs() -> list[tuple[str, PolarizedPort, PolarizedPort]]:
    """Four fixed port pairs: diagonal, cross-polarized, counter-propagating, oblique."""
    ux, uy, uz = np.eye(3)
    obl = np.array([0.3, -0.5, 0.8])
    obl /= np.linalg.norm(obl)
    e_obl = np.cross(obl, [0.1, 0.7, 0.2])
    e_obl /= np.linalg.norm(e_obl)
    p = PolarizedPort(uz, ux, 1)
    return [
        ("diagonal", p, p),
        ("cross_pol", p, PolarizedPort(uz, uy, 2)),
        ("counter", PolarizedPort(ux, uz, 1), PolarizedPort(-ux, -uz, 1)),
        ("oblique", p, PolarizedPort(obl, e_obl, 1)),
    ]


@dataclass(frozen=True)
class Check:
    name: str
    value_fast: float
    value_oracle: float
    rel_err: float
    passed: bool

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _rel(fast: complex, ref: complex, scale: float) -> float:
    return float(abs(fast - ref) / scale) if scale > 0 else float(abs(fast - ref))


def _case_checks(eps: complex, x: float, angular_order: int, n_phi: int, radial_order: int) -> list[Check]:
    k = 2 * np.pi / CI_WAVELENGTH_UM
    mie = mie_coefficients(eps, x, "auto", k=k, radius=x / k)
    pairs = ci_port_pairs()
    ports = []
    for _, p1, p2 in pairs:
        for p in (p1, p2):
            if not any(p is q for q in ports):
                ports.append(p)
    Avol = quadrature_A_matrix(mie, ports, radial_order, angular_order, n_phi)
    index = {id(p): i for i, p in enumerate(ports)}
    tag = f"eps={eps.real:g}{eps.imag:+g}i,x={x:g}"
    checks: list[Check] = []
    for name, p1, p2 in pairs:
        S_fast = S_coefficient(mie, p1, p2)
        S_ref = quadrature_S(mie, p1, p2, angular_order, n_phi)
        scale_S = np.sqrt(abs(S_coefficient(mie, p1, p1) * S_coefficient(mie, p2, p2)))
        e = _rel(S_fast, S_ref, scale_S)
        checks.append(Check(f"quadrature_S[{tag},{name}]", float(S_fast.real), float(S_ref.real), e, bool(e < SPECTRAL_TOL)))

        A_fast = A_coefficient(mie, p1, p2)
        A_ref = Avol[index[id(p1)], index[id(p2)]]
        scale_A = np.sqrt(abs(A_coefficient(mie, p1, p1) * A_coefficient(mie, p2, p2)))
        e = _rel(A_fast, A_ref, scale_A)
        checks.append(Check(f"quadrature_A[{tag},{name}]", float(A_fast.real), float(A_ref.real), e, bool(e < VOLUME_TOL)))

        worst = 0.0
        vf = vo = 0.0
        # forward amplitude sets the scale so that exactly-zero couplings compare sensibly
        s_scale = max(abs(s_coefficient(mie, p1, p1)), abs(s_coefficient(mie, p2, p2)))
        for inc, out in ((p1, p2), (p2, p1)):
            f = s_coefficient(mie, inc, out)
            o = dyadic_s(mie, inc, out)
            scale = max(abs(f), abs(o), s_scale, 1e-300)
            if abs(f - o) / scale >= worst:
                worst, vf, vo = abs(f - o) / scale, abs(f), abs(o)
        checks.append(Check(f"dyadic[{tag},{name}]", float(vf), float(vo), float(worst), bool(worst < DYADIC_TOL)))
    return checks


def validate_matrix(
    permittivities: Sequence[complex] = CI_PERMITTIVITIES,
    sizes: Sequence[float] = CI_SIZES,
    angular_order: int = 64,
    n_phi: int = 128,
    radial_order: int = 48,
    threads: int = 1,
) -> list[Check]:
    """Run all three oracle agreements over the permittivity x size x port-pair matrix."""
    cases = [(complex(e), float(x)) for e in permittivities for x in sizes]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(lambda c: _case_checks(c[0], c[1], angular_order, n_phi, radial_order), cases))
    return [c for group in results for c in group]
