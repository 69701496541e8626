"""Quadrature rules on the unit sphere and the ball."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class SphereRule:
    """Nodes (unit vectors) and weights for integrals over solid angle."""

    dirs: np.ndarray  # (M, 3)
    weights: np.ndarray  # (M,)
    n_theta: int
    n_phi: int


def sphere_rule(n_theta: int = 64, n_phi: int = 128) -> SphereRule:
    """Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in ``phi``.

    Exact for spherical polynomials of degree ``< min(2 n_theta, n_phi)``.
    """
    if n_theta < 1 or n_phi < 1:
        raise ValueError("quadrature orders must be >= 1")
    x, w = leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - x * x)
    dirs = np.stack(
        [
            st[:, None] * np.cos(phi)[None, :],
            st[:, None] * np.sin(phi)[None, :],
            np.broadcast_to(x[:, None], (n_theta, n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.repeat(w * (2.0 * np.pi / n_phi), n_phi)
    return SphereRule(dirs=dirs, weights=weights, n_theta=n_theta, n_phi=n_phi)


def radial_rule(radius: float, n_r: int = 48) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on ``(0, radius)`` with the ``r^2`` Jacobian folded into the weights."""
    x, w = leggauss(n_r)
    r = 0.5 * radius * (x + 1.0)
    return r, 0.5 * radius * w * r * r


def pairwise_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum along ``axis`` by recursive halving, independent of thread scheduling."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            v = np.concatenate([v[:-2], (v[-2] + v[-1])[None]], axis=0)
        else:
            v = v[0::2] + v[1::2]
    return v[0]
