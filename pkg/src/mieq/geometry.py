"""Scattering geometries and the two perfect-interference constructions.

A geometry is four orthonormal triads: two ingoing ports ``in1, in2`` and
two outgoing ports ``out1, out2``.  Polarization index ``lambda = 1, 2``
selects ``e1`` or ``e2`` of a triad.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .mie import MieSet
from .response import PolarizedPort, s_coefficient

ORTHO_TOL = 1e-12
DEFAULT_CONE_ANGLE = 1e-6


def _as_vec(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(3)


def _normalize(v) -> np.ndarray:
    v = _as_vec(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class Triad:
    """Direction with two real orthonormal transverse polarization vectors."""

    dir: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        vecs = [_as_vec(getattr(self, k)) for k in ("dir", "e1", "e2")]
        G = np.array(vecs) @ np.array(vecs).T
        if np.abs(G - np.eye(3)).max() > 1e-10:
            raise ValueError(f"triad is not orthonormal (Gram deviation {np.abs(G - np.eye(3)).max():.2e})")
        for k, v in zip(("dir", "e1", "e2"), vecs):
            object.__setattr__(self, k, v)

    @property
    def handedness(self) -> int:
        """+1 if ``e1 x e2 = dir``, -1 if ``e1 x e2 = -dir``."""
        return 1 if np.cross(self.e1, self.e2) @ self.dir > 0 else -1

    def pol(self, lam: int) -> np.ndarray:
        if lam == 1:
            return self.e1
        if lam == 2:
            return self.e2
        raise ValueError("polarization index must be 1 or 2")

    def port(self, lam: int) -> PolarizedPort:
        return PolarizedPort(self.dir, self.pol(lam), lam)

    def transformed(self, R: np.ndarray) -> "Triad":
        return Triad(R @ self.dir, R @ self.e1, R @ self.e2)

    def orthonormality_error(self) -> float:
        M = np.array([self.dir, self.e1, self.e2])
        return float(np.abs(M @ M.T - np.eye(3)).max())


def auto_triad(direction, e1=None) -> Triad:
    """Triad around ``direction``.

    Without ``e1`` the basis is ``e1 = normalize(z x dir)`` (falling back to
    ``x x dir`` when ``dir`` is along ``z``) and ``e2 = dir x e1``.  A given
    ``e1`` is projected onto the transverse plane first.
    """
    d = _normalize(direction)
    if e1 is None:
        c = np.cross([0.0, 0.0, 1.0], d)
        if np.linalg.norm(c) < 1e-12:
            c = np.cross([1.0, 0.0, 0.0], d)
        e1v = _normalize(c)
    else:
        e1v = _as_vec(e1)
        e1v = _normalize(e1v - (e1v @ d) * d)
    e2v = np.cross(d, e1v)
    return Triad(d, e1v, e2v)


@dataclass(frozen=True)
class ScatteringGeometry:
    in1: Triad
    in2: Triad
    out1: Triad
    out2: Triad

    def __post_init__(self):
        if np.linalg.norm(self.in1.dir - self.in2.dir) < 1e-12:
            raise ValueError("ingoing directions must differ")

    @property
    def triads(self) -> dict:
        return {"in1": self.in1, "in2": self.in2, "out1": self.out1, "out2": self.out2}

    def ins(self) -> tuple[Triad, Triad]:
        return self.in1, self.in2

    def outs(self) -> tuple[Triad, Triad]:
        return self.out1, self.out2

    def s_matrix(self, mie: MieSet) -> np.ndarray:
        """``s[j, lam, i, Lam]`` from ``in_j`` polarization ``lam`` to ``out_i`` polarization ``Lam`` (0-based)."""
        out = np.empty((2, 2, 2, 2), dtype=complex)
        for j, tin in enumerate(self.ins()):
            for lam in (1, 2):
                for i, tout in enumerate(self.outs()):
                    for Lam in (1, 2):
                        out[j, lam - 1, i, Lam - 1] = s_coefficient(mie, tin.port(lam), tout.port(Lam))
        return out

    def to_json(self) -> str:
        d = {}
        for name, t in self.triads.items():
            for k in ("dir", "e1", "e2"):
                d[f"{name}.{k}"] = [float(f"{x:.17g}") for x in getattr(t, k)]
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScatteringGeometry":
        d = json.loads(text)
        tri = {}
        for name in ("in1", "in2", "out1", "out2"):
            try:
                tri[name] = Triad(*(np.array(d[f"{name}.{k}"], dtype=float) for k in ("dir", "e1", "e2")))
            except KeyError as exc:
                raise ValueError(f"missing geometry field {exc.args[0]}") from None
        return cls(**tri)


def check_orthogonal(R, tol: float = 1e-12) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or np.abs(R.T @ R - np.eye(3)).max() > tol:
        raise ValueError("transform is not orthogonal")
    return R


def rotate_geometry(g: ScatteringGeometry, R) -> ScatteringGeometry:
    """Apply an orthogonal (proper or improper) transform to every vector."""
    R = check_orthogonal(R)
    return ScatteringGeometry(*(t.transformed(R) for t in (g.in1, g.in2, g.out1, g.out2)))


def random_orthogonal(rng: np.random.Generator, improper: Optional[bool] = None) -> np.ndarray:
    """Haar-random element of O(3); ``improper`` forces the determinant sign."""
    Q, Rm = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(Rm))
    if improper is None:
        improper = bool(rng.integers(2))
    if (np.linalg.det(Q) < 0) != improper:
        Q[:, 0] = -Q[:, 0]
    return Q


def _check_cones(in1: Triad, in2: Triad, min_angle: float):
    ang = np.arccos(np.clip(in1.dir @ in2.dir, -1.0, 1.0))
    if ang <= min_angle:
        raise ValueError(f"ingoing directions separated by {ang:.3g} rad; cones overlap")


def make_class_A(N1, in1: Triad, out_pols: Sequence = (None, None), min_angle: float = DEFAULT_CONE_ANGLE) -> ScatteringGeometry:
    """Detectors at ``N1`` and ``-N1``; second input is ``in1`` rotated by pi about ``N1``.

    ``out_pols`` gives optional ``e1`` vectors for the two outgoing triads;
    ``None`` selects the automatic basis.
    """
    N1 = _normalize(N1)
    R = -np.eye(3) + 2.0 * np.outer(N1, N1)
    in2 = in1.transformed(R)
    _check_cones(in1, in2, min_angle)
    out1 = auto_triad(N1, out_pols[0])
    out2 = auto_triad(-N1, out_pols[1])
    return ScatteringGeometry(in1, in2, out1, out2)


def make_class_B(N1, N2, in1: Triad, min_angle: float = DEFAULT_CONE_ANGLE) -> ScatteringGeometry:
    """Detectors at arbitrary ``N1, N2``; second input is the mirror image of ``in1`` in their plane.

    Outgoing ``e1`` is the plane normal ``e``, ``e2 = N x e``.
    """
    N1 = _normalize(N1)
    N2 = _normalize(N2)
    c = np.cross(N1, N2)
    if np.linalg.norm(c) < 1e-9:
        raise ValueError("N1 and N2 are parallel; the detector plane is undefined")
    e = c / np.linalg.norm(c)
    W = np.eye(3) - 2.0 * np.outer(e, e)
    in2 = in1.transformed(W)
    _check_cones(in1, in2, min_angle)
    out1 = Triad(N1, e, np.cross(N1, e))
    out2 = Triad(N2, e, np.cross(N2, e))
    return ScatteringGeometry(in1, in2, out1, out2)


def fig3_geometry() -> ScatteringGeometry:
    """Counter-propagating inputs along ``+-x``, detectors along ``-+y``."""
    ux, uy, uz = np.eye(3)
    return ScatteringGeometry(
        in1=Triad(ux, uz, -uy),
        in2=Triad(-ux, -uz, -uy),
        out1=Triad(-uy, uz, -ux),
        out2=Triad(uy, uz, ux),
    )


@dataclass(frozen=True)
class InterferenceReport:
    class_detected: Optional[str]
    signs: np.ndarray  # (2, 2) fitted sign per (Lambda1, Lambda2), 0 if undetermined
    max_violation: float  # worst relative violation of the detected (or best) pattern
    violation_A: float
    violation_B: float
    factors: np.ndarray  # (1 + sigma * sign)^2 per (Lambda1, Lambda2)

    def as_dict(self) -> dict:
        return {
            "class_detected": self.class_detected,
            "signs": self.signs.astype(int).tolist(),
            "max_violation": self.max_violation,
            "violation_A": self.violation_A,
            "violation_B": self.violation_B,
            "interference_factors": self.factors.tolist(),
        }


def path_amplitudes(s: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Direct and exchange path sums for a 2x2 spectrum value ``phi[lam1, lam2]``.

    Returns ``(D, E)`` indexed ``[Lambda1, Lambda2]`` with
    ``D = sum phi s(in1 lam1 -> out1 Lam1) s(in2 lam2 -> out2 Lam2)`` and
    ``E = sum phi s(in1 lam2 -> out2 Lam2) s(in2 lam1 -> out1 Lam1)``.
    """
    D = np.einsum("ab,aL,bM->LM", phi, s[0, :, 0, :], s[1, :, 1, :])
    E = np.einsum("ab,bM,aL->LM", phi, s[0, :, 1, :], s[1, :, 0, :])
    return D, E


def verify_perfect_interference(
    g: ScatteringGeometry,
    mie: MieSet,
    sigma: int = 1,
    n_draws: int = 16,
    rng: Optional[np.random.Generator] = None,
    tol: float = 1e-10,
) -> InterferenceReport:
    """Test whether the exchange path equals +-(direct path) for random spectra.

    Violations are relative to the largest path amplitude involved.  Class A
    means the sign is +1 for every detected polarization pair, class B means
    it is ``2 delta(Lambda1, Lambda2) - 1``.
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    rng = np.random.default_rng(0) if rng is None else rng
    s = g.s_matrix(mie)
    signB = np.array([[1.0, -1.0], [-1.0, 1.0]])
    vA = vB = 0.0
    num_plus = np.zeros((2, 2))
    num_minus = np.zeros((2, 2))
    for _ in range(n_draws):
        phi = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        D, E = path_amplitudes(s, phi)
        scale = max(np.abs(D).max(), np.abs(E).max())
        if scale == 0:
            continue
        vA = max(vA, np.abs(E - D).max() / scale)
        vB = max(vB, np.abs(E - signB * D).max() / scale)
        num_plus += np.abs(E - D) / scale
        num_minus += np.abs(E + D) / scale
    signs = np.where(num_plus <= num_minus, 1.0, -1.0)
    if vA < tol:
        cls, worst, signs = "A", vA, np.ones((2, 2))
    elif vB < tol:
        cls, worst, signs = "B", vB, signB
    else:
        cls, worst = None, min(vA, vB)
    factors = (1.0 + sigma * signs) ** 2
    return InterferenceReport(cls, signs, float(worst), float(vA), float(vB), factors)
