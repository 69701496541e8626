"""Permittivity models and wavenumbers.

Lengths are in micrometres throughout the package; angular frequencies in
rad/s.  Wavenumbers are therefore in rad/um.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

C_LIGHT = 299_792_458.0  # m/s
UM = 1e-6


def omega_from_wavelength(wavelength_um: float) -> float:
    """Angular frequency (rad/s) of a vacuum wavelength given in micrometres."""
    return 2.0 * np.pi * C_LIGHT / (wavelength_um * UM)


def wavelength_from_omega(omega: float) -> float:
    """Vacuum wavelength in micrometres for an angular frequency in rad/s."""
    return 2.0 * np.pi * C_LIGHT / omega / UM


@dataclass(frozen=True)
class ConstantPermittivity:
    """Frequency-independent permittivity."""

    eps: complex

    def __post_init__(self):
        if complex(self.eps).imag < 0:
            raise ValueError(f"passivity requires Im(eps) >= 0, got {self.eps}")

    def permittivity(self, wavelength_um: float) -> complex:
        return complex(self.eps)

    def describe(self) -> dict:
        e = complex(self.eps)
        return {"kind": "constant", "eps": [e.real, e.imag]}


@dataclass(frozen=True)
class DrudeLorentz:
    """Single-oscillator model ``eps = 1 + wp^2 / (w0^2 - w^2 - i w gamma)``.

    Parameters are angular frequencies in rad/s.
    """

    omega_p: float
    omega_0: float
    gamma: float

    def __post_init__(self):
        for name in ("omega_p", "omega_0", "gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    def permittivity(self, wavelength_um: float) -> complex:
        w = omega_from_wavelength(wavelength_um)
        return 1.0 + self.omega_p**2 / (self.omega_0**2 - w * w - 1j * w * self.gamma)

    def describe(self) -> dict:
        return {
            "kind": "drude_lorentz",
            "omega_p": self.omega_p,
            "omega_0": self.omega_0,
            "gamma": self.gamma,
        }


@dataclass(frozen=True)
class TabulatedPermittivity:
    """Permittivity sampled on a vacuum-wavelength grid, linearly interpolated.

    Real and imaginary parts are interpolated independently.  The grid may be
    given in either order but must be strictly monotone.
    """

    wavelength_um: np.ndarray
    eps: np.ndarray
    source: str = ""
    _order: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.wavelength_um, dtype=float)
        eps = np.asarray(self.eps, dtype=complex)
        if lam.ndim != 1 or lam.size < 2 or eps.shape != lam.shape:
            raise ValueError("need at least two (wavelength, eps) samples")
        diff = np.diff(lam)
        if not (np.all(diff > 0) or np.all(diff < 0)):
            raise ValueError("tabulated wavelength grid must be strictly monotone")
        if np.any(eps.imag < 0):
            raise ValueError("tabulated permittivity violates passivity (Im eps < 0)")
        object.__setattr__(self, "wavelength_um", lam)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "_order", np.argsort(lam))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TabulatedPermittivity":
        """Read ``wavelength_um, eps_real[, eps_imag]`` rows; ``#`` starts a comment."""
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if len(vals) == 2:
                vals.append(0.0)
            rows.append(vals)
        if not rows:
            raise ValueError(f"{path}: no data rows")
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], source=str(path))

    def permittivity(self, wavelength_um: float) -> complex:
        lam = self.wavelength_um[self._order]
        if not lam[0] <= wavelength_um <= lam[-1]:
            raise ValueError(
                f"wavelength {wavelength_um} um outside tabulated range [{lam[0]}, {lam[-1]}]"
            )
        eps = self.eps[self._order]
        re = np.interp(wavelength_um, lam, eps.real)
        im = np.interp(wavelength_um, lam, eps.imag)
        return complex(re, im)

    def describe(self) -> dict:
        return {"kind": "tabulated", "file": self.source, "interpolation": "linear re/im"}


MaterialModel = Union[ConstantPermittivity, DrudeLorentz, TabulatedPermittivity]


def permittivity(model: MaterialModel, wavelength_um: float) -> complex:
    """Relative permittivity of ``model`` at a vacuum wavelength (um)."""
    if not wavelength_um > 0:
        raise ValueError("wavelength must be > 0")
    return model.permittivity(wavelength_um)


@dataclass(frozen=True)
class Wavenumbers:
    k: float
    k_V: complex


def wavenumber_in_medium(k: float, eps: complex) -> complex:
    """``k sqrt(eps)`` on the branch with ``Im >= 0``."""
    eps = complex(eps)
    if eps.imag == 0.0:
        eps = complex(eps.real, 0.0)  # drop a negative zero
    kv = k * np.sqrt(eps)
    if kv.imag < 0:
        kv = -kv
    return complex(kv)


def wavenumbers(model: MaterialModel, wavelength_um: float) -> Wavenumbers:
    """Vacuum and interior wavenumbers (rad/um) at a vacuum wavelength."""
    k = 2.0 * np.pi / wavelength_um
    return Wavenumbers(k=k, k_V=wavenumber_in_medium(k, permittivity(model, wavelength_um)))


def assert_passive(model: MaterialModel, wavelengths_um) -> None:
    """Raise if ``Im eps < 0`` anywhere on the given wavelengths."""
    for lam in np.atleast_1d(wavelengths_um):
        eps = permittivity(model, float(lam))
        if eps.imag < 0:
            raise ValueError(f"passivity violated at {lam} um: eps = {eps}")
