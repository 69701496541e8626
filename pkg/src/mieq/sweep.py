"""Wavelength sweeps and simple spectral-feature extraction."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .material import MaterialModel, assert_passive
from .mie import MieSet, absorption_terms, mie_set
from .twophoton import fig3_probabilities, l_k_pm, t_oe_eo


def map_ordered(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; output order is input order."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def mie_sweep(model: MaterialModel, radius_um: float, wavelengths, n_max_policy="auto", threads: int = 1) -> list[MieSet]:
    assert_passive(model, wavelengths)
    return map_ordered(lambda lam: mie_set(model, radius_um, float(lam), n_max_policy), list(wavelengths), threads)


def mie_rows(sets: Sequence[MieSet], wavelengths, orders: int) -> list[tuple]:
    """``(lambda_um, n, |a_n|^2, |b_n|^2, Re a_n - |a_n|^2, Re b_n - |b_n|^2)``, zero past ``n_max``."""
    rows = []
    for lam, s in zip(wavelengths, sets):
        ta, tb = absorption_terms(s)
        for n in range(1, orders + 1):
            if n <= s.n_max:
                i = n - 1
                rows.append((float(lam), n, abs(s.a[i]) ** 2, abs(s.b[i]) ** 2, ta[i], tb[i]))
            else:
                rows.append((float(lam), n, 0.0, 0.0, 0.0, 0.0))
    return rows


def coincidence_rows(sets: Sequence[MieSet], wavelengths) -> list[tuple]:
    """``(lambda_um, |T^oe|^4, |T^eo|^4, |T^oe T^eo|^2)``."""
    rows = []
    for lam, s in zip(wavelengths, sets):
        toe, teo = t_oe_eo(s)
        rows.append((float(lam), abs(toe) ** 4, abs(teo) ** 4, abs(toe * teo) ** 2))
    return rows


PROBABILITY_COLUMNS = ("lambda_um", "p2s_sym", "p2s_anti", "p1s_sym", "p1s_anti", "p0s_sym", "p0s_anti")


def probability_rows(sets: Sequence[MieSet], wavelengths, I12: float, solid_angle: float = 1.0) -> list[tuple]:
    """Counter-propagating-geometry probabilities for both spectral symmetries."""
    f = solid_angle**2
    rows = []
    for lam, s in zip(wavelengths, sets):
        L = l_k_pm(s)
        plus = fig3_probabilities(L, 1, I12)
        minus = fig3_probabilities(L, -1, I12)
        rows.append(
            (
                float(lam),
                f * plus.p2s,
                f * minus.p2s,
                f * plus.p1s,
                f * minus.p1s,
                f * plus.p0s,
                f * minus.p0s,
            )
        )
    return rows


# feature extraction ---------------------------------------------------------


def local_maxima(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    return np.nonzero((y[1:-1] >= y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1


def fundamental_peak(wavelengths, y) -> float:
    """Wavelength of the longest-wavelength local maximum (the lowest-frequency resonance)."""
    lam = np.asarray(wavelengths)
    idx = local_maxima(np.asarray(y))
    if idx.size == 0:
        return float("nan")
    return float(lam[idx[np.argmax(lam[idx])]])


def dip_to_peak(wavelengths, y, center: float, half_width: float) -> tuple[float, float]:
    """``min/max`` of ``y`` in ``[center - half_width, center + half_width]`` and the dip wavelength."""
    lam = np.asarray(wavelengths)
    y = np.asarray(y)
    win = np.abs(lam - center) <= half_width
    if not np.any(win):
        raise ValueError("empty window")
    yw = y[win]
    return float(yw.min() / yw.max()), float(lam[win][np.argmin(yw)])


def peak_to_background(wavelengths, y, at: float) -> float:
    """Value at ``at`` divided by the median over the sweep."""
    lam = np.asarray(wavelengths)
    y = np.asarray(y)
    i = int(np.argmin(np.abs(lam - at)))
    return float(y[i] / np.median(y))
