"""YAML run configuration with defaults and line-aware validation errors."""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .material import ConstantPermittivity, DrudeLorentz, MaterialModel, TabulatedPermittivity

# Drude-Lorentz parameters chosen so that, for a 1 um sphere, the fundamental
# |a_1|^2 and |b_1|^2 resonances sit near 12.6 um and 18.1 um.
DEFAULT_DRUDE_LORENTZ = {"omega_p": 1.665e16, "omega_0": 1.88e15, "gamma": 5.6e13}
FIG4_LAMBDA_1_UM = 12.6
FIG4_LAMBDA_2_UM = 18.1

DEFAULTS: dict[str, Any] = {
    "material": {"kind": "drude_lorentz", **DEFAULT_DRUDE_LORENTZ},
    "sphere": {"radius_um": 1.0, "n_max": "auto"},
    "sweep": {"lambda_min_um": 3.0, "lambda_max_um": 20.0, "points": 1700, "orders": 3},
    "spectrum": {
        "sigma": 1,
        "weights": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        "u": {"family": "gaussian", "center_um": 12.6, "fwhm_um": 0.05},
        "v": {"family": "gaussian", "center_um": 12.6, "fwhm_um": 0.05},
        "grid_nodes": 64,
        "I12_12": 0.0,
        "solid_angle": 1.0,
    },
    "geometry": {
        "wavelength_um": 12.6,
        "draws": 16,
        "cone_angle_rad": 1e-6,
        "tolerance": 1e-10,
        "checks": [{"name": "fig3", "kind": "fig3", "expect": "A"}],
    },
    "quadrature": {"angular_theta": 64, "angular_phi": 128, "radial": 48},
    "validate": {"wavelength_um": 10.0},
}

_KINDS = {"constant", "drude_lorentz", "tabulated"}


class ConfigError(ValueError):
    """Invalid configuration; the message carries the file and line where known."""


def _line_index(node, prefix=(), out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = prefix + (k.value,)
            out[path] = k.start_mark.line + 1
            _line_index(v, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out[prefix + (i,)] = v.start_mark.line + 1
            _line_index(v, prefix + (i,), out)
    return out


def _merge(base: dict, over: dict, lines: dict, src: str, path=()) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        p = path + (k,)
        if k not in base:
            raise ConfigError(f"{src}:{lines.get(p, '?')}: unknown key '{'.'.join(map(str, p))}'")
        if isinstance(base[k], dict) and k != "material":
            if not isinstance(v, dict):
                raise ConfigError(f"{src}:{lines.get(p, '?')}: section '{'.'.join(map(str, p))}' must be a mapping")
            out[k] = _merge(base[k], v, lines, src, p)
        else:
            out[k] = v
    return out


class Config:
    """Resolved configuration: defaults overlaid by the file contents."""

    def __init__(self, data: dict, lines: Optional[dict] = None, source: str = "<defaults>"):
        self.data = data
        self.lines = lines or {}
        self.source = source
        self._validate()

    @classmethod
    def load(cls, path: Optional[str]) -> "Config":
        if path is None:
            return cls(copy.deepcopy(DEFAULTS))
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            node = yaml.compose(text)
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: YAML error: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}:1: top level must be a mapping")
        lines = _line_index(node) if node is not None else {}
        data = _merge(DEFAULTS, raw, lines, str(path))
        if "material" in raw:
            mat = raw["material"]
            if not isinstance(mat, dict):
                raise ConfigError(f"{path}:{lines.get(('material',), '?')}: material must be a mapping")
            if mat.get("kind", "drude_lorentz") == "drude_lorentz":
                data["material"] = {"kind": "drude_lorentz", **DEFAULT_DRUDE_LORENTZ, **mat}
            else:
                data["material"] = dict(mat)
        return cls(data, lines, str(path))

    def _err(self, path: tuple, msg: str) -> ConfigError:
        return ConfigError(f"{self.source}:{self.lines.get(path, '?')}: {'.'.join(map(str, path))}: {msg}")

    def _number(self, path: tuple, positive=True, integer=False):
        d: Any = self.data
        for k in path:
            d = d[k]
        if isinstance(d, bool) or not isinstance(d, (int, float)):
            raise self._err(path, f"expected a number, got {d!r}")
        if integer and int(d) != d:
            raise self._err(path, f"expected an integer, got {d!r}")
        if positive and not d > 0:
            raise self._err(path, f"must be > 0, got {d!r}")
        return d

    def _validate(self):
        mat = self.data["material"]
        kind = mat.get("kind")
        if kind not in _KINDS:
            raise self._err(("material", "kind"), f"must be one of {sorted(_KINDS)}")
        if kind == "drude_lorentz":
            for k in ("omega_p", "omega_0", "gamma"):
                if k not in mat:
                    raise self._err(("material",), f"missing {k}")
                self._number(("material", k))
        elif kind == "constant":
            e = mat.get("eps")
            if not (isinstance(e, list) and len(e) == 2) and not isinstance(e, (int, float)):
                raise self._err(("material", "eps"), "expected a number or [re, im]")
        else:
            if "file" not in mat:
                raise self._err(("material",), "tabulated material needs 'file'")
        self._number(("sphere", "radius_um"))
        nm = self.data["sphere"]["n_max"]
        if nm != "auto" and not (isinstance(nm, int) and nm >= 1):
            raise self._err(("sphere", "n_max"), "must be 'auto' or a positive integer")
        for k in ("lambda_min_um", "lambda_max_um"):
            self._number(("sweep", k))
        self._number(("sweep", "points"), integer=True)
        self._number(("sweep", "orders"), integer=True)
        if self.data["sweep"]["lambda_max_um"] < self.data["sweep"]["lambda_min_um"]:
            raise self._err(("sweep", "lambda_max_um"), "must be >= lambda_min_um")
        sp = self.data["spectrum"]
        if sp["sigma"] not in (1, -1):
            raise self._err(("spectrum", "sigma"), "must be +1 or -1")
        self.weights()
        for prof in ("u", "v"):
            pr = sp[prof]
            if not isinstance(pr, dict) or pr.get("family") != "gaussian":
                raise self._err(("spectrum", prof), "only the 'gaussian' family is supported")
            for k in ("center_um", "fwhm_um"):
                if k not in pr:
                    raise self._err(("spectrum", prof), f"missing {k}")
                self._number(("spectrum", prof, k))
        self._number(("spectrum", "grid_nodes"), integer=True)
        I12 = sp["I12_12"]
        if I12 != "from_spectrum":
            v = self._number(("spectrum", "I12_12"), positive=False)
            if not 0.0 <= v <= 0.5:
                raise self._err(("spectrum", "I12_12"), "must lie in [0, 0.5] or be 'from_spectrum'")
        self._number(("spectrum", "solid_angle"))
        for k in ("angular_theta", "angular_phi", "radial"):
            self._number(("quadrature", k), integer=True)
        self._number(("geometry", "wavelength_um"))
        self._number(("geometry", "draws"), integer=True)
        if not isinstance(self.data["geometry"]["checks"], list):
            raise self._err(("geometry", "checks"), "must be a list")
        for i, chk in enumerate(self.data["geometry"]["checks"]):
            if not isinstance(chk, dict) or chk.get("kind") not in ("fig3", "class_A", "class_B", "explicit"):
                raise self._err(("geometry", "checks", i), "kind must be fig3, class_A, class_B or explicit")

    # typed accessors -------------------------------------------------------

    def material(self) -> MaterialModel:
        m = self.data["material"]
        if m["kind"] == "drude_lorentz":
            return DrudeLorentz(float(m["omega_p"]), float(m["omega_0"]), float(m["gamma"]))
        if m["kind"] == "constant":
            e = m["eps"]
            eps = complex(e[0], e[1]) if isinstance(e, list) else complex(e)
            try:
                return ConstantPermittivity(eps)
            except ValueError as exc:
                raise self._err(("material", "eps"), str(exc)) from None
        f = Path(m["file"])
        if not f.is_absolute() and self.source not in ("<defaults>",):
            f = Path(self.source).parent / f
        try:
            return TabulatedPermittivity.from_file(f)
        except (OSError, ValueError) as exc:
            raise self._err(("material", "file"), str(exc)) from None

    def weights(self) -> np.ndarray:
        w = self.data["spectrum"]["weights"]
        try:
            arr = np.array(w, dtype=float)
            if arr.shape != (2, 2, 2):
                raise ValueError
        except (ValueError, TypeError):
            raise self._err(("spectrum", "weights"), "expected a 2x2 matrix of [re, im] pairs") from None
        return arr[..., 0] + 1j * arr[..., 1]

    def wavelengths(self) -> np.ndarray:
        s = self.data["sweep"]
        return np.linspace(float(s["lambda_min_um"]), float(s["lambda_max_um"]), int(s["points"]))

    def n_max_policy(self):
        return self.data["sphere"]["n_max"]

    def header_lines(self, command: str) -> list[str]:
        """Comment lines echoing the fully resolved configuration."""
        body = yaml.safe_dump(self.data, sort_keys=True, default_flow_style=None, width=100)
        out = [f"# mieq {command}", f"# config source: {self.source}", "# resolved config:"]
        out += ["#   " + ln for ln in body.rstrip().splitlines()]
        return out
