"""Command-line entry point ``mieq``.

Subcommands write CSV (sweeps) or JSON (reports) to ``--out`` or stdout.
Exit status: 0 success, 1 configuration error, 2 a validation check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import oracle
from .config import Config, ConfigError
from .geometry import (
    ScatteringGeometry,
    Triad,
    auto_triad,
    fig3_geometry,
    make_class_A,
    make_class_B,
    verify_perfect_interference,
)
from .mie import mie_coefficients, mie_set, transparent_identity_residual
from .response import A_coefficient, PolarizedPort, optical_theorem_residual
from .sweep import PROBABILITY_COLUMNS, coincidence_rows, mie_rows, mie_sweep, probability_rows
from .twophoton import GaussianProfile, make_symmetrized_spectrum, overlap_matrix

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def format_csv(header: list[str], columns: Sequence[str], rows) -> str:
    lines = list(header)
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _sets(cfg: Config, threads: int):
    lam = cfg.wavelengths()
    sets = mie_sweep(cfg.material(), float(cfg.data["sphere"]["radius_um"]), lam, cfg.n_max_policy(), threads)
    return lam, sets


def cmd_mie(cfg: Config, threads: int = 1) -> str:
    lam, sets = _sets(cfg, threads)
    rows = mie_rows(sets, lam, int(cfg.data["sweep"]["orders"]))
    cols = ("lambda_um", "n", "abs_a2", "abs_b2", "re_a_minus_a2", "re_b_minus_b2")
    return format_csv(cfg.header_lines("mie"), cols, rows)


def cmd_coincidence(cfg: Config, threads: int = 1) -> str:
    lam, sets = _sets(cfg, threads)
    header = cfg.header_lines("coincidence") + ["# geometry: counter-propagating inputs along +-x, detectors along -+y"]
    return format_csv(header, ("lambda_um", "T_oe4", "T_eo4", "ToeTeo2"), coincidence_rows(sets, lam))


def spectrum_from_config(cfg: Config, sigma: Optional[int] = None):
    sp = cfg.data["spectrum"]
    u = GaussianProfile.from_wavelength(float(sp["u"]["center_um"]), float(sp["u"]["fwhm_um"]))
    v = GaussianProfile.from_wavelength(float(sp["v"]["center_um"]), float(sp["v"]["fwhm_um"]))
    sig = int(sp["sigma"]) if sigma is None else sigma
    return make_symmetrized_spectrum(sig, cfg.weights(), u, v, n_nodes=int(sp["grid_nodes"]))


def cmd_probabilities(cfg: Config, threads: int = 1) -> str:
    sp = cfg.data["spectrum"]
    if sp["I12_12"] == "from_spectrum":
        I12 = overlap_matrix(spectrum_from_config(cfg)).I12_12
    else:
        I12 = float(sp["I12_12"])
    lam, sets = _sets(cfg, threads)
    rows = probability_rows(sets, lam, I12, float(sp["solid_angle"]))
    header = cfg.header_lines("probabilities") + [
        f"# I12_12 used: {_fmt(I12)}",
        "# *_sym: sigma = +1, *_anti: sigma = -1; values are multiplied by solid_angle^2",
    ]
    return format_csv(header, PROBABILITY_COLUMNS, rows)


def _vec(x, what: str) -> np.ndarray:
    try:
        v = np.array(x, dtype=float).reshape(3)
    except (TypeError, ValueError):
        raise ConfigError(f"geometry check: {what} must be a 3-vector") from None
    return v


def _triad_from(spec: dict, what: str) -> Triad:
    if not isinstance(spec, dict) or "dir" not in spec:
        raise ConfigError(f"geometry check: {what} needs 'dir'")
    return auto_triad(_vec(spec["dir"], f"{what}.dir"), None if spec.get("e1") is None else _vec(spec["e1"], f"{what}.e1"))


def build_geometry(chk: dict, cone_angle: float) -> ScatteringGeometry:
    kind = chk["kind"]
    try:
        if kind == "fig3":
            return fig3_geometry()
        if kind == "class_A":
            pols = chk.get("out_e1", [None, None])
            pols = [None if p is None else _vec(p, "out_e1") for p in pols]
            return make_class_A(_vec(chk["N1"], "N1"), _triad_from(chk["in1"], "in1"), pols, cone_angle)
        if kind == "class_B":
            return make_class_B(_vec(chk["N1"], "N1"), _vec(chk["N2"], "N2"), _triad_from(chk["in1"], "in1"), cone_angle)
        if "file" in chk:
            with open(chk["file"]) as fh:
                return ScatteringGeometry.from_json(fh.read())
        return ScatteringGeometry.from_json(json.dumps(chk["geometry"]))
    except KeyError as exc:
        raise ConfigError(f"geometry check '{chk.get('name', kind)}': missing field {exc.args[0]}") from None
    except (ValueError, OSError) as exc:
        raise ConfigError(f"geometry check '{chk.get('name', kind)}': {exc}") from None


def cmd_geometry_check(cfg: Config, threads: int = 1) -> tuple[str, bool]:
    g_cfg = cfg.data["geometry"]
    lam = float(g_cfg["wavelength_um"])
    mie = mie_set(cfg.material(), float(cfg.data["sphere"]["radius_um"]), lam, cfg.n_max_policy())
    sigma = int(cfg.data["spectrum"]["sigma"])
    results = []
    ok_all = True
    for i, chk in enumerate(g_cfg["checks"]):
        g = build_geometry(chk, float(g_cfg["cone_angle_rad"]))
        rep = verify_perfect_interference(
            g, mie, sigma, n_draws=int(g_cfg["draws"]), rng=np.random.default_rng(i), tol=float(g_cfg["tolerance"])
        )
        expect = chk.get("expect")
        ok = True if expect is None else (rep.class_detected == (None if expect in ("none", None) else expect))
        ok_all &= ok
        results.append(
            {"name": chk.get("name", f"check{i}"), "kind": chk["kind"], "expect": expect, "ok": ok,
             "geometry": json.loads(g.to_json()), **rep.as_dict()}
        )
    report = {"wavelength_um": lam, "sigma": sigma, "material": cfg.material().describe(), "checks": results}
    return json.dumps(report, indent=2, sort_keys=True) + "\n", ok_all


def _optical_theorem_checks() -> list[oracle.Check]:
    ux, uy, uz = np.eye(3)
    d = np.array([0.6, 0.0, 0.8])
    pairs = [
        ("diag", PolarizedPort(uz, ux, 1), PolarizedPort(uz, ux, 1)),
        ("offdiag", PolarizedPort(uz, ux, 1), PolarizedPort(d, uy, 2)),
    ]
    out = []
    for eps in (1.0, 9.0, 10 + 1j, 2 + 0.2j):
        for x in (0.3, 1.0, 3.0):
            mie = mie_coefficients(eps, x)
            for name, p1, p2 in pairs:
                r = optical_theorem_residual(mie, p1, p2)
                out.append(oracle.Check(f"optical_theorem[eps={complex(eps)},x={x:g},{name}]", r, 0.0, r, r < 1e-9))
    return out


def _transparency_checks() -> list[oracle.Check]:
    out = []
    ux, uz = np.eye(3)[0], np.eye(3)[2]
    for eps in (9.0, 2.25):
        for x in (0.5, 2.0):
            mie = mie_coefficients(eps, x)
            ra, rb = transparent_identity_residual(mie)
            worst = float(max(ra.max(), rb.max()))
            A = abs(A_coefficient(mie, PolarizedPort(uz, ux), PolarizedPort(-uz, ux)))
            v = max(worst, A)
            out.append(oracle.Check(f"lossless[eps={eps:g},x={x:g}]", v, 0.0, v, v < 1e-10))
    return out


def cmd_validate(cfg: Config, threads: int = 1) -> tuple[str, bool]:
    q = cfg.data["quadrature"]
    checks = oracle.validate_matrix(
        angular_order=int(q["angular_theta"]), n_phi=int(q["angular_phi"]), radial_order=int(q["radial"]), threads=threads
    )
    checks += _optical_theorem_checks() + _transparency_checks()
    ok = all(c.passed for c in checks)
    report = {"all_pass": ok, "quadrature": q, "checks": [c.as_dict() for c in checks]}
    return json.dumps(report, indent=2) + "\n", ok


def resolve_threads(arg: Optional[int]) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("MIEQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"MIEQ_THREADS must be an integer, got {env!r}") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mieq",
        description="Two-photon scattering observables of a lossy dielectric sphere. "
        "Scattering coefficients describe the scattered field only (no forward incident term).",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("mie", "sweep of Mie coefficient magnitudes and absorption terms"),
        ("coincidence", "sweep of |T^oe|^4, |T^eo|^4, |T^oe T^eo|^2"),
        ("probabilities", "sweep of two/one/zero scattered-particle probabilities, sigma = +-1"),
        ("geometry-check", "perfect-interference verification of configured geometries"),
        ("validate", "oracle agreement suite"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=name not in ("validate",), help="YAML configuration file")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads (default: $MIEQ_THREADS or 1)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
        cfg = Config.load(args.config)
        status = EXIT_OK
        if args.command == "mie":
            text = cmd_mie(cfg, threads)
        elif args.command == "coincidence":
            text = cmd_coincidence(cfg, threads)
        elif args.command == "probabilities":
            text = cmd_probabilities(cfg, threads)
        elif args.command == "geometry-check":
            text, ok = cmd_geometry_check(cfg, threads)
            status = EXIT_OK if ok else EXIT_VALIDATION
        else:
            text, ok = cmd_validate(cfg, threads)
            status = EXIT_OK if ok else EXIT_VALIDATION
    except ConfigError as exc:
        print(f"mieq: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OverflowError) as exc:
        print(f"mieq: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
