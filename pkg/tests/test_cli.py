import csv
import io
import json

import numpy as np
import pytest

from mieq import cli
from mieq.config import DEFAULTS, Config, ConfigError


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def table(text):
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(rows))))


VACUUM = "material: {kind: constant, eps: 1.0}\nsweep: {points: 5}\n"
LOSSLESS = "material: {kind: constant, eps: [9.0, 0.0]}\nsweep: {points: 7}\n"


class TestConfig:
    def test_defaults(self):
        cfg = Config.load(None)
        assert cfg.data == DEFAULTS
        assert cfg.wavelengths().size == 1700
        np.testing.assert_array_equal(cfg.weights(), np.eye(2))

    def test_unknown_key_reports_line(self, tmp_path):
        p = write(tmp_path, "sphere:\n  radius_um: 1.0\n  colour: red\n")
        with pytest.raises(ConfigError, match=r"run.yaml:3: unknown key 'sphere.colour'"):
            Config.load(p)

    @pytest.mark.parametrize(
        "text,match",
        [
            ("sphere: {radius_um: -1}\n", "radius_um"),
            ("spectrum: {sigma: 2}\n", "sigma"),
            ("spectrum: {I12_12: 0.9}\n", "I12_12"),
            ("material: {kind: plasma}\n", "kind"),
            ("material: {kind: tabulated}\n", "file"),
            ("spectrum: {weights: [1, 2]}\n", "weights"),
            ("sweep: {lambda_min_um: 5, lambda_max_um: 4}\n", "lambda_max_um"),
            ("sweep: [1, 2]\n", "mapping"),
            ("geometry: {checks: [{kind: spiral}]}\n", "kind"),
            ("[1, 2]\n", "mapping"),
            ("sweep: {points: 2\n", "YAML"),
        ],
    )
    def test_invalid(self, tmp_path, text, match):
        with pytest.raises(ConfigError, match=match):
            Config.load(write(tmp_path, text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            Config.load(str(tmp_path / "absent.yaml"))

    def test_tabulated_relative_path(self, tmp_path):
        (tmp_path / "eps.txt").write_text("1 4 0.1\n30 4 0.1\n")
        cfg = Config.load(write(tmp_path, "material: {kind: tabulated, file: eps.txt}\n"))
        assert cfg.material().permittivity(10.0) == pytest.approx(4 + 0.1j)

    def test_partial_material_override(self, tmp_path):
        cfg = Config.load(write(tmp_path, "material: {gamma: 1.0e+14}\n"))
        assert cfg.material().gamma == 1e14
        assert cfg.material().omega_0 == DEFAULTS["material"]["omega_0"]

    def test_header_echoes_config(self):
        lines = Config.load(None).header_lines("mie")
        assert lines[0] == "# mieq mie"
        assert any("omega_p" in ln for ln in lines)
        assert all(ln.startswith("#") for ln in lines)


class TestCommands:
    def test_mie_vacuum_zero(self, tmp_path):
        out = tmp_path / "mie.csv"
        assert cli.main(["mie", "--config", write(tmp_path, VACUUM), "--out", str(out)]) == 0
        rows = table(out.read_text())
        assert len(rows) == 5 * 3
        for r in rows:
            assert all(float(r[c]) == 0.0 for c in ("abs_a2", "abs_b2", "re_a_minus_a2", "re_b_minus_b2"))

    def test_mie_higher_orders_small(self, tmp_path, capsys):
        assert cli.main(["mie", "--config", write(tmp_path, "sweep: {points: 35}\n")]) == 0
        rows = table(capsys.readouterr().out)
        def peak(n, lo):
            return max(
                float(r["abs_a2"]) + float(r["abs_b2"]) for r in rows if r["n"] == str(n) and float(r["lambda_um"]) >= lo
            )

        assert peak(3, 3.0) < 0.1 * min(peak(1, 3.0), peak(2, 3.0))
        # around the two marked wavelengths the octupole is negligible
        assert peak(3, 10.0) < 1e-4 * min(peak(1, 10.0), peak(2, 10.0))

    def test_coincidence_vacuum_zero(self, tmp_path, capsys):
        assert cli.main(["coincidence", "--config", write(tmp_path, VACUUM)]) == 0
        rows = table(capsys.readouterr().out)
        assert list(rows[0]) == ["lambda_um", "T_oe4", "T_eo4", "ToeTeo2"]
        assert all(float(v) == 0.0 for r in rows for k, v in r.items() if k != "lambda_um")

    def test_probabilities_lossless(self, tmp_path, capsys):
        assert cli.main(["probabilities", "--config", write(tmp_path, LOSSLESS)]) == 0
        rows = table(capsys.readouterr().out)
        for r in rows:
            for c in ("p1s_sym", "p1s_anti", "p0s_sym", "p0s_anti"):
                assert abs(float(r[c])) < 1e-12
            assert float(r["p2s_sym"]) > 0

    def test_probabilities_from_spectrum_and_solid_angle(self, tmp_path, capsys):
        base = "sweep: {points: 3}\n"
        cli.main(["probabilities", "--config", write(tmp_path, base)])
        ref = table(capsys.readouterr().out)
        text = base + "spectrum: {I12_12: from_spectrum, solid_angle: 0.1}\n"
        cli.main(["probabilities", "--config", write(tmp_path, text, "b.yaml")])
        out = capsys.readouterr().out
        assert "# I12_12 used: 0" in out
        for a, b in zip(ref, table(out)):
            assert float(b["p2s_sym"]) == pytest.approx(0.01 * float(a["p2s_sym"]), rel=1e-14)

    def test_deterministic_with_threads(self, tmp_path, monkeypatch):
        p = write(tmp_path, "sweep: {points: 40}\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["probabilities", "--config", p, "--out", str(a), "--threads", "1"])
        monkeypatch.setenv("MIEQ_THREADS", "3")
        cli.main(["probabilities", "--config", p, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_seventeen_digits(self, tmp_path, capsys):
        cli.main(["coincidence", "--config", write(tmp_path, "sweep: {points: 3}\n")])
        rows = table(capsys.readouterr().out)
        v = rows[1]["T_oe4"]
        assert float(f"{float(v):.17g}") == float(v)

    def test_geometry_check(self, tmp_path):
        text = """
geometry:
  checks:
    - {name: f3, kind: fig3, expect: A}
    - {name: a, kind: class_A, N1: [0.3, 0.5, 0.8], in1: {dir: [0, 0, 1]}, out_e1: [[1, 0, 0], null], expect: A}
    - {name: b, kind: class_B, N1: [0.3, 0.5, 0.8], N2: [-0.6, 0.1, 0.2], in1: {dir: [0, 0, 1], e1: [1, 1, 0]}, expect: B}
"""
        out = tmp_path / "g.json"
        assert cli.main(["geometry-check", "--config", write(tmp_path, text), "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert [c["class_detected"] for c in rep["checks"]] == ["A", "A", "B"]
        assert rep["checks"][2]["interference_factors"] == [[4.0, 0.0], [0.0, 4.0]]
        assert "in1.dir" in rep["checks"][0]["geometry"]

    def test_geometry_check_explicit_and_mismatch(self, tmp_path):
        from mieq.geometry import fig3_geometry

        (tmp_path / "g.json").write_text(fig3_geometry().to_json())
        text = "geometry:\n  checks:\n    - {name: x, kind: explicit, file: %s, expect: B}\n" % (tmp_path / "g.json")
        assert cli.main(["geometry-check", "--config", write(tmp_path, text), "--out", str(tmp_path / "o.json")]) == 2

    def test_geometry_check_bad_spec(self, tmp_path):
        text = "geometry:\n  checks:\n    - {kind: class_A, in1: {dir: [0, 0, 1]}}\n"
        assert cli.main(["geometry-check", "--config", write(tmp_path, text)]) == 1

    def test_config_error_exit_code(self, tmp_path, capsys):
        assert cli.main(["mie", "--config", write(tmp_path, "bogus: 1\n")]) == 1
        assert "run.yaml:1" in capsys.readouterr().err

    def test_bad_thread_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MIEQ_THREADS", "many")
        assert cli.main(["mie", "--config", write(tmp_path, VACUUM)]) == 1

    def test_validate_report_shape(self, tmp_path, monkeypatch):
        # a reduced oracle matrix keeps this fast; the full matrix runs in the acceptance suite
        from mieq import oracle

        monkeypatch.setattr(oracle, "CI_PERMITTIVITIES", (10 + 1j,))
        monkeypatch.setattr(oracle, "CI_SIZES", (0.5,))
        real = oracle.validate_matrix
        monkeypatch.setattr(
            oracle, "validate_matrix", lambda **kw: real(oracle.CI_PERMITTIVITIES, oracle.CI_SIZES, **kw)
        )
        out = tmp_path / "v.json"
        code = cli.main(["validate", "--out", str(out)])
        rep = json.loads(out.read_text())
        assert code == (0 if rep["all_pass"] else 2)
        assert rep["all_pass"]
        names = [c["name"] for c in rep["checks"]]
        assert sum(n.startswith("optical_theorem") for n in names) == 24
        assert all(set(c) == {"name", "value_fast", "value_oracle", "rel_err", "pass"} for c in rep["checks"])
