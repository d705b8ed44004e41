# tests/test_cli.py

import json

import pytest

from oddforms.core.exceptions import EXIT_CHECKS_FAILED, EXIT_PASS, EXIT_USAGE
from oddforms.main import build_parser, run


@pytest.fixture
def write_json(tmp_path):
    """Writes a payload to a JSON file under tmp_path and returns its path."""

    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def constant_field(write_json):
    return write_json("constant_field.json", {"A": {"family": "constant_field", "F": {"0,1": 0.7, "2,3": -0.4}}})


@pytest.fixture
def boundary_perturbed(write_json):
    return write_json(
        "boundary_perturbed.json",
        {
            "A": {"family": "constant_field", "F": {"0,1": 0.7, "2,3": -0.4}},
            "G_perturbation": {"2,3": 1.0},
            "J": "from_maxwell",
        },
    )


@pytest.fixture
def unit_region(write_json):
    return write_json("region.json", {"min": [0, 0, 0, 0], "max": [1, 1, 1, 1]})


class TestParser:
    def test_commands_are_registered(self):
        parser = build_parser()

        for command in ("verify", "constitutive", "residual"):
            assert parser.parse_args([command, "x"] + (["--mode", "el"] if command == "residual" else [])).command == command

    def test_missing_command_is_a_usage_error(self):
        assert run([]) == EXIT_USAGE

    def test_unknown_mode_is_a_usage_error(self, constant_field):
        assert run(["residual", constant_field, "--mode", "sideways"]) == EXIT_USAGE


class TestConstitutive:
    def test_electric_field(self, write_json, tmp_path, capsys):
        """
        GIVEN F = 2 e^{01} in Minkowski labelling
        WHEN the constitutive command runs
        THEN it prints and writes G = -2 e^{23}.
        """
        source = write_json(
            "F.json", {"kind": "covector", "parity": "even", "grade": 2, "dim": 4, "first_label": 0, "coeffs": {"0,1": 2.0}}
        )
        out = tmp_path / "G.json"

        code = run(["constitutive", source, "--out", str(out)])

        G = json.loads(out.read_text(encoding="utf-8"))
        assert code == EXIT_PASS
        assert G["parity"] == "odd"
        assert G["coeffs"]["2,3"] == pytest.approx(-2.0)
        assert '"2,3": -2.0' in capsys.readouterr().out

    def test_inverse_round_trip(self, write_json, tmp_path):
        source = write_json(
            "G.json", {"kind": "covector", "parity": "odd", "grade": 2, "dim": 4, "first_label": 0, "coeffs": {"2,3": -2.0}}
        )
        out = tmp_path / "F.json"

        assert run(["constitutive", source, "--inverse", "--out", str(out)]) == EXIT_PASS
        assert json.loads(out.read_text(encoding="utf-8"))["coeffs"]["0,1"] == pytest.approx(2.0)

    def test_wrong_dimension(self, write_json, capsys):
        source = write_json("F.json", {"kind": "covector", "parity": "even", "grade": 2, "dim": 3, "coeffs": {"1,2": 1.0}})

        assert run(["constitutive", source]) == EXIT_USAGE
        assert "dimension mismatch" in capsys.readouterr().err

    def test_malformed_json_reports_a_location(self, tmp_path, capsys):
        source = tmp_path / "broken.json"
        source.write_text('{"kind": "covector",\n "grade": }', encoding="utf-8")

        assert run(["constitutive", str(source)]) == EXIT_USAGE
        assert "line 2" in capsys.readouterr().err

    def test_schema_errors_name_the_field(self, write_json, capsys):
        source = write_json("F.json", {"kind": "scalar", "parity": "even", "grade": 2, "dim": 4})

        assert run(["constitutive", source]) == EXIT_USAGE
        assert "kind" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["constitutive", str(tmp_path / "nowhere.json")]) == EXIT_USAGE


class TestResidual:
    @pytest.mark.parametrize("mode", ["el", "maxwell", "infinitesimal", "hamilton"])
    def test_solution_passes(self, constant_field, mode):
        assert run(["residual", constant_field, "--mode", mode]) == EXIT_PASS

    def test_compact_needs_a_region(self, constant_field, capsys):
        assert run(["residual", constant_field, "--mode", "compact"]) == EXIT_USAGE
        assert "--region" in capsys.readouterr().err

    def test_compact_on_a_solution(self, constant_field, unit_region, tmp_path):
        out = tmp_path / "report.json"

        code = run(["residual", constant_field, "--mode", "compact", "--region", unit_region, "--out", str(out)])

        report = json.loads(out.read_text(encoding="utf-8"))
        assert code == EXIT_PASS
        assert report["suite"] == "residual.compact"
        assert [check["name"] for check in report["checks"]] == ["compact.interior", "compact.boundary"]
        assert report["passed"] is True

    def test_boundary_counterexample_fails(self, boundary_perturbed, unit_region, tmp_path):
        out = tmp_path / "report.json"

        code = run(["residual", boundary_perturbed, "--mode", "compact", "--region", unit_region, "--out", str(out)])

        checks = {check["name"]: check for check in json.loads(out.read_text(encoding="utf-8"))["checks"]}
        assert code == EXIT_CHECKS_FAILED
        assert checks["compact.interior"]["passed"] is True
        assert checks["compact.boundary"]["passed"] is False
        assert "boundary" in checks["compact.boundary"]["detail"]

    def test_source_counterexample_fails_inside(self, write_json, unit_region, tmp_path):
        """
        GIVEN J = (c/4π)dG plus a constant e^{123} offset
        WHEN the compact verdict runs on the unit box
        THEN it exits 1 and names the interior Euler-Lagrange clause.
        """
        source_mismatch = write_json(
            "source_mismatch.json",
            {
                "A": {"family": "constant_field", "F": {"0,1": 0.7, "2,3": -0.4}},
                "J": "from_maxwell",
                "J_perturbation": {"1,2,3": 1.0},
            },
        )
        out = tmp_path / "report.json"

        code = run(["residual", source_mismatch, "--mode", "compact", "--region", unit_region, "--out", str(out)])

        checks = {check["name"]: check for check in json.loads(out.read_text(encoding="utf-8"))["checks"]}
        assert code == EXIT_CHECKS_FAILED
        assert checks["compact.boundary"]["passed"] is True
        assert checks["compact.interior"]["passed"] is False
        assert "Euler-Lagrange" in checks["compact.interior"]["detail"]

    def test_coulomb_box_through_the_origin_is_refused(self, write_json, unit_region):
        coulomb = write_json("coulomb.json", {"A": {"family": "coulomb", "q": 1.0}})

        assert run(["residual", coulomb, "--mode", "compact", "--region", unit_region]) == EXIT_USAGE

    def test_zero_w_is_refused(self, write_json):
        spec = {
            "A": {"family": "constant_field", "F": {"0,1": 1.0}},
            "points": [[0.1, 0.2, 0.3, 0.4]],
            "w": {"kind": "vector", "parity": "odd", "grade": 4, "dim": 4, "first_label": 0, "coeffs": {}},
        }

        assert run(["residual", write_json("zero_w.json", spec), "--mode", "infinitesimal"]) == EXIT_USAGE


class TestVerify:
    def test_unknown_suite(self):
        assert run(["verify", "everything"]) == EXIT_USAGE

    def test_invalid_flag_value(self):
        assert run(["verify", "weyl", "--c-light", "-1"]) == EXIT_USAGE

    def test_reports_are_byte_identical_for_a_fixed_seed(self, tmp_path):
        first, second = tmp_path / "first.json", tmp_path / "second.json"

        assert run(["verify", "weyl", "--dims", "2,3", "--seed", "9", "--out", str(first)]) == EXIT_PASS
        assert run(["verify", "weyl", "--dims", "2,3", "--seed", "9", "--out", str(second)]) == EXIT_PASS
        assert first.read_bytes() == second.read_bytes()

    def test_report_lines(self, capsys):
        run(["verify", "lemma1", "--dims", "2"])

        lines = capsys.readouterr().out.splitlines()
        assert any(line.startswith("PASS lemma1.weyl_vs_minors.m=2") for line in lines)
        assert "lemma1: PASS (1/1)" in lines

    def test_quad_order_reaches_the_stokes_suite(self, tmp_path):
        """
        GIVEN the stokes suite
        WHEN it runs with --quad-order 2 and with --quad-order 8
        THEN the two-point rule misses Stokes on curved cells and order 8 passes; the report echoes the order.
        """
        low, high = tmp_path / "low.json", tmp_path / "high.json"

        assert run(["verify", "stokes", "--quad-order", "2", "--out", str(low)]) == EXIT_CHECKS_FAILED
        assert run(["verify", "stokes", "--quad-order", "8", "--out", str(high)]) == EXIT_PASS
        assert json.loads(low.read_text(encoding="utf-8"))["config"]["quad_order"] == 2
