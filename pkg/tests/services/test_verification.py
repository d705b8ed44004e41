# tests/services/test_verification.py

import pytest

from oddforms import __version__
from oddforms.core.config import Settings
from oddforms.core.exceptions import ConfigurationError
from oddforms.models.schemas import CheckRecord
from oddforms.services.electrodynamics import ElectrodynamicsService
from oddforms.services.verification import SUITES, VerificationService, parse_dims


@pytest.fixture
def verification():
    """A verification service on default settings with a fixed seed."""
    return VerificationService(Settings(seed=42))


class TestParseDims:
    @pytest.mark.parametrize("text, expected", [("2..5", [2, 3, 4, 5]), ("2,4", [2, 4]), ("3", [3])])
    def test_accepted_forms(self, text, expected):
        assert parse_dims(text) == expected

    @pytest.mark.parametrize("text", ["", "a..b", "0..2", "5..2"])
    def test_rejected_forms(self, text):
        with pytest.raises(ConfigurationError):
            parse_dims(text)


class TestRun:
    def test_unknown_suite(self, verification):
        with pytest.raises(ConfigurationError, match="unknown suite"):
            verification.run("everything")

    def test_all_runs_every_suite_in_order(self, verification, mocker):
        """
        GIVEN the suite name "all"
        WHEN the report is built
        THEN every suite runs once, in the documented order, and their checks are concatenated.
        """
        record = CheckRecord(name="x", value=0.0, tolerance=1.0, passed=True)
        run_suite = mocker.patch.object(VerificationService, "_run_suite", return_value=[record])

        report = verification.run("all", [2])

        assert [call.args[0] for call in run_suite.call_args_list] == list(SUITES)
        assert len(report.checks) == len(SUITES)
        assert report.passed
        assert report.version == __version__

    def test_one_failure_fails_the_report(self, verification, mocker):
        failing = CheckRecord(name="broken", value=2.0, tolerance=1.0, passed=False)
        mocker.patch.object(VerificationService, "_run_suite", return_value=[failing])

        assert not verification.run("weyl", [2]).passed

    def test_config_is_echoed(self, verification):
        report = verification.run("lemma1", [2, 3])

        assert report.config["seed"] == 42
        assert report.config["dims"] == [2, 3]
        assert report.config["metric"] == [1.0, -1.0, -1.0, -1.0]


class TestAlgebraSuites:
    def test_lemma1_passes(self, verification):
        report = verification.run("lemma1", [2, 3, 4])

        assert [check.name for check in report.checks] == [
            "lemma1.weyl_vs_minors.m=2",
            "lemma1.weyl_vs_minors.m=3",
            "lemma1.weyl_vs_minors.m=4",
        ]
        assert report.passed

    def test_weyl_passes(self, verification):
        report = verification.run("weyl", [2, 3])

        assert report.passed, [check for check in report.checks if not check.passed]

    def test_same_seed_same_report(self):
        first = VerificationService(Settings(seed=5)).run("weyl", [2, 3])
        second = VerificationService(Settings(seed=5)).run("weyl", [2, 3])

        assert first.model_dump() == second.model_dump()

    def test_suites_draw_independent_streams(self, verification):
        """Running a suite alone or after another gives the same checks."""
        alone = verification.run("lemma1", [2])
        verification.run("weyl", [2])
        again = verification.run("lemma1", [2])

        assert alone.checks == again.checks


class TestCounterexamples:
    def test_builtin_counterexamples_break_one_clause_each(self, verification):
        service: ElectrodynamicsService = verification.electrodynamics
        specs = verification.builtin_counterexamples()
        region = service.default_region(service.build_trajectory(specs["boundary_perturbed"]))

        boundary = service.compact_domain_check(service.build_trajectory(specs["boundary_perturbed"]), region)
        source = service.compact_domain_check(service.build_trajectory(specs["source_mismatch"]), region)

        assert boundary.interior_residual < 1e-12 < boundary.boundary_residual
        assert source.boundary_residual < 1e-12 < source.interior_residual

    def test_builtin_solutions_pass_the_compact_check(self, verification):
        service = verification.electrodynamics

        for name, spec in verification.builtin_solutions().items():
            trajectory = service.build_trajectory(spec, name)
            verdict = service.compact_domain_check(trajectory, service.default_region(trajectory))

            assert verdict.passed, name
