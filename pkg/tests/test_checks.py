"""The property-suite runner itself."""

import pytest

from fitzloss.checks import SUITE_NAMES, run_checks
from fitzloss.errors import DomainError


class TestRunChecks:
    def test_every_suite_passes_small(self):
        results = run_checks(["all"], seed=0, trials=40, resolution=120)
        assert {r.name for r in results} == set(SUITE_NAMES)
        for r in results:
            assert r.passed, (r.name, r.worst, r.example)
            assert r.worst <= 0.0

    def test_deterministic_given_seed(self):
        a = run_checks(["sandwich", "solver"], seed=3, trials=60)
        b = run_checks(["sandwich", "solver"], seed=3, trials=60)
        assert [(r.name, r.worst, r.failures) for r in a] == [
            (r.name, r.worst, r.failures) for r in b
        ]

    def test_independent_of_selection(self):
        alone = run_checks(["solver"], seed=5, trials=30)[0]
        with_others = run_checks(["sandwich", "solver"], seed=5, trials=30)[1]
        assert alone.worst == with_others.worst

    def test_unknown_suite(self):
        with pytest.raises(DomainError, match="unknown suite"):
            run_checks(["frobnicate"], seed=0, trials=10)

    def test_single_name_string(self):
        results = run_checks("identities", seed=1, trials=25)
        assert len(results) == 1 and results[0].name == "identities"
