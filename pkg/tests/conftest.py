import pytest

from nsx.runner import RunConfig, run_suite


@pytest.fixture(scope="session")
def suite():
    """One full suite run shared by the regression and acceptance tests.

    Everything in the suite is deterministic for a fixed config, so the
    cached report is as good as a fresh one; tests that need to compare
    two runs (determinism) do their own runs.
    """
    return run_suite(config=RunConfig())


@pytest.fixture(scope="session")
def by_id(suite):
    return {s.sid: s for s in suite.scenarios}
