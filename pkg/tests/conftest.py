import pytest

from hcrv.data import BaseMeasure, ModelParams, ingest_groups
from hcrv.rng import stream

# one line per acceptance criterion, echoed after the test summary
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_dataset():
    """Two small Poisson groups with ties within and across groups."""
    rng = stream(42, "data")
    groups = [rng.poisson(2.0, 6).astype(float).tolist(),
              rng.poisson(4.0, 6).astype(float).tolist()]
    return ingest_groups(groups)


@pytest.fixture(scope="session")
def unit_params():
    return ModelParams(alpha=1.0, alpha0=1.0,
                       base_measure=BaseMeasure("normal", mean=3.0, sd=1.0))
