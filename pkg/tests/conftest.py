import pytest

from reqdecomp.interval import Interval as I
from reqdecomp.specfile import bundled, load

# reachable sets of the cruise case, reference values (whole horizon)
REFERENCE_RA = {
    "v": I(22.00, 36.23), "vdot": I(-0.63, 2.89), "Fr": I(88.2, 107.8), "F": I(-9.36, 2997.78),
    "Fa": I(240.88, 655.25), "T": I(179.94, 200), "omega": I(219.67, 362.30), "u": I(-0.005, 1.51),
}
# realizable sets after contraction, reference values
REFERENCE_RE = {
    "v": I(0, 45), "vdot": I(-1.5, 3), "Fr": I(88.2, 107.8), "F": I(-250, 3500),
    "Fa": I(0, 1000), "T": I(120, 220), "omega": I(0, 450), "u": I(-0.29, 2),
}


@pytest.fixture(scope="session")
def cruise_spec():
    return load(bundled("cruise"))


@pytest.fixture(scope="session")
def cruise_ds(cruise_spec):
    return cruise_spec.design


# one line per acceptance criterion, filled by test_acceptance and echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
