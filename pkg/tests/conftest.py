import pytest

from gapcount.field import FieldSpec, PotentialB

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; assert afterwards."""
    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
        assert passed, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def unit_pot():
    return PotentialB(FieldSpec.constant(1.0))


@pytest.fixture(scope="session")
def step_pot():
    # x_plus = -0.5 + 10 * 0.05 = 0
    return PotentialB(FieldSpec.smooth_step(0.5, 1.0, -0.5, 0.05))
