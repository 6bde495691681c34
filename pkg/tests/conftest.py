import pytest
from hypothesis import settings

# numba compilation and large grids make first examples slow
settings.register_profile("default", deadline=None)
settings.load_profile("default")

_REPORT = []


@pytest.fixture
def report():
    """Record one acceptance verdict; printed in the terminal summary."""
    def _report(number: int, ok: bool, detail: str):
        _REPORT.append((number, ok, detail))
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_REPORT, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
