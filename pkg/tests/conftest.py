import pytest

from blockade.model import FockTruncation, ModelParams, resonance_by_label


@pytest.fixture
def working_point() -> ModelParams:
    """gamma=0.5, chi=15, omega_r=30, delta_0=0, eta=0.1, delta_c on d2."""
    p = ModelParams()
    dc = resonance_by_label(p, "d2")
    return p.replace(delta_c=dc, delta_c_prime=dc)


@pytest.fixture
def trunc() -> FockTruncation:
    return FockTruncation(12)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py" in rep.nodeid:
                lines.append((rep.nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{outcome:6s} {name}")
