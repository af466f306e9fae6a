import pytest

from fetide.model import DimensionalParams, DimensionlessParams


@pytest.fixture
def table1_dim():
    """Upper end of the instrument's regime: k_a = 1e12, R_t = 1.3284e-13."""
    return DimensionalParams(
        diffusivity=1e-6,
        assoc_rate=1e12,
        dissoc_rate=1e-4,
        inject_conc=1e-16,
        receptor_density=1.3284e-13,
        well_height=0.2,
        well_length=0.5,
        gate_length=5e-4,
    )


@pytest.fixture
def fig4_params():
    return DimensionlessParams(Da=66.42, K=1.0, l_s=1e-3, epsilon=0.4)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} | {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
