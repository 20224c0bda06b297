import pytest

from mrclc import build_scenario, run

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def pendulum_runs():
    """Full 40 s pendulum runs, computed lazily and shared across modules."""
    cache = {}
    variants = {
        "composite": ("composite", {}),
        "mrac": ("mrac", {}),
        "concurrent": ("concurrent", {}),
        "composite_exact": ("composite", {"scenario.derivative_source": "exact"}),
        "composite_kw0": ("composite", {"controller.k_w": 0.0}),
        "concurrent_empty": ("concurrent", {"controller.stack_capacity": 0}),
    }

    def get(name):
        if name not in cache:
            law, overrides = variants[name]
            cache[name] = run(build_scenario(law=law, overrides=overrides))
        return cache[name]

    return get


@pytest.fixture
def criterion():
    """Record a pass/fail line for the acceptance summary, then assert."""

    def check(number, title, passed, detail):
        ACCEPTANCE_RESULTS.append((number, title, bool(passed), detail))
        assert passed, f"criterion {number} ({title}): {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
