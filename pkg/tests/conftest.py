from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# golden measurement fixtures: bundled scene, 400 patterns from this seed
GOLDEN_SEED = 20131
GOLDEN_M = 400

# acceptance criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-resolution runs taking minutes")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(1234)
