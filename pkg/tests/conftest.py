from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def gen():
    return np.random.default_rng(20240601)


def random_psd(gen, d, floor=0.1):
    a = gen.standard_normal((d, d))
    return a @ a.T / d + floor * np.eye(d)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
