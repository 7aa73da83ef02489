import numpy as np
import pytest

import fscns.em as em
from fscns import ComponentParams, MixtureParams, RareEventParams

# Every EM run in the session lands here so the ascent audit can inspect it.
TRACES = []

_original_em = em._em


def _recording_em(*args, **kwargs):
    fit = _original_em(*args, **kwargs)
    TRACES.append((fit.method, fit.iterations, np.asarray(fit.loglik_trace, dtype=float)))
    return fit


em._em = _recording_em


@pytest.fixture
def psi0():
    return MixtureParams(0.4, ComponentParams(0.0, 1.0), ComponentParams(3.5, 1.2))


@pytest.fixture
def rare0():
    return RareEventParams(0.05, 4.0, 1.5)


# One line per acceptance criterion, printed at the end of the run.
ACCEPTANCE = []


def record_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
