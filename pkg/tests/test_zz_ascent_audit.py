"""Runs last: every EM fit made in this session must have ascended."""
import numpy as np

from conftest import TRACES, record_criterion


def test_criterion_04_suite_wide_ascent():
    assert TRACES, "no fits were recorded"
    worst = max(float(np.max(-np.diff(t), initial=0.0)) for _, _, t in TRACES)
    max_it = max(it for _, it, _ in TRACES)
    ok = worst <= 1e-8 and max_it <= 500
    record_criterion(4, ok, f"suite-wide audit of {len(TRACES)} in-process fits: largest decrease "
                            f"{worst:.2e}, max iterations {max_it}")
    assert ok
