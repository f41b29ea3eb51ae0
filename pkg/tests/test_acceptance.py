"""Acceptance criteria 1-12.

Each test runs one criterion from ``crs.suite`` at its stated budget and
tolerance and prints a single PASS/FAIL line, also when output is captured.
"""

import time

import pytest

from crs import suite
from crs.sets import cone_of

SEED = 42


@pytest.fixture(scope="module")
def shared():
    """Criterion 8 reuses the witnesses produced by criteria 7 and 9."""
    return {}


def _report(capsys, k, fn):
    t0 = time.perf_counter()
    try:
        detail = fn()
        passed = bool(detail.pop("passed"))
    except Exception as e:  # a library error is a failed criterion, reported as such
        detail, passed = {"error": f"{type(e).__name__}: {e}"}, False
    check = suite.Check(k, suite.NAMES[k], passed, detail, time.perf_counter() - t0)
    with capsys.disabled():
        print("\n" + check.line())
    assert check.passed, check.detail


def test_criterion_01_norm_base(capsys):
    _report(capsys, 1, lambda: suite.criterion_1(SEED))


def test_criterion_02_no_norm_base(capsys):
    _report(capsys, 2, lambda: suite.criterion_2(SEED))


def test_criterion_03_scaling_law(capsys):
    _report(capsys, 3, lambda: suite.criterion_3(SEED))


def test_criterion_04_scalarization(capsys):
    _report(capsys, 4, lambda: suite.criterion_4(SEED))


def test_criterion_05_sufficiency(capsys):
    _report(capsys, 5, lambda: suite.criterion_5(SEED))


def test_criterion_06_synthesis(capsys):
    _report(capsys, 6, lambda: suite.criterion_6(SEED))


def test_criterion_07_ssp_witness(capsys, shared):
    def run():
        d, shared["w7"] = suite.criterion_7(SEED)
        return d

    _report(capsys, 7, run)


def test_criterion_09_separation(capsys, shared):
    def run():
        d, shared["pairs"] = suite.criterion_9(SEED)
        return d

    _report(capsys, 9, run)


def test_criterion_08_delta_margin(capsys, shared):
    def run():
        if "w7" not in shared:
            shared["w7"] = suite.criterion_7(SEED)[1]
        if "pairs" not in shared:
            shared["pairs"] = suite.criterion_9(SEED)[1]
        ws = [shared["w7"]] + [(cone_of(C), cone_of(K), None) for C, K in shared["pairs"]]
        return suite.criterion_8(SEED, ws)

    _report(capsys, 8, run)


def test_criterion_10_necessary(capsys):
    _report(capsys, 10, lambda: suite.criterion_10(SEED))


def test_criterion_11_amin(capsys):
    _report(capsys, 11, lambda: suite.criterion_11(SEED))


def test_criterion_12_monotonicity_determinism(capsys):
    _report(capsys, 12, lambda: suite.criterion_12(SEED))
