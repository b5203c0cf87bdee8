"""Acceptance summary lines and a suite-wide Pythagoras audit."""

import functools

import pytest

from frankel_lab import hodge_engine

PYTHAGORAS_TOL = 1e-8

_ACCEPTANCE = {}
_PYTHAGORAS = []


def pytest_configure(config):
    original = hodge_engine.hodge_decompose

    @functools.wraps(original)
    def audited(*args, **kwargs):
        split = original(*args, **kwargs)
        _PYTHAGORAS.append(split.residuals["pythagoras"])
        return split

    hodge_engine.hodge_decompose = audited
    config.add_cleanup(lambda: setattr(hodge_engine, "hodge_decompose", original))


@pytest.fixture
def acceptance():
    """``acceptance(number, title, ok, detail)`` records one criterion line."""
    def record(number, title, ok, detail=""):
        _ACCEPTANCE[number] = (title, bool(ok), detail)
        return ok
    return record


@pytest.fixture
def pythagoras_log():
    return _PYTHAGORAS


def pytest_sessionfinish(session, exitstatus):
    if _PYTHAGORAS and max(_PYTHAGORAS) > PYTHAGORAS_TOL and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    tr = terminalreporter
    if _ACCEPTANCE:
        tr.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            title, ok, detail = _ACCEPTANCE[number]
            tr.write_line(f"AC{number:<2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    if _PYTHAGORAS:
        worst = max(_PYTHAGORAS)
        status = "PASS" if worst <= PYTHAGORAS_TOL else "FAIL"
        tr.write_line(f"suite-wide Pythagoras {status}: {len(_PYTHAGORAS)} decompositions, "
                      f"worst relative residual {worst:.3e} (tol {PYTHAGORAS_TOL:g})")
