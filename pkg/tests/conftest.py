import pathlib

import pytest

from distnet.netio import parse_net

DATA = pathlib.Path(__file__).parent / "data"


def load(name):
    return parse_net((DATA / f"{name}.net").read_text(encoding="utf-8"))


@pytest.fixture
def m_shape():
    return load("m_shape")


@pytest.fixture
def tau_conflict():
    return load("tau_conflict")


@pytest.fixture
def ladder():
    return load("ladder")


@pytest.fixture
def single():
    return load("single")


@pytest.fixture
def conflict():
    return load("conflict")


@pytest.fixture
def conflict_conc():
    return load("conflict_conc")


_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    n = mark.args[0]
    ok = rep.passed
    prev = _acceptance.get(n)
    _acceptance[n] = (prev is None or prev[0]) and ok, item.name


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        ok, _ = _acceptance[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}")
