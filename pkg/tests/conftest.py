import re

import pytest

CRITERIA = {
    "c1": "leak scenario: leaker ranked first, 2019 breach, RESTRICT/BLOCK; others ALLOW; < 5 s",
    "c2": "exact trend recovery within 1e-6 on noiseless piecewise-linear series",
    "c3": "ridge solver matches exact normal-equations oracle within 1e-8 relative",
    "c4": "continuity at every changepoint within 1e-6 * (1 + |g|)",
    "c5": "mu/sigma match two-pass oracle within 1e-12 relative",
    "c6": "band symmetric with one half-width mu*varsigma*sigma; alerts nonincreasing in varsigma",
    "c7": "pipeline outputs byte-identical across runs",
    "c8": "1000 random models save -> load -> save byte-identical",
}

_results: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: exit criteria of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    match = re.match(r"test_(c\d+)_", item.name)
    if match and item.get_closest_marker("acceptance"):
        key = match.group(1)
        if rep.failed:
            _results[key] = "FAIL"
        elif rep.when == "call" and rep.passed:
            _results.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key, text in CRITERIA.items():
        if key in _results:
            terminalreporter.write_line(f"{_results[key]}  {key.upper()}  {text}")
