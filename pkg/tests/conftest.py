import os

import pytest


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False,
                     help="also run the long production runs (minutes to hours)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended") or os.environ.get("BURGERS_RLINE_EXTENDED"):
        return
    skip = pytest.mark.skip(reason="extended run; use --extended or BURGERS_RLINE_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def pytest_configure(config):
    config.addinivalue_line("markers", "extended: long production runs, skipped unless --extended")
    config._acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Collects one summary line per acceptance criterion."""
    lines = request.config._acceptance_lines

    def add(number, ok, text):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}"
        lines.append(line)
        print(line)
        return ok

    return add


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
