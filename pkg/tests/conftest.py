import pytest

# acceptance outcomes, filled in by test_acceptance.py: number -> (passed, detail)
ACCEPTANCE: dict = {}


def pytest_addoption(parser):
    parser.addoption("--heavy", action="store_true", default=False,
                     help="also run the long-running benchmark rows")


def pytest_configure(config):
    config.addinivalue_line("markers", "heavy: long-running benchmark row (needs --heavy)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--heavy"):
        return
    skip = pytest.mark.skip(reason="long-running; pass --heavy")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        for ok, detail in ACCEPTANCE[n]:
            terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
