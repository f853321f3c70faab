import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_TITLES = {}
_OUTCOMES = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _TITLES[mark.args[0]] = mark.args[1]


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark and call.when == "call":
        _OUTCOMES[mark.args[0]].append(call.excinfo is None)
    elif mark and call.when == "setup" and call.excinfo is not None:
        _OUTCOMES[mark.args[0]].append(False)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_TITLES):
        results = _OUTCOMES.get(number, [])
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:>2}: {status}  {_TITLES[number]} ({sum(results)}/{len(results)} tests)")
