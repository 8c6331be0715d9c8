import pytest

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one acceptance line; the summary is printed at the end of the run."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number, title, passed, detail):
        lines.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
