import pytest

_LINES = []


class _Reporter:
    def __call__(self, number: int, name: str, ok: bool, detail: str = ""):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        _LINES.append((number, line))
        print(line)
        assert ok, line


@pytest.fixture
def acceptance():
    return _Reporter()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
