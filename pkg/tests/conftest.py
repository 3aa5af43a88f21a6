import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """``criterion(n, title, checks)`` records one summary line, then asserts every check."""

    def record(n: int, title: str, checks: list[tuple[str, bool]]) -> None:
        failed = [name for name, ok in checks if not ok]
        detail = "; ".join(f"{name}: {'ok' if ok else 'FAILED'}" for name, ok in checks)
        _RESULTS[n] = (not failed, f"{title} [{detail}]")
        assert not failed, f"criterion {n} failed checks: {failed}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, text = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {text}")
