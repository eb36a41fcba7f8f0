import pytest

from ellharm.ellipsoid import new_system

_CRITERIA: dict[str, list[tuple[bool, str]]] = {}


@pytest.fixture(scope="session")
def sys321():
    return new_system(3.0, 2.0, 1.0)


@pytest.fixture
def criterion():
    """Record an acceptance outcome; summarized at the end of the run."""

    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA.setdefault(str(number), []).append((bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=int):
        results = _CRITERIA[key]
        status = "PASS" if all(ok for ok, _ in results) else "FAIL"
        details = "; ".join(d for _, d in results)
        terminalreporter.write_line(f"criterion {key}: {status} ({details})")
