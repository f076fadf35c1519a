import pytest

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion: ``criterion(number, title)``; the test outcome decides pass/fail."""
    entry = {}

    def register(number: int, title: str) -> None:
        entry["number"], entry["title"] = number, title

    yield register
    if entry:
        failed = getattr(request.node, "_call_failed", True)
        ACCEPTANCE_RESULTS[entry["number"]] = (entry["title"], not failed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item._call_failed = report.failed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
