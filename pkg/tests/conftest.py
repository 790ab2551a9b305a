"""Shared test plumbing.

The acceptance tests in test_acceptance.py register one line per criterion
through record_criterion().  The lines are replayed in the terminal summary
so the pass/fail verdict for each criterion is visible even when pytest
captures stdout from the individual tests.
"""

CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"CRITERION {number:2d}: {verdict} - {detail}")
