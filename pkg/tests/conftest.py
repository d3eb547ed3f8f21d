import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=1000,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# filled by tests/test_acceptance.py; one entry per acceptance criterion
CRITERIA_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA_LINES):
        terminalreporter.write_line(CRITERIA_LINES[number])


def pytest_runtest_logreport(report):
    # a criterion that failed before reaching its own report line still gets one
    if report.when != "call" or not report.failed or "test_criterion_" not in report.nodeid:
        return
    number = int(report.nodeid.split("test_criterion_")[1][:2])
    if number not in CRITERIA_LINES:
        reason = str(report.longrepr.reprcrash.message) if hasattr(report.longrepr, "reprcrash") \
            else "error"
        CRITERIA_LINES[number] = f"[FAIL] criterion {number:2d}: {reason.splitlines()[0]}"
