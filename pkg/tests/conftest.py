import os
import re

import pytest
from hypothesis import HealthCheck, Phase, settings

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.filter_too_much],
    print_blob=True,
    phases=[Phase.explicit, Phase.reuse, Phase.generate, Phase.target, Phase.shrink],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

_acceptance: list[tuple[str, str]] = []


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long reproduction runs")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="long-running; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = report.nodeid.split("::")[-1]
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance.append((label, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    grouped: dict[str, list[str]] = {}
    for label, outcome in _acceptance:
        m = re.match(r"test_criterion_(\d+)", label)
        grouped.setdefault(m.group(1) if m else label, []).append(outcome)
    for criterion, outcomes in grouped.items():
        if all(o == "PASS" for o in outcomes):
            verdict = "PASS"
        elif "FAIL" in outcomes:
            verdict = "FAIL"
        else:
            verdict = "SKIP"
        title = f"criterion {criterion}" if criterion.isdigit() else f"optional {criterion}"
        terminalreporter.write_line(f"{title}: {verdict} ({len(outcomes)} checks)")
    for label, outcome in _acceptance:
        terminalreporter.write_line(f"  {outcome}  {label}")
