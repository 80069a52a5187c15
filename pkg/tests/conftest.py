"""Replays acceptance-criterion verdicts after the test run.

The acceptance tests record one ``criterion N: PASS/FAIL`` line each in
``test_acceptance.CRITERION_LINES``. Capture swallows prints during the
run, so this hook re-emits the lines in a terminal section once capture
is gone. A criterion test that died before recording its verdict gets a
synthesized FAIL line, so the tally always covers every criterion that
ran.
"""

import re
import sys

_CRITERION_NODE = re.compile(r"test_acceptance\.py::test_(\d+)_")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = list(getattr(mod, "CRITERION_LINES", ())) if mod else []

    reported = set()
    for line in lines:
        m = re.match(r"criterion (\d+):", line)
        if m:
            reported.add(int(m.group(1)))

    # criteria whose test ran but never announced (errored early)
    ran = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, ()):
            m = _CRITERION_NODE.search(getattr(rep, "nodeid", ""))
            if m:
                ran[int(m.group(1))] = status
    for num in sorted(ran):
        if num not in reported:
            lines.append(f"criterion {num}: FAIL - test {ran[num]} before reporting a verdict")

    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
