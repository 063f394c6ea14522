import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import strategies  # noqa: E402,F401  (loads the fixed-seed hypothesis profile)
import acceptance_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
