import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (passed, description, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        passed, name, detail = ACCEPTANCE[num]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  {num:>2}. {name}: {detail}")
