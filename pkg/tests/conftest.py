# Acceptance criteria register their verdicts here; the terminal summary prints
# one PASS/FAIL line per criterion regardless of output capturing.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{num:>2}] {title}: {detail}")
