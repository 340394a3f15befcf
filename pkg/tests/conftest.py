"""Shared test plumbing: the acceptance suite registers one line per
criterion here, and the terminal summary prints the table at the end of
every run regardless of output capture."""

criterion_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)
