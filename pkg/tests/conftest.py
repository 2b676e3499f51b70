def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, line
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(line(number))
