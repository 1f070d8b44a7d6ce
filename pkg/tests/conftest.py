from collections import defaultdict

_RESULTS = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    props = dict(p for p in report.user_properties if p[0] == "criterion")
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        num, title = props["criterion"]
        detail = "; ".join(v for k, v in report.user_properties if k == "detail")
        _RESULTS[num].append((title, report.passed, report.nodeid.split("::")[-1], detail))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        rows = _RESULTS[num]
        failed = [r[2] for r in rows if not r[1]]
        line = f"criterion {num} ({rows[0][0]}): {'FAIL' if failed else 'PASS'}"
        if failed:
            line += f" [failing: {', '.join(failed)}]"
        details = " | ".join(r[3] for r in rows if r[3])
        if details:
            line += f" -- {details}"
        terminalreporter.write_line(line)
