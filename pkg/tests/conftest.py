import json


def pytest_terminal_summary(terminalreporter):
    rows = []
    for key in ("passed", "failed", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") == "call" and rep.user_properties and "acceptance" in rep.nodeid:
                rows.append((rep.nodeid.split("::")[-1], key, dict(rep.user_properties)))
    if not rows:
        return
    terminalreporter.section("acceptance measurements")
    for name, outcome, props in sorted(rows):
        terminalreporter.write_line(f"{name} [{outcome}]")
        for k, v in props.items():
            terminalreporter.write_line(f"    {k}: {json.dumps(v) if not isinstance(v, str) else v}")
