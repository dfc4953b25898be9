"""One PASS/FAIL line per acceptance criterion, echoed in the pytest terminal summary."""

LINES: list[str] = []


def report(criterion: str, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion:>3s} {title}: {detail}"
    LINES.append(line)
    print(line)
    return ok
