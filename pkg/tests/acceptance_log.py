"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

LINES = []


def report(number, name, ok, detail=""):
    line = f"criterion {number} [{name}]: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    LINES.append(line)
    print(line)
    return ok
