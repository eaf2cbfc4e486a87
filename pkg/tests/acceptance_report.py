"""Collects one verdict line per acceptance criterion for the terminal summary."""
RESULTS: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    return line
