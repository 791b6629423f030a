"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

RESULTS = {}


def record(number: int, passed: bool, detail: str) -> None:
    RESULTS[number] = (bool(passed), detail)
