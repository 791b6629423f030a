import pytest
from hypothesis import settings

from splitinv import kernels

import acceptance_log

BACKENDS = sorted(kernels.available_backends())

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per importable kernel backend."""
    mod = kernels.available_backends()[request.param]
    for name in ("weighted_pair_max", "window_max", "garch_sigma2"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance_log.RESULTS):
        passed, detail = acceptance_log.RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
