import numpy as np
import pytest


class FixedUniforms:
    """Stands in for a Generator: ``random()`` replays fixed uniforms, then repeats the last."""

    def __init__(self, *values):
        self.values = list(values) or [0.5]
        self.calls = 0

    def random(self, size=None):
        if size is not None:
            return np.array([self.random() for _ in range(int(np.prod(size)))]).reshape(size)
        v = self.values[min(self.calls, len(self.values) - 1)]
        self.calls += 1
        return v

    def uniform(self, low, high, size=None):
        u = self.random(size)
        return low + (high - low) * np.asarray(u)


@pytest.fixture
def zero_noise():
    """Every Laplace draw from this stream is exactly 0."""
    return FixedUniforms(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; ``gate=False`` marks an informational line."""

    def record(label: str, ok: bool, detail: str, gate: bool = True) -> bool:
        status = "PASS" if ok else "FAIL"
        suffix = "" if gate else " (informational, not gated)"
        line = f"[{status}] {label}: {detail}{suffix}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
