import numpy as np
import pytest

from weaktomo.states import PostSelection, PureState


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(n, rng):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState.from_unnormalized(z)


def random_postselection(n, rng, floor=0.02):
    """Random b with every |b_i|^2 comfortably above zero."""
    p = rng.dirichlet(np.ones(n))
    p = (p + floor) / (1 + n * floor)
    return PostSelection.from_weights(p, rng.uniform(0, 2 * np.pi, n))


@pytest.fixture
def acceptance(request, capsys):
    """Record and echo a one-line verdict for an acceptance criterion."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def report(label, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
