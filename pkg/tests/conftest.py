import numpy as np
import pytest
from hypothesis import settings

from qubofs.qubo import QuboInstance

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


def random_instance(rng: np.random.Generator, n: int, phi: float | None = None) -> QuboInstance:
    """QUBO with the sign structure of a real selection problem."""
    if phi is None:
        phi = float(rng.uniform(0.05, 0.95))
    r = rng.uniform(0, 1, size=(n, n))
    r = (r + r.T) / 2
    np.fill_diagonal(r, 0.0)
    q = -(1 - phi) * r
    np.fill_diagonal(q, phi * rng.uniform(0, 1, size=n))
    return QuboInstance(q, phi, {"fixture": "random"})


def naive_h(q: np.ndarray, z) -> float:
    """Double loop over the explicit selection sum."""
    n = len(z)
    total = 0.0
    for i in range(n):
        total += q[i, i] * z[i]
        for j in range(n):
            if i != j:
                total += q[i, j] * z[i] * z[j]
    return -total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for an acceptance criterion.

    Call with the criterion label and a dict of name -> (ok, detail) checks;
    the line is printed and kept for the terminal summary, then the checks
    are asserted.
    """

    def record(label: str, checks: dict[str, tuple[bool, str]]):
        ok = all(c for c, _ in checks.values())
        details = "; ".join(f"{name}: {detail}{'' if c else ' [FAIL]'}" for name, (c, detail) in checks.items())
        line = f"{'PASS' if ok else 'FAIL'}  {label}  ({details})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        failed = [f"{name}: {detail}" for name, (c, detail) in checks.items() if not c]
        assert not failed, f"{label} failed: " + "; ".join(failed)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
