import json
import subprocess
import sys
from fractions import Fraction

import pytest

from oplab.poly import Polynomial, parse_polynomial
from oplab.polyfunc import OperatorSpec
from oplab.rings import make_ring, parse_ring


@pytest.fixture
def ring():
    """Factory: ``ring("zn:5")`` -> Ring."""
    return lambda text: make_ring(parse_ring(text))


@pytest.fixture
def poly():
    return parse_polynomial


@pytest.fixture
def spec():
    """Factory building an OperatorSpec from polynomial strings."""

    def build(b, c, k=2):
        N = len(b)
        return OperatorSpec(tuple(parse_polynomial(s, N) for s in b), tuple(parse_polynomial(s, N) for s in c), k)

    return build


@pytest.fixture
def run_cli(tmp_path):
    """Run ``python -m oplab.cli`` in ``tmp_path``; returns the CompletedProcess."""

    def run(*args, check_json=False):
        proc = subprocess.run([sys.executable, "-m", "oplab.cli", *map(str, args)], cwd=tmp_path,
                              capture_output=True, text=True, timeout=300)
        if check_json:
            proc.payload = json.loads(proc.stdout)
        return proc

    run.cwd = tmp_path
    return run


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return write


# -- acceptance criterion reporting -------------------------------------------------

ACCEPTANCE_LINES = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number:>2}: {status}  {self.title}"
        ACCEPTANCE_LINES.append((self.number, line))
        print(line)
        return False


@pytest.fixture
def criterion():
    """``with criterion(3, "title"):`` records one pass/fail line for the summary."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
