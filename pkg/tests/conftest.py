import itertools

import numpy as np
import pytest

from qutritsynth.circuit_ir import Gate


def brute_force_gate_matrix(g: Gate, n: int) -> np.ndarray:
    """Oracle: loop over every product basis state and apply the gate's table."""
    controls, target, table = g.table_form()
    dim = 3 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for digits in itertools.product(range(3), repeat=n):
        col = int("".join(map(str, digits)), 3)
        ctrl = 0
        for c in controls:
            ctrl = 3 * ctrl + digits[c]
        for t_out in range(3):
            new = list(digits)
            new[target] = t_out
            row = int("".join(map(str, new)), 3)
            out[row, col] += table[ctrl][t_out, digits[target]]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(RESULTS.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
