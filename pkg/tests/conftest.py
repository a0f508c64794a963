import numpy as np
import pytest

from fregean.algebra import FiniteAlgebra
from fregean.terms import Signature
from fregean.variety import VarietyContext, builtin_context

PASSING = ["boolean-group", "equiv", "equiv0", "brouwerian", "goedel3"]


@pytest.fixture(scope="session")
def ctx():
    return builtin_context


@pytest.fixture(scope="session")
def semilattice():
    """({0,1}, meet, 1): Fregean but without a Mal'cev term."""
    sig = Signature([("m", 2), ("1", 0)])
    A = FiniteAlgebra(2, 1, {"m": np.array([[0, 0], [0, 1]]), "1": np.array(1)},
                      signature=sig, names=["0", "1"], label="S2")
    return VarietyContext("semilattice", sig, [A])


def assignments(size, n):
    return [tuple((i // size ** (n - 1 - j)) % size for j in range(n)) for i in range(size ** n)]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
