import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sakrylov.encoding import WalkOperator  # noqa: E402
from sakrylov.nuclear import (  # noqa: E402
    build_valence_hamiltonian,
    default_params,
    f72_orbitals,
    orbital_2m,
    reference_hamiltonian,
)


@pytest.fixture(scope="session")
def orbitals():
    return f72_orbitals()


@pytest.fixture(scope="session")
def m2(orbitals):
    return orbital_2m(orbitals)


@pytest.fixture(scope="session")
def table_h():
    return reference_hamiltonian()


@pytest.fixture(scope="session")
def formula_h(orbitals):
    return build_valence_hamiltonian(orbitals, default_params())


@pytest.fixture(scope="session")
def table_walk(table_h):
    return WalkOperator.compile(table_h)


def pytest_terminal_summary(terminalreporter):
    from _report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
