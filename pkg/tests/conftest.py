import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from molresp.system import build_system  # noqa: E402


@pytest.fixture(scope="session")
def h2_eq():
    """H2 at 0.735 A with an exactly converged ADAPT ground state."""
    system = build_system("H 0 0 0; H 0 0 0.735")
    ground = system.adapt_ground_state(grad_tol=1e-7)
    return system, ground


@pytest.fixture(scope="session")
def h2_benchmark():
    """H2 at 0.7 A, gauge origin at the coordinate origin (benchmark-table setup)."""
    system = build_system("H 0 0 0; H 0 0 0.7", origin=(0.0, 0.0, 0.0))
    ground = system.adapt_ground_state(grad_tol=1e-7)
    return system, ground


@pytest.fixture(scope="session")
def h2_stretched():
    system = build_system("H 0 0 0; H 0 0 2.0")
    ground = system.adapt_ground_state(grad_tol=1e-7)
    return system, ground


@pytest.fixture(scope="session")
def h4_system():
    """Square-planar H4 at 1.25 A: mid-correlation, 8 qubits, fast."""
    from molresp.geometries import h4_square
    system = build_system(h4_square(1.25))
    ground = system.adapt_ground_state(grad_tol=1e-5, max_iters=120)
    return system, ground


@pytest.fixture(scope="session")
def dimer_chiral():
    """(H2)2 at 30 degree twist with a tightly converged ground state."""
    from molresp.geometries import h2_dimer_helical
    system = build_system(h2_dimer_helical(30.0))
    ground = system.adapt_ground_state(grad_tol=1e-6, max_iters=120)
    return system, ground
