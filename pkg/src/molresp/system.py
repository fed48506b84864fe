"""End-to-end assembly: geometry -> integrals -> SCF -> qubit Hamiltonian.

One MolecularSystem instance caches everything the solvers need for a single
geometry; it is the unit of work for scans, the CLI and the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import integrals as ints
from . import scf as scfmod
from .adapt import GroundStateAnsatz, build_pool, run_adapt_vqe
from .eom import build_manifold
from .qops import (FermionOperator, PauliSum, StateVector, jordan_wigner,
                   prepare_reference, hamiltonian_operator)

__all__ = ["MolecularSystem", "build_system"]


@dataclass
class MolecularSystem:
    geometry: ints.Geometry
    basis: ints.BasisSet
    integrals: ints.AOIntegralSet
    scf: scfmod.ScfResult
    hamiltonian: scfmod.SpinOrbitalHamiltonian
    properties: scfmod.PropertyOperatorSet
    _cache: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_spin_orbitals

    @property
    def n_electrons(self) -> int:
        return self.hamiltonian.n_electrons

    @property
    def n_occ_spin(self) -> int:
        return self.n_electrons

    @property
    def n_virt_spin(self) -> int:
        return self.n_qubits - self.n_electrons

    @property
    def molar_mass(self) -> float:
        return self.geometry.molar_mass

    def hamiltonian_pauli(self) -> PauliSum:
        if "hq" not in self._cache:
            self._cache["hq"] = jordan_wigner(
                hamiltonian_operator(self.hamiltonian), self.n_qubits)
        return self._cache["hq"]

    def reference_state(self) -> StateVector:
        return prepare_reference(self.n_qubits, range(self.n_electrons))

    def field_hamiltonian(self, fvec) -> PauliSum:
        """Qubit Hamiltonian of H - F.mu for a static electric field F."""
        fvec = np.asarray(fvec, dtype=float)
        coeff = -sum(fvec[i] * self.properties.mu[i] for i in range(3))
        pert = jordan_wigner(FermionOperator.one_body(coeff), self.n_qubits)
        return self.hamiltonian_pauli() + pert

    def adapt_ground_state(self, grad_tol: float = 1e-3,
                           max_iters: int = 200,
                           inner_gtol: float = 1e-8) -> GroundStateAnsatz:
        key = ("adapt", grad_tol, max_iters, inner_gtol)
        if key not in self._cache:
            pool = build_pool(self.n_qubits)
            self._cache[key] = run_adapt_vqe(self.hamiltonian_pauli(), pool,
                                             self.reference_state(),
                                             grad_tol=grad_tol, max_iters=max_iters,
                                             inner_gtol=inner_gtol)
        return self._cache[key]

    def manifold(self, variant: str, ground: GroundStateAnsatz = None):
        key = ("manifold", variant, id(ground))
        if key not in self._cache:
            self._cache[key] = build_manifold(self.n_occ_spin, self.n_virt_spin,
                                              variant, ground)
        return self._cache[key]


def build_system(geometry, unit: str = "angstrom", n_electrons: int = None,
                 origin=None, n_frozen_core: int = 0) -> MolecularSystem:
    """Build everything from a Geometry or a geometry text block."""
    if isinstance(geometry, str):
        geometry = ints.load_geometry(geometry, unit)
    basis = ints.build_basis(geometry)
    core = ints.compute_core_integrals(basis, geometry)
    dip, ang, orig = ints.compute_property_integrals(basis, origin)
    full = core.with_properties(dip, ang, orig)
    if n_electrons is None:
        n_electrons = int(sum(geometry.charges))
    scf_res = scfmod.run_rhf(full, n_electrons)
    ham, props = scfmod.transform_to_mo(full, scf_res, n_frozen_core=n_frozen_core)
    return MolecularSystem(geometry, basis, full, scf_res, ham, props)
