"""Exact diagonalization (FCI) and sum-over-states response: the in-repo
ground truth every other solver is validated against.

Property operators are passed as complex coefficient matrices in the
spin-orbital MO basis (what `PropertyOperatorSet.component` returns). Dipole
and magnetic-moment operators conserve both particle number and S_z, so the
sector-restricted sums over states are exact resolutions of the identity for
these operators; this is asserted by the completeness test in the suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CM1_PER_HARTREE, ROTATION_PREFACTOR
from .qops import (FermionOperator, PauliSum, SectorSpace, StateVector,
                   jordan_wigner, s_squared_operator)

__all__ = ["FciSpectrum", "ResonanceError", "fci_solve", "sos_response",
           "sos_observables", "finite_field_polarizability", "SosObservables"]

RESONANCE_GUARD = 1e-6


class ResonanceError(RuntimeError):
    def __init__(self, omega, nearest):
        super().__init__(f"frequency {omega:.8f} within guard band of "
                         f"excitation energy {nearest:.8f}")
        self.omega = omega
        self.nearest = nearest


@dataclass(frozen=True)
class FciSpectrum:
    """All eigenpairs of one (N, S_z) sector, energies ascending."""

    sector: SectorSpace
    energies: np.ndarray   # (dim,)
    vectors: np.ndarray    # (dim, dim) columns are sector-coordinate states
    s_squared: np.ndarray  # (dim,)

    @property
    def excitation_energies(self) -> np.ndarray:
        return self.energies[1:] - self.energies[0]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    def state(self, k: int) -> StateVector:
        return self.sector.embed(self.vectors[:, k])

    def multiplicity_label(self, k: int) -> str:
        s2 = self.s_squared[k]
        s = 0.5 * (np.sqrt(1.0 + 4.0 * s2) - 1.0)
        mult = int(round(2 * s + 1))
        return {1: "S", 2: "D", 3: "T", 4: "Q"}.get(mult, f"M{mult}")


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Largest-|coefficient| entry made real positive (deterministic output)."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        j = int(np.argmax(np.abs(col)))
        phase = col[j] / abs(col[j])
        out[:, k] = col / phase
    return out


def fci_solve(hamiltonian: PauliSum, n_electrons: int, s_z: float = 0.0) -> FciSpectrum:
    """Dense diagonalization of the qubit Hamiltonian on one (N, S_z) sector."""
    sector = SectorSpace(hamiltonian.n_qubits, n_electrons, s_z)
    h = sector.matrix(hamiltonian)
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise ValueError("Hamiltonian matrix not Hermitian on the sector")
    energies, vectors = np.linalg.eigh(h)
    vectors = _fix_phases(vectors)
    s2op = sector.matrix(jordan_wigner(s_squared_operator(hamiltonian.n_qubits),
                                       hamiltonian.n_qubits))
    s2 = np.real(np.einsum("ik,ij,jk->k", vectors.conj(), s2op, vectors))
    return FciSpectrum(sector, energies, vectors, s2)


def _operator_matrix(spectrum: FciSpectrum, op) -> np.ndarray:
    """Sector matrix of a one-electron coefficient matrix / FermionOperator / PauliSum."""
    sec = spectrum.sector
    if isinstance(op, PauliSum):
        return sec.matrix(op)
    if isinstance(op, FermionOperator):
        return sec.matrix(jordan_wigner(op, sec.n_qubits))
    return sec.matrix(jordan_wigner(FermionOperator.one_body(np.asarray(op)),
                                    sec.n_qubits))


def transition_moments(spectrum: FciSpectrum, op) -> np.ndarray:
    """<0|op|k> for all states k."""
    mat = _operator_matrix(spectrum, op)
    return spectrum.vectors[:, 0].conj() @ mat @ spectrum.vectors


def sos_response(spectrum: FciSpectrum, x_op, y_op, omega: float) -> complex:
    """Sum-over-states linear response <<X;Y>>_omega over the full sector."""
    ee = spectrum.excitation_energies
    nearest = ee[np.argmin(np.abs(np.abs(omega) - ee))] if len(ee) else None
    if nearest is not None and np.min(np.abs(np.abs(omega) - ee)) < RESONANCE_GUARD:
        raise ResonanceError(omega, float(nearest))
    tx = transition_moments(spectrum, x_op)[1:]
    ty = transition_moments(spectrum, y_op)[1:]
    # <0|X|k><k|Y|0>/(w-wk) - <0|Y|k><k|X|0>/(w+wk)
    val = np.sum(tx * np.conj(ty) / (omega - ee)) - np.sum(ty * np.conj(tx) / (omega + ee))
    return complex(val)


@dataclass(frozen=True)
class SosObservables:
    omega: float
    alpha_tensor: np.ndarray      # 3x3, -<<mu_i;mu_j>>
    alpha_iso: float
    gprime_tensor: np.ndarray     # 3x3, Im <<mu_i;m_j>>
    beta_bar: float
    specific_rotation: float      # deg dm^-1 (g/mL)^-1


def sos_observables(spectrum: FciSpectrum, properties, omega: float,
                    molar_mass: float) -> SosObservables:
    """Isotropic polarizability and specific rotation from the SoS expression."""
    alpha = np.empty((3, 3))
    gprime = np.empty((3, 3))
    mus = [properties.component(f"mu_{c}") for c in "xyz"]
    ms = [properties.component(f"m_{c}") for c in "xyz"]
    for i in range(3):
        for j in range(3):
            alpha[i, j] = -np.real(sos_response(spectrum, mus[i], mus[j], omega))
            gprime[i, j] = np.imag(sos_response(spectrum, mus[i], ms[j], omega))
    alpha_iso = float(np.trace(alpha) / 3.0)
    if omega != 0.0:
        beta = float(-np.trace(gprime) / (3.0 * omega))
        nu = omega * CM1_PER_HARTREE
        rotation = ROTATION_PREFACTOR * nu**2 * beta / molar_mass
    else:
        beta = rotation = float("nan")
    return SosObservables(omega, alpha, alpha_iso, gprime, beta, rotation)


def finite_field_polarizability(hamiltonian_builder, n_electrons: int,
                                s_z: float = 0.0, step: float = 1e-3) -> np.ndarray:
    """alpha_ij = -d2 E_FCI / dF_i dF_j by 5-point central differences.

    `hamiltonian_builder(F)` must return the qubit Hamiltonian of H - F.mu.
    A Richardson consistency check flags an unstable step choice.
    """
    if step == 0.0:
        raise ValueError("field step must be nonzero")

    def ground(fvec):
        spec_h = hamiltonian_builder(np.asarray(fvec, float))
        sec = SectorSpace(spec_h.n_qubits, n_electrons, s_z)
        return float(np.linalg.eigvalsh(sec.matrix(spec_h))[0])

    e0 = ground([0.0, 0.0, 0.0])
    alpha = np.zeros((3, 3))
    for i in range(3):
        ep, em, e2p, e2m = (ground(np.eye(3)[i] * f)
                            for f in (step, -step, 2 * step, -2 * step))
        d2_5pt = (-e2p + 16 * ep - 30 * e0 + 16 * em - e2m) / (12 * step**2)
        d2_3pt = (ep - 2 * e0 + em) / step**2
        if abs(d2_5pt - d2_3pt) > max(1e-4, 0.2 * abs(d2_5pt)):
            raise ValueError(f"finite-field Richardson instability on axis {i}")
        alpha[i, i] = -d2_5pt
    for i in range(3):
        for j in range(i + 1, 3):
            def mixed(h):
                f = np.zeros(3)
                vals = []
                for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    f[:] = 0.0
                    f[i] = si * h
                    f[j] = sj * h
                    vals.append(ground(f))
                return (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h**2)
            d_h = mixed(step)
            d_2h = mixed(2 * step)
            d2 = (16 * d_h - d_2h) / 15.0  # Richardson O(h^4)
            alpha[i, j] = alpha[j, i] = -d2
    return alpha
