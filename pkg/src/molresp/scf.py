"""Restricted Hartree-Fock, MO transformation and second-quantized operators.

The spin-orbital convention used everywhere downstream: spin orbital
2p + sigma, sigma = 0 (alpha) / 1 (beta), interleaved per spatial orbital p.
Two-electron coefficients are kept in the physicist antisymmetrized form
<pq||rs> internally; the FCIDUMP interchange (fcidump module) converts to the
chemist convention on the way out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScfResult",
    "SpinOrbitalHamiltonian",
    "PropertyOperatorSet",
    "ScfConvergenceError",
    "run_rhf",
    "transform_to_mo",
]


class ScfConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScfResult:
    energy: float
    mo_coeff: np.ndarray   # (n_ao, n_mo), columns ordered by energy
    mo_energy: np.ndarray
    density: np.ndarray    # full AO density, trace(D S) = n_electrons
    n_electrons: int
    iterations: tuple      # (iteration, energy, gradient norm) log
    converged: bool


def _degenerate_block_canonicalize(mo_energy, mo_coeff, tol=1e-8):
    """Fix the arbitrary rotation inside degenerate orbital blocks.

    Within each degenerate block the AO-index position operator
    diag(0..n_ao-1) is diagonalized; its eigenvectors are deterministic and
    localized, which keeps non-interacting fragments on their own orbitals.
    Signs are fixed by making the largest-magnitude coefficient positive and
    blocks are ordered lexicographically afterwards.
    """
    n = mo_coeff.shape[1]
    pos = np.arange(mo_coeff.shape[0], dtype=float)
    coeff = mo_coeff.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(mo_energy[stop] - mo_energy[start]) < tol:
            stop += 1
        if stop - start > 1:
            block = coeff[:, start:stop]
            xb = block.T @ (pos[:, None] * block)
            xb = 0.5 * (xb + xb.T)
            _, rot = np.linalg.eigh(xb)
            block = block @ rot
            order = np.lexsort(np.round(block, 10)[::-1])
            block = block[:, order]
            coeff[:, start:stop] = block
        start = stop
    for k in range(n):
        col = coeff[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            coeff[:, k] = -col
    return coeff


def run_rhf(integrals, n_electrons: int, conv: float = 1e-10,
            max_iter: int = 300, diis_size: int = 8) -> ScfResult:
    """Closed-shell SCF: DIIS, with an optimal-damping rescue pass when DIIS
    oscillates (near-degenerate stretched geometries), then a DIIS polish."""
    if n_electrons % 2 != 0:
        raise ValueError("restricted HF needs an even electron count")
    n_ao = integrals.overlap.shape[0]
    if n_electrons > 2 * n_ao:
        raise ValueError("more electrons than spin orbitals")
    nocc = n_electrons // 2

    S = integrals.overlap
    hcore = integrals.kinetic + integrals.nuclear
    eri = integrals.eri

    sval, svec = np.linalg.eigh(S)
    if sval.min() <= 1e-10:
        raise ValueError("overlap matrix not positive definite")
    A = svec @ np.diag(sval**-0.5) @ svec.T  # symmetric orthogonalization

    def fock(dm_half):
        j = np.einsum("pqrs,rs->pq", eri, dm_half)
        k = np.einsum("prqs,rs->pq", eri, dm_half)
        return hcore + 2.0 * j - k

    def aufbau(f_ao):
        e, co = np.linalg.eigh(A.T @ f_ao @ A)
        c = A @ co
        return e, c, c[:, :nocc] @ c[:, :nocc].T

    log = []

    def diis_run(dm, max_steps, offset):
        diis_f, diis_e = [], []
        grad = np.inf
        for it in range(max_steps):
            f = fock(dm)
            energy = float(np.sum(dm * (hcore + f)) + integrals.e_nuc)
            err = A.T @ (f @ dm @ S - S @ dm @ f) @ A
            grad = float(np.linalg.norm(err))
            log.append((offset + it, energy, grad))
            if grad < conv:
                return dm, grad
            diis_f.append(A.T @ f @ A)
            diis_e.append(err)
            if len(diis_f) > diis_size:
                diis_f.pop(0)
                diis_e.pop(0)
            m = len(diis_f)
            fo = diis_f[-1]
            if m > 1:
                b = -np.ones((m + 1, m + 1))
                b[m, m] = 0.0
                for i in range(m):
                    for j in range(m):
                        b[i, j] = np.sum(diis_e[i] * diis_e[j])
                rhs = np.zeros(m + 1)
                rhs[m] = -1.0
                try:
                    coef = np.linalg.solve(b, rhs)[:m]
                    fo = sum(ci * fi for ci, fi in zip(coef, diis_f))
                except np.linalg.LinAlgError:
                    pass
            e, co = np.linalg.eigh(fo)
            c = A @ co
            dm = c[:, :nocc] @ c[:, :nocc].T
        return dm, grad

    def oda_run(dm, max_steps, offset):
        # optimal damping: monotone energy descent, rescues DIIS oscillation
        f = fock(dm)
        grad = np.inf
        for it in range(max_steps):
            err = A.T @ (f @ dm @ S - S @ dm @ f) @ A
            grad = float(np.linalg.norm(err))
            energy = float(np.sum(dm * (hcore + f)) + integrals.e_nuc)
            log.append((offset + it, energy, grad))
            if grad < 1e-5:
                break
            _, _, dm_star = aufbau(f)
            f_star = fock(dm_star)
            ddm = dm_star - dm
            slope = 2.0 * np.sum(f * ddm)
            curve = np.sum((f_star - f) * ddm)
            lam = 1.0 if curve <= 0 else min(1.0, -slope / (2.0 * curve))
            if lam <= 1e-12:
                lam = 0.1
            dm = dm + lam * ddm
            f = fock(dm)
        return dm, grad

    _, _, dm = aufbau(hcore)
    dm, grad = diis_run(dm, 60, 1)
    if grad >= conv:
        dm, _ = oda_run(dm, 300, 1000)
        dm, grad = diis_run(dm, max_iter, 2000)
    if grad >= conv:
        raise ScfConvergenceError(
            f"SCF not converged (gradient {grad:.3e} after DIIS+ODA+DIIS)")

    # final canonical orbitals from the converged Fock matrix
    e, c, dm = aufbau(fock(dm))
    c = _degenerate_block_canonicalize(e, c)
    dm = c[:, :nocc] @ c[:, :nocc].T
    energy = float(np.sum(dm * (hcore + fock(dm))) + integrals.e_nuc)
    return ScfResult(energy, c, e, 2.0 * dm, n_electrons, tuple(log), True)


# ---------------------------------------------------------------------------
# MO transformation and second quantization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinOrbitalHamiltonian:
    """h_pq / <pq||rs> over interleaved spin orbitals, plus the spatial data."""

    n_spin_orbitals: int
    h: np.ndarray            # (n_so, n_so)
    g_antisym: np.ndarray    # (n_so,)*4, physicist antisymmetrized <pq||rs>
    e_nuc: float
    n_electrons: int
    h_spatial: np.ndarray    # (n_mo, n_mo)
    eri_spatial: np.ndarray  # chemist (pq|rs), (n_mo,)*4
    convention: str = "physicist-antisymmetrized <pq||rs>; spin interleaved (alpha even)"


@dataclass(frozen=True)
class PropertyOperatorSet:
    """Dipole and magnetic-moment one-electron coefficients, spin-orbital MO basis.

    mu[i] is real symmetric. The magnetic part is purely imaginary and kept as
    the real antisymmetric matrix m_stored[i] with operator m_i = 1j*m_stored[i]
    (m_stored = -L/2 with L the stored angular-momentum factor).
    """

    mu: np.ndarray        # (3, n_so, n_so)
    m_stored: np.ndarray  # (3, n_so, n_so)
    origin: np.ndarray

    def mu_matrix(self, i: int) -> np.ndarray:
        return self.mu[i]

    def m_matrix(self, i: int) -> np.ndarray:
        return 1j * self.m_stored[i]

    def component(self, name: str) -> np.ndarray:
        """Complex coefficient matrix for 'mu_x' ... 'm_z'."""
        kind, _, axis = name.partition("_")
        i = "xyz".index(axis)
        if kind == "mu":
            return self.mu[i].astype(complex)
        if kind == "m":
            return 1j * self.m_stored[i]
        raise KeyError(name)


def _spatial_to_spin(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[::2, ::2] = mat
    out[1::2, 1::2] = mat
    return out


def freeze_core(h_mo: np.ndarray, eri_mo: np.ndarray, e_nuc: float, n_core: int):
    """Fold n_core doubly-occupied spatial orbitals into an effective
    one-electron operator and a core energy: standard CAS reduction.

    Returns (h_active, eri_active, e_frozen) with e_frozen including e_nuc.
    Property operators only need their active block downstream: the frozen
    core contributes a constant, which cancels in every transition moment,
    Z vector and response bracket used here (states stay orthogonal).
    """
    core = list(range(n_core))
    act = slice(n_core, h_mo.shape[0])
    e_frozen = e_nuc + 2.0 * sum(h_mo[c, c] for c in core)
    for c in core:
        for d in core:
            e_frozen += 2.0 * eri_mo[c, c, d, d] - eri_mo[c, d, d, c]
    h_act = h_mo[act, act].copy()
    for c in core:
        h_act += 2.0 * eri_mo[act, act, c, c] - eri_mo[act, c, c, act]
    return h_act, eri_mo[act, act, act, act].copy(), float(e_frozen)


def spin_orbital_hamiltonian(h_mo, eri_mo, e_nuc, n_electrons) -> SpinOrbitalHamiltonian:
    """Interleaved spin-orbital expansion of spatial MO integrals."""
    n_so = 2 * h_mo.shape[0]
    h_so = _spatial_to_spin(h_mo)
    # <pq|rs> = (pr|qs) delta(sp,sr) delta(sq,ss); then antisymmetrize
    spin = np.arange(n_so) % 2
    same = (spin[:, None] == spin[None, :]).astype(float)
    sp = np.arange(n_so) // 2
    coul = eri_mo[np.ix_(sp, sp, sp, sp)]  # (pr|qs) on spatial parts, chemist order
    d_pr = same[:, None, :, None]
    d_qs = same[None, :, None, :]
    phys = np.einsum("prqs->pqrs", coul) * d_pr * d_qs
    g = phys - phys.transpose(0, 1, 3, 2)
    return SpinOrbitalHamiltonian(n_so, h_so, g, e_nuc, n_electrons, h_mo, eri_mo)


def transform_to_mo(integrals, scf: ScfResult, properties=None, n_frozen_core: int = 0):
    """AO->MO transform; returns (SpinOrbitalHamiltonian, PropertyOperatorSet).

    `properties` overrides the (dipole, angmom, origin) triple; by default the
    blocks already attached to `integrals` are used. `n_frozen_core` folds that
    many lowest spatial orbitals into the effective one-electron operator.
    """
    if not scf.converged:
        raise ValueError("SCF result not converged")
    c = scf.mo_coeff
    h_mo = c.T @ (integrals.kinetic + integrals.nuclear) @ c
    eri_mo = np.einsum("pqrs,pi->iqrs", integrals.eri, c, optimize=True)
    eri_mo = np.einsum("iqrs,qj->ijrs", eri_mo, c, optimize=True)
    eri_mo = np.einsum("ijrs,rk->ijks", eri_mo, c, optimize=True)
    eri_mo = np.einsum("ijks,sl->ijkl", eri_mo, c, optimize=True)

    e_nuc = integrals.e_nuc
    n_electrons = scf.n_electrons
    if n_frozen_core:
        h_mo, eri_mo, e_nuc = freeze_core(h_mo, eri_mo, e_nuc, n_frozen_core)
        n_electrons -= 2 * n_frozen_core

    ham = spin_orbital_hamiltonian(h_mo, eri_mo, e_nuc, n_electrons)

    if properties is None:
        properties = (integrals.dipole, integrals.angmom, integrals.origin)
    dip_ao, ang_ao, origin = properties
    props = None
    if dip_ao is not None:
        act = slice(n_frozen_core, scf.mo_coeff.shape[1])
        mu = np.stack([_spatial_to_spin((c.T @ dip_ao[i] @ c)[act, act])
                       for i in range(3)])
        m_st = np.stack([_spatial_to_spin((c.T @ ang_ao[i] @ c)[act, act]) * (-0.5)
                         for i in range(3)])
        props = PropertyOperatorSet(mu, m_st, np.asarray(origin, float))
    return ham, props
