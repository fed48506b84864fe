"""Excitation manifolds and the subspace excited-state solvers.

Four routes to excited states on top of one ADAPT ground state:
  * bare qEOM      -- double-commutator blocks M, Q, V, W, non-Hermitian
                      generalized eigenproblem (can violate the killer
                      condition: nonzero <0|k> is observable here on purpose);
  * q-sc-EOM       -- self-consistent manifold U G U+, Hermitian M^sc;
  * q-proj-EOM     -- expectation-shifted projected manifold, generalized
                      Hermitian problem (M^proj, V^proj);
  * QSE            -- diagonalization in span{|Psi0>, G|Psi0>}.

The M^sc and Z builders expose both the direct-bracket path and the
measurement-style path that assembles off-diagonal elements from diagonal
expectations on superposition states; the two must agree elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .adapt import GroundStateAnsatz
from .qops import (FermionOperator, StateVector, jordan_wigner,
                   s_squared_operator, apply_pauli_sum, apply_exp_generator)

__all__ = [
    "ExcitationManifold", "SubspaceMatrices", "ExcitedStateSet",
    "build_manifold", "build_qeom_matrices", "solve_qeom",
    "build_sc_matrix", "solve_sc", "build_proj_matrices", "solve_proj",
    "solve_qse", "transition_properties", "killer_check", "broaden_spectrum",
]


# ---------------------------------------------------------------------------
# manifold
# ---------------------------------------------------------------------------

def _spin(p):
    return p % 2


@dataclass(frozen=True)
class ExcitationManifold:
    """HF-referenced singles and doubles, S_z conserving, deterministic order."""

    variant: str                 # bare | sc | proj
    n_occ_spin: int
    n_virt_spin: int
    descriptors: tuple           # ("s", a, i) / ("d", a, b, i, j)
    operators: tuple             # FermionOperator G_mu (unshifted)
    shifts: np.ndarray = None    # <Psi0|G_mu|Psi0> for the proj variant

    @property
    def size(self) -> int:
        return len(self.operators)

    @property
    def n_qubits(self) -> int:
        return self.n_occ_spin + self.n_virt_spin


def enumerate_sd_descriptors(n_occ_spin: int, n_virt_spin: int) -> list:
    occ = range(n_occ_spin)
    virt = range(n_occ_spin, n_occ_spin + n_virt_spin)
    descs = []
    for i in occ:
        for a in virt:
            if _spin(i) == _spin(a):
                descs.append(("s", a, i))
    for i in occ:
        for j in occ:
            if j <= i:
                continue
            for a in virt:
                for b in virt:
                    if b <= a:
                        continue
                    if _spin(a) + _spin(b) == _spin(i) + _spin(j):
                        descs.append(("d", a, b, i, j))
    return descs


def _manifold_operator(desc) -> FermionOperator:
    if desc[0] == "s":
        _, a, i = desc
        return FermionOperator.excitation([a], [i])
    _, a, b, i, j = desc
    return FermionOperator.excitation([a, b], [j, i])


def build_manifold(n_occ_spin: int, n_virt_spin: int, variant: str,
                   ground: GroundStateAnsatz = None) -> ExcitationManifold:
    """Enumerated, ordered, variant-dressed excitation manifold."""
    if variant not in ("bare", "sc", "proj"):
        raise ValueError(f"unknown manifold variant {variant!r}")
    descs = enumerate_sd_descriptors(n_occ_spin, n_virt_spin)
    if not descs:
        raise ValueError("empty excitation manifold")
    ops = tuple(_manifold_operator(d) for d in descs)
    shifts = None
    if variant == "proj":
        if ground is None:
            raise ValueError("proj manifold needs the ground-state ansatz")
        n = ground.n_qubits
        shifts = np.array([ground.state.inner(
            apply_pauli_sum(jordan_wigner(g, n), ground.state)) for g in ops])
    return ExcitationManifold(variant, n_occ_spin, n_virt_spin,
                              tuple(descs), ops, shifts)


# ---------------------------------------------------------------------------
# shared sector workspace
# ---------------------------------------------------------------------------

class _Workspace:
    def __init__(self, manifold, ground, hamiltonian):
        self.manifold = manifold
        self.ground = ground
        self.engine = ground.engine(hamiltonian)
        sec = self.engine.sector
        self.sector = sec
        self.h = self.engine.h
        self.psi0 = sec.project(ground.state)
        self.e0 = float(np.real(np.vdot(self.psi0, self.h @ self.psi0)))
        n = manifold.n_qubits
        self.g_mats = [scipy.sparse.csr_matrix(sec.matrix(jordan_wigner(g, n)))
                       for g in manifold.operators]
        self._cache = {}
        self._s2 = None

    def column_stack(self, vectors):
        return np.stack(vectors, axis=1)

    @property
    def exc_on_ref(self):
        """Columns G_mu |HF>."""
        if "b_ref" not in self._cache:
            ref = self.engine.ref
            self._cache["b_ref"] = self.column_stack([g @ ref for g in self.g_mats])
        return self._cache["b_ref"]

    @property
    def sc_basis(self):
        """Columns U G_mu |HF> (orthonormal)."""
        if "phi" not in self._cache:
            self._cache["phi"] = self.ground.apply_unitary(self.exc_on_ref, self.engine)
        return self._cache["phi"]

    @property
    def exc_on_psi0(self):
        if "x" not in self._cache:
            self._cache["x"] = self.column_stack([g @ self.psi0 for g in self.g_mats])
        return self._cache["x"]

    @property
    def deexc_on_psi0(self):
        if "y" not in self._cache:
            self._cache["y"] = self.column_stack(
                [g.conj().T @ self.psi0 for g in self.g_mats])
        return self._cache["y"]

    @property
    def proj_basis(self):
        """Columns (G_mu - <G_mu>) |Psi0>."""
        if "b_proj" not in self._cache:
            x = self.exc_on_psi0
            shifts = self.manifold.shifts
            if shifts is None:
                shifts = self.psi0.conj() @ x
            self._cache["b_proj"] = x - np.outer(self.psi0, shifts)
        return self._cache["b_proj"]

    def s_squared_values(self, states):
        if self._s2 is None:
            n = self.sector.n_qubits
            self._s2 = self.sector.matrix(jordan_wigner(s_squared_operator(n), n))
        return np.real(np.einsum("ik,ij,jk->k", states.conj(), self._s2, states))


_WORKSPACES = {}


def _workspace(manifold, ground, hamiltonian) -> _Workspace:
    key = (id(manifold), id(ground), id(hamiltonian))
    if key not in _WORKSPACES:
        _WORKSPACES[key] = _Workspace(manifold, ground, hamiltonian)
    return _WORKSPACES[key]


# ---------------------------------------------------------------------------
# subspace matrices
# ---------------------------------------------------------------------------

@dataclass
class SubspaceMatrices:
    """Blocks of one variant's secular problem plus reconstruction context."""

    variant: str
    m: np.ndarray = None
    q: np.ndarray = None
    v: np.ndarray = None
    w: np.ndarray = None
    h_sub: np.ndarray = None
    s_sub: np.ndarray = None
    e0: float = 0.0
    basis: np.ndarray = None      # sector coordinates of subspace states
    workspace: object = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        for block in (self.m, self.h_sub):
            if block is not None:
                return block.shape[0]
        return 0

    def replace_blocks(self, **kw) -> "SubspaceMatrices":
        data = dict(variant=self.variant, m=self.m, q=self.q, v=self.v, w=self.w,
                    h_sub=self.h_sub, s_sub=self.s_sub, e0=self.e0,
                    basis=self.basis, workspace=self.workspace,
                    diagnostics=dict(self.diagnostics))
        data.update(kw)
        return SubspaceMatrices(**data)


def build_sc_matrix(manifold, ground, hamiltonian, path: str = "direct") -> SubspaceMatrices:
    """M^sc_{mu,nu} = <0|G+_mu U+ H U G_nu|0> - delta_{mu,nu} E0."""
    if manifold.variant != "sc":
        raise ValueError("expected an sc manifold")
    ws = _workspace(manifold, ground, hamiltonian)
    phi = ws.sc_basis
    hphi = ws.h @ phi
    m_direct = phi.conj().T @ hphi - ws.e0 * np.eye(manifold.size)
    if path == "direct":
        m = m_direct
    elif path == "measurement":
        # off-diagonals from diagonal expectations on superposition states,
        # Re[M_ij] = M_{i+j,i+j} - M_ii/2 - M_jj/2; Im part from the direct path
        diag = np.real(np.einsum("ij,ij->j", phi.conj(), hphi))
        size = manifold.size
        re_m = np.diag(diag - ws.e0)
        b_ref = ws.exc_on_ref
        for i in range(size):
            for j in range(i + 1, size):
                sup = (b_ref[:, i] + b_ref[:, j]) / np.sqrt(2.0)
                sup = ws.ground.apply_unitary(sup, ws.engine)
                h_sup = float(np.real(np.vdot(sup, ws.h @ sup)))
                re_m[i, j] = re_m[j, i] = h_sup - 0.5 * diag[i] - 0.5 * diag[j]
        m = re_m + 1j * np.imag(m_direct)
    else:
        raise ValueError(f"unknown path {path!r}")
    return SubspaceMatrices("sc", m=m, e0=ws.e0, basis=phi, workspace=ws,
                            diagnostics={"path": path})


def build_proj_matrices(manifold, ground, hamiltonian) -> SubspaceMatrices:
    """M^proj, V^proj over shifted operators; M already contains the -E0 V shift
    so that eigenvalues of (M, V) are excitation energies directly."""
    if manifold.variant != "proj":
        raise ValueError("expected a proj manifold")
    ws = _workspace(manifold, ground, hamiltonian)
    b = ws.proj_basis
    m = b.conj().T @ (ws.h @ b) - ws.e0 * (b.conj().T @ b)
    v = b.conj().T @ b
    return SubspaceMatrices("proj", m=m, v=v, e0=ws.e0, basis=b, workspace=ws)


def build_qeom_matrices(manifold, ground, hamiltonian) -> SubspaceMatrices:
    """Bare qEOM double-commutator blocks M, Q, V, W evaluated on |Psi0>."""
    if manifold.variant != "bare":
        raise ValueError("expected a bare manifold")
    ws = _workspace(manifold, ground, hamiltonian)
    x = ws.exc_on_psi0        # G_nu |0>
    y = ws.deexc_on_psi0      # G+_nu |0>
    hx = ws.h @ x
    hy = ws.h @ y
    hpsi = ws.h @ ws.psi0
    z = ws.column_stack([g @ hpsi for g in ws.g_mats])          # G_nu H|0>
    zd = ws.column_stack([g.conj().T @ hpsi for g in ws.g_mats])  # G+_nu H|0>
    # <0|[G+_mu,[H,G_nu]]|0> = t1 - t2 - t3 + t4; plain transposes swap mu<->nu
    t1 = x.conj().T @ hx
    t2 = x.conj().T @ z
    t3 = (zd.conj().T @ y).T
    t4 = (y.conj().T @ hy).T
    m = t1 - t2 - t3 + t4
    # Q_{mu,nu} = -[<G+_mu H G+_nu> - <G+_mu G+_nu H> - <H G+_nu G+_mu> + <G+_nu H G+_mu>]
    q = -(x.conj().T @ hy - x.conj().T @ zd - (z.conj().T @ y).T + (x.conj().T @ hy).T)
    v = x.conj().T @ x - (y.conj().T @ y).T
    w = -(x.conj().T @ y - (x.conj().T @ y).T)
    return SubspaceMatrices("bare", m=m, q=q, v=v, w=w, e0=ws.e0,
                            basis=None, workspace=ws)


def build_qse_matrices(manifold, ground, hamiltonian) -> SubspaceMatrices:
    """H and overlap in span{|Psi0>} u {G_mu|Psi0>} (identity included)."""
    ws = _workspace(manifold, ground, hamiltonian)
    b = np.concatenate([ws.psi0[:, None], ws.exc_on_psi0], axis=1)
    h_sub = b.conj().T @ (ws.h @ b)
    s_sub = b.conj().T @ b
    return SubspaceMatrices("qse", h_sub=h_sub, s_sub=s_sub, e0=ws.e0,
                            basis=b, workspace=ws)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

@dataclass
class ExcitedStateSet:
    variant: str
    energies: np.ndarray          # excitation energies, ascending
    amplitudes: np.ndarray        # columns A^k (bare: stacked [A; B])
    states: np.ndarray = None     # sector coordinates, normalized columns
    overlaps: np.ndarray = None   # <0|k>, computed before any orthogonalization
    s_squared: np.ndarray = None
    sector: object = None
    psi0: np.ndarray = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.energies)

    def statevector(self, k: int) -> StateVector:
        return self.sector.embed(self.states[:, k])

    def multiplicity_label(self, k: int) -> str:
        s2 = self.s_squared[k]
        s = 0.5 * (np.sqrt(max(0.0, 1.0 + 4.0 * s2)) - 1.0)
        mult = int(round(2 * s + 1))
        return {1: "S", 2: "D", 3: "T", 4: "Q"}.get(mult, f"M{mult}")


def _phase_fix(states, overlaps):
    """Overlap made real >= 0 where significant, else largest coefficient."""
    states = states.copy()
    overlaps = overlaps.copy()
    for k in range(states.shape[1]):
        ov = overlaps[k]
        if abs(ov) > 1e-8:
            phase = ov / abs(ov)
        else:
            col = states[:, k]
            j = int(np.argmax(np.abs(col)))
            phase = col[j] / abs(col[j])
        states[:, k] /= phase
        overlaps[k] /= phase
    return states, overlaps


def _finish(variant, ws, energies, amplitudes, states, diagnostics,
            normalize=True):
    norms = np.linalg.norm(states, axis=0)
    if normalize:
        states = states / norms
    diagnostics["reconstruction_norms"] = norms
    overlaps = ws.psi0.conj() @ states
    states, overlaps = _phase_fix(states, overlaps)
    s2 = ws.s_squared_values(states / norms if not normalize else states)
    return ExcitedStateSet(variant, energies, amplitudes, states, overlaps,
                           s2, ws.sector, ws.psi0, diagnostics)


def solve_sc(matrices: SubspaceMatrices) -> ExcitedStateSet:
    """Hermitian eigensolve of M^sc; states U sum_mu A_mu G_mu |0>."""
    m = matrices.m
    herm_err = float(np.max(np.abs(m - m.conj().T)))
    energies, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    states = matrices.basis @ vecs
    return _finish("sc", matrices.workspace, energies, vecs, states,
                   {"hermiticity_error": herm_err, **matrices.diagnostics})


def _canonical_orthogonalization(v, threshold=1e-8):
    vals, vecs = np.linalg.eigh(0.5 * (v + v.conj().T))
    keep = vals > threshold
    if not np.any(keep):
        raise ValueError("metric entirely below the orthogonalization threshold")
    x = vecs[:, keep] / np.sqrt(vals[keep])
    return x, int(np.sum(~keep))


def solve_proj(matrices: SubspaceMatrices, threshold: float = 1e-8) -> ExcitedStateSet:
    """Generalized Hermitian eigensolve via canonical orthogonalization."""
    x, dropped = _canonical_orthogonalization(matrices.v, threshold)
    mt = x.conj().T @ matrices.m @ x
    energies, y = np.linalg.eigh(0.5 * (mt + mt.conj().T))
    amps = x @ y
    states = matrices.basis @ amps
    return _finish("proj", matrices.workspace, energies, amps, states,
                   {"dropped_directions": dropped,
                    "orthogonalization_threshold": threshold})


def solve_qse(manifold, ground, hamiltonian, threshold: float = 1e-8) -> ExcitedStateSet:
    """Quantum subspace expansion; energies relative to the QSE ground state."""
    matrices = build_qse_matrices(manifold, ground, hamiltonian)
    return solve_qse_from_matrices(matrices, threshold)


def solve_qse_from_matrices(matrices: SubspaceMatrices,
                            threshold: float = 1e-8) -> ExcitedStateSet:
    x, dropped = _canonical_orthogonalization(matrices.s_sub, threshold)
    ht = x.conj().T @ matrices.h_sub @ x
    evals, y = np.linalg.eigh(0.5 * (ht + ht.conj().T))
    amps = x @ y
    energies = evals[1:] - evals[0]
    states = matrices.basis @ amps[:, 1:]
    out = _finish("qse", matrices.workspace, energies, amps[:, 1:], states,
                  {"dropped_directions": dropped, "qse_ground_energy": float(evals[0])})
    out.diagnostics["ground_vector"] = matrices.basis @ amps[:, 0]
    return out


def solve_qeom(matrices: SubspaceMatrices, positive_tol: float = 1e-8) -> ExcitedStateSet:
    """Generalized non-Hermitian eigenproblem of the bare blocks.

    Keeps the positive-energy, metric-positive branch; residual imaginary
    parts are reported as diagnostics. Eigenvectors are kept at unit 2-norm
    (metric norms go to diagnostics) and states are reconstructed as
    (sum A G + sum B G+)|Psi0> without renormalization, with overlaps <0|k>
    recorded before anything is orthogonalized, so killer-condition
    violations stay observable exactly as the secular problem produces them.
    """
    m, q, v, w = matrices.m, matrices.q, matrices.v, matrices.w
    lhs = np.block([[m, q], [q.conj(), m.conj()]])
    met = np.block([[v, w], [-w.conj(), -v.conj()]])
    size = m.shape[0]
    cond = np.linalg.cond(met)
    diagnostics = {"metric_condition": float(cond)}
    if cond > 1e10:
        diagnostics["singular_metric_warning"] = True
        evals, vecs = scipy.linalg.eig(np.linalg.pinv(met, rcond=1e-10) @ lhs)
    else:
        evals, vecs = scipy.linalg.eig(lhs, met)
    keep = []
    for idx in range(len(evals)):
        ev = evals[idx]
        if not np.isfinite(ev):
            continue
        if ev.real <= positive_tol:
            continue
        vec = vecs[:, idx]
        nrm = np.real(vec.conj() @ met @ vec)
        if nrm <= 1e-10:
            continue
        keep.append((ev, vec / np.linalg.norm(vec), nrm))
    keep.sort(key=lambda t: t[0].real)
    energies = np.array([ev.real for ev, _, _ in keep])
    diagnostics["max_imag_part"] = float(max((abs(ev.imag) for ev, _, _ in keep), default=0.0))
    if diagnostics["max_imag_part"] > 1e-8:
        diagnostics["imaginary_eigenvalue_warning"] = True
    diagnostics["metric_norms"] = np.array([nrm for _, _, nrm in keep])
    amps = np.stack([vec for _, vec, _ in keep], axis=1) if keep else np.zeros((2 * size, 0))
    ws = matrices.workspace
    states = ws.exc_on_psi0 @ amps[:size] + ws.deexc_on_psi0 @ amps[size:]
    return _finish("bare", ws, energies, amps, states, diagnostics, normalize=False)


# ---------------------------------------------------------------------------
# properties and checks
# ---------------------------------------------------------------------------

def transition_properties(states: ExcitedStateSet, ground, properties):
    """Per-state transition dipoles, oscillator and rotational strengths.

    OS_k = (2/3) E_0k sum_i |<0|mu_i|k>|^2
    RS_k = sum_i Im[<0|mu_i|k><k|m_i|0>]   (length gauge)

    Phase convention for reported moments: states with a significant <0|k>
    keep it real positive (fixed upstream); otherwise the largest transition
    dipole component is made real positive. The ExcitedStateSet is updated in
    place so states and moments stay consistent.
    """
    sec = states.sector
    n = sec.n_qubits
    psi0 = states.psi0
    mu_mats = [sec.matrix(jordan_wigner(
        FermionOperator.one_body(properties.component(f"mu_{c}")), n)) for c in "xyz"]
    m_mats = [sec.matrix(jordan_wigner(
        FermionOperator.one_body(properties.component(f"m_{c}")), n)) for c in "xyz"]
    tdip = np.stack([psi0.conj() @ mats @ states.states for mats in mu_mats], axis=1)
    tmag = np.stack([psi0.conj() @ mats @ states.states for mats in m_mats], axis=1)
    for k in range(states.size):
        if abs(states.overlaps[k]) > 1e-8:
            continue
        j = int(np.argmax(np.abs(tdip[k])))
        if abs(tdip[k, j]) > 1e-8:
            phase = tdip[k, j] / abs(tdip[k, j])
            tdip[k] /= phase
            tmag[k] /= phase
            states.states[:, k] /= phase
    os_k = (2.0 / 3.0) * states.energies * np.sum(np.abs(tdip) ** 2, axis=1)
    rs_k = np.sum(np.imag(tdip * np.conj(tmag)), axis=1)
    return tdip.T, os_k, rs_k


def killer_check(manifold, ground) -> tuple:
    """Norms ||S+_mu |Psi0>|| per operator and the worst case."""
    n = ground.n_qubits
    psi0 = ground.state
    norms = np.empty(manifold.size)
    if manifold.variant == "sc":
        # ||U G+_mu U+ |Psi0>|| = ||G+_mu U+|Psi0>||
        back = psi0
        pool = ground.pool
        for k, theta in ground.steps[::-1]:
            back = apply_exp_generator(back, pool.pauli(k), -theta, check=False)
        for idx, g in enumerate(manifold.operators):
            gd = jordan_wigner(g.dagger(), n)
            norms[idx] = apply_pauli_sum(gd, back).norm()
    elif manifold.variant == "proj":
        # S+_mu|Psi0> = |Psi0><Psi0|(G_mu - <G_mu>)+|Psi0>
        for idx, g in enumerate(manifold.operators):
            gd = jordan_wigner(g.dagger(), n)
            val = psi0.inner(apply_pauli_sum(gd, psi0)) - np.conj(manifold.shifts[idx])
            norms[idx] = abs(val)
    else:
        for idx, g in enumerate(manifold.operators):
            gd = jordan_wigner(g.dagger(), n)
            norms[idx] = apply_pauli_sum(gd, psi0).norm()
    return norms, float(np.max(norms))


def broaden_spectrum(sticks, lineshape: str = "lorentzian", fwhm: float = 0.01,
                     grid=None) -> tuple:
    """Convolve (energy, strength) sticks with a normalized lineshape.

    Returns (grid, curve, sticks); the sticks are always co-emitted so no
    information is lost to the broadening choice.
    """
    sticks = [(float(e), float(s)) for e, s in sticks]
    if not sticks:
        raise ValueError("no sticks to broaden")
    if fwhm <= 0:
        raise ValueError("fwhm must be positive")
    if grid is None:
        lo = min(e for e, _ in sticks) - 10 * fwhm
        hi = max(e for e, _ in sticks) + 10 * fwhm
        grid = np.linspace(lo, hi, 2001)
    else:
        grid = np.asarray(grid, dtype=float)
    curve = np.zeros_like(grid)
    if lineshape == "lorentzian":
        gam = 0.5 * fwhm
        for e, s in sticks:
            curve += s * (gam / np.pi) / ((grid - e) ** 2 + gam**2)
    elif lineshape == "gaussian":
        sig = fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        for e, s in sticks:
            curve += s * np.exp(-0.5 * ((grid - e) / sig) ** 2) / (sig * np.sqrt(2 * np.pi))
    else:
        raise ValueError(f"unknown lineshape {lineshape!r}")
    return grid, curve, sticks
