"""Fermionic ADAPT-VQE with a generalized singles-and-doubles pool.

The public contract works on PauliSum/StateVector objects; internally every
hot loop runs on an (N, S_z) SectorSpace compilation (exact, see qops), which
is what keeps the 12-14 qubit systems at interactive speed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse

from .qops import (FermionOperator, PauliSum, SectorSpace, StateVector,
                   jordan_wigner, prepare_reference)

__all__ = ["OperatorPool", "GroundStateAnsatz", "AdaptError",
           "build_pool", "pool_gradients", "run_adapt_vqe"]


class AdaptError(RuntimeError):
    pass


def _spin(p: int) -> int:
    return p % 2


def _descriptor_operator(desc) -> FermionOperator:
    if desc[0] == "s":
        _, p, q = desc
        g = FermionOperator.excitation([p], [q])
    else:
        _, p, q, r, s = desc
        # creation pair (p<q), annihilation pair (r<s) written a+_p a+_q a_s a_r
        g = FermionOperator.excitation([p, q], [s, r])
    return g - g.dagger()


@dataclass(frozen=True)
class OperatorPool:
    """Anti-Hermitian generalized single/double excitation differences."""

    n_spin_orbitals: int
    descriptors: tuple
    generators: tuple  # FermionOperator tau_k = G_k - G_k^+

    def __len__(self):
        return len(self.generators)

    def pauli(self, k: int, cache={}) -> PauliSum:
        key = (self.n_spin_orbitals, self.descriptors[k])
        if key not in cache:
            cache[key] = jordan_wigner(self.generators[k], self.n_spin_orbitals)
        return cache[key]


def build_pool(n_spin_orbitals: int) -> OperatorPool:
    """All number- and S_z-conserving generalized singles and doubles."""
    if n_spin_orbitals < 2:
        raise ValueError("need at least two spin orbitals")
    n = n_spin_orbitals
    descs = []
    # generalized singles: q -> p, same spin, p > q
    for q in range(n):
        for p in range(q + 1, n):
            if _spin(p) == _spin(q):
                descs.append(("s", p, q))
    # generalized doubles: annihilation pair (r<s) -> creation pair (p<q),
    # S_z conserving, each unordered pair-of-pairs once ((p,q) > (r,s) lex)
    pairs = [(r, s) for r in range(n) for s in range(r + 1, n)]
    for i, (r, s) in enumerate(pairs):
        for (p, q) in pairs[i + 1:]:
            if _spin(p) + _spin(q) == _spin(r) + _spin(s):
                descs.append(("d", p, q, r, s))
    gens = tuple(_descriptor_operator(d) for d in descs)
    return OperatorPool(n_spin_orbitals, tuple(descs), gens)


# ---------------------------------------------------------------------------
# sector-compiled workspace
# ---------------------------------------------------------------------------

class _SectorEngine:
    """Sparse generator matrices + dense Hamiltonian on one sector."""

    def __init__(self, hamiltonian: PauliSum, reference: StateVector):
        amps = reference.amplitudes
        nz = np.nonzero(np.abs(amps) > 1e-12)[0]
        if len(nz) != 1:
            raise ValueError("reference must be a single determinant")
        n = reference.n_qubits
        occ = [k for k in range(n) if (int(nz[0]) >> (n - 1 - k)) & 1]
        n_alpha = sum(1 for k in occ if k % 2 == 0)
        n_beta = len(occ) - n_alpha
        self.sector = SectorSpace(n, len(occ), 0.5 * (n_alpha - n_beta))
        self.h = self.sector.matrix(hamiltonian)
        self.ref = self.sector.project(reference)
        self.occupied = tuple(occ)
        self._gen_cache = {}

    def generator_matrix(self, pool: OperatorPool, k: int):
        key = (id(pool), k)
        if key not in self._gen_cache:
            dense = self.sector.matrix(pool.pauli(k))
            sp = scipy.sparse.csr_matrix(dense)
            # tau^3 = -tau enables the sin/cos closed form for exp(theta*tau)
            t3 = sp @ sp @ sp
            closed = abs(t3 + sp).max() <= 1e-12 * max(1.0, abs(sp).max())
            self._gen_cache[key] = (sp, closed)
        return self._gen_cache[key]

    def apply_exp(self, pool, k, theta, vec, inverse=False):
        tau, closed = self.generator_matrix(pool, k)
        th = -theta if inverse else theta
        if closed:
            t1 = tau @ vec
            return vec + np.sin(th) * t1 + (1.0 - np.cos(th)) * (tau @ t1)
        norm_bound = abs(tau).sum(axis=0).max()
        segments = max(1, int(np.ceil(abs(th) * norm_bound)))
        dt = th / segments
        out = vec
        for _ in range(segments):
            term = out
            acc = out.copy()
            for j in range(1, 40):
                term = (dt / j) * (tau @ term)
                acc = acc + term
                if np.linalg.norm(term) < 1e-13:
                    break
            out = acc
        return out

    def build_state(self, pool, steps, angles=None):
        vec = self.ref.copy()
        for i, (k, theta) in enumerate(steps):
            th = theta if angles is None else angles[i]
            vec = self.apply_exp(pool, k, th, vec)
        return vec

    def energy_and_gradient(self, pool, steps, angles):
        """E(theta) and dE/dtheta via a reverse sweep over the product ansatz."""
        vec = self.build_state(pool, steps, angles)
        bra = self.h @ vec
        energy = float(np.real(np.vdot(vec, bra)))
        grads = np.zeros(len(steps))
        ket = vec
        for i in range(len(steps) - 1, -1, -1):
            k, _ = steps[i]
            tau, _closed = self.generator_matrix(pool, k)
            grads[i] = 2.0 * np.real(np.vdot(bra, tau @ ket))
            ket = self.apply_exp(pool, k, angles[i], ket, inverse=True)
            bra = self.apply_exp(pool, k, angles[i], bra, inverse=True)
        return energy, grads

    def pool_gradient(self, pool, vec):
        hvec = self.h @ vec
        out = np.empty(len(pool))
        for k in range(len(pool)):
            tau, _ = self.generator_matrix(pool, k)
            out[k] = 2.0 * np.real(np.vdot(hvec, tau @ vec))
        return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def pool_gradients(state: StateVector, hamiltonian: PauliSum,
                   pool: OperatorPool) -> np.ndarray:
    """g_k = <psi|[H, tau_k]|psi> (real for Hermitian H, anti-Hermitian tau)."""
    if abs(state.norm() - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    from .qops import _apply_raw
    hpsi = _apply_raw(hamiltonian, state.amplitudes)
    out = np.empty(len(pool))
    for k in range(len(pool)):
        tpsi = _apply_raw(pool.pauli(k), state.amplitudes)
        out[k] = 2.0 * np.real(np.vdot(hpsi, tpsi))
    return out


@dataclass(frozen=True)
class GroundStateAnsatz:
    """Ordered (pool index, angle) steps defining U(theta), plus the result."""

    pool: OperatorPool
    steps: tuple            # ((pool index, angle), ...) first applied first
    energy: float
    state: StateVector      # U(theta)|HF>
    reference_occupied: tuple
    n_qubits: int
    gradient_norms: tuple   # pool-gradient norm per outer iteration
    energies: tuple         # energy per outer iteration
    converged: bool
    warning: str = ""

    @property
    def angles(self) -> np.ndarray:
        return np.array([t for _, t in self.steps])

    def reference_state(self) -> StateVector:
        return prepare_reference(self.n_qubits, self.reference_occupied)

    def engine(self, hamiltonian: PauliSum) -> _SectorEngine:
        return _SectorEngine(hamiltonian, self.reference_state())

    def apply_unitary(self, vec: np.ndarray, engine: _SectorEngine,
                      inverse: bool = False) -> np.ndarray:
        """U(theta) (or its adjoint) applied to sector coordinates."""
        steps = self.steps[::-1] if inverse else self.steps
        out = vec
        for k, theta in steps:
            out = engine.apply_exp(self.pool, k, theta, out, inverse=inverse)
        return out

    def to_json(self) -> str:
        return json.dumps({
            "n_qubits": self.n_qubits,
            "reference_occupied": list(self.reference_occupied),
            "steps": [[list(self.pool.descriptors[k]), theta] for k, theta in self.steps],
            "energy": self.energy,
            "gradient_norms": list(self.gradient_norms),
            "energies": list(self.energies),
            "converged": self.converged,
            "warning": self.warning,
        })


def ansatz_from_json(text: str, hamiltonian: PauliSum) -> GroundStateAnsatz:
    """Rebuild a serialized ansatz and its statevector exactly."""
    data = json.loads(text)
    pool = build_pool(data["n_qubits"])
    desc_index = {d: i for i, d in enumerate(pool.descriptors)}
    steps = tuple((desc_index[tuple(d)], float(theta)) for d, theta in data["steps"])
    ref = prepare_reference(data["n_qubits"], data["reference_occupied"])
    eng = _SectorEngine(hamiltonian, ref)
    vec = eng.build_state(pool, steps)
    state = eng.sector.embed(vec)
    return GroundStateAnsatz(pool, steps, float(data["energy"]), state,
                             tuple(data["reference_occupied"]), data["n_qubits"],
                             tuple(data["gradient_norms"]), tuple(data["energies"]),
                             data["converged"], data.get("warning", ""))


def run_adapt_vqe(hamiltonian: PauliSum, pool: OperatorPool,
                  reference: StateVector, grad_tol: float = 1e-3,
                  max_iters: int = 200, inner_gtol: float = 1e-8) -> GroundStateAnsatz:
    """Grow the ansatz by the largest-|gradient| pool operator, re-optimizing
    all angles each macro-iteration, until the pool-gradient norm < grad_tol.
    """
    if not hamiltonian.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    eng = _SectorEngine(hamiltonian, reference)
    steps = []
    angles = np.zeros(0)
    vec = eng.ref.copy()
    energy = float(np.real(np.vdot(vec, eng.h @ vec)))
    gnorms, energies = [], []
    converged = False
    warning = ""
    for _ in range(max_iters):
        grads = eng.pool_gradient(pool, vec)
        gnorm = float(np.linalg.norm(grads))
        gnorms.append(gnorm)
        energies.append(energy)
        if gnorm < grad_tol:
            converged = True
            break
        k_new = int(np.argmax(np.abs(grads)))  # ties -> lowest pool index
        steps.append((k_new, 0.0))
        x0 = np.append(angles, 0.0)

        def objective(x):
            return eng.energy_and_gradient(pool, steps, x)

        res = scipy.optimize.minimize(objective, x0, jac=True, method="BFGS",
                                      options={"gtol": inner_gtol, "maxiter": 1000})
        if not np.all(np.isfinite(res.x)):
            raise AdaptError("inner optimizer produced non-finite angles")
        angles = res.x
        steps = [(k, th) for (k, _), th in zip(steps, angles)]
        vec = eng.build_state(pool, steps)
        energy = float(np.real(np.vdot(vec, eng.h @ vec)))
    else:
        warning = f"max_iters={max_iters} reached with gradient norm {gnorms[-1]:.3e}"

    state = eng.sector.embed(vec)
    return GroundStateAnsatz(pool, tuple(steps), energy, state,
                             eng.occupied, hamiltonian.n_qubits,
                             tuple(gnorms), tuple(energies), converged, warning)
