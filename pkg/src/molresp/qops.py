"""Fermion-to-qubit mapping, Pauli algebra and the exact statevector engine.

Conventions (fixed, relied on everywhere):
  * qubit k <-> spin orbital k (interleaved spin: alpha even, beta odd);
  * qubit 0 is the leftmost ket label, i.e. the occupation of orbital k is
    bit (n-1-k) of the amplitude index, so |1100> on 4 qubits is index 12;
  * Jordan-Wigner: a_p -> Z_0..Z_{p-1} (X_p + i Y_p)/2.

`SectorSpace` compiles operators to dense matrices on an (N, S_z) occupation
sector. Every operator in this package (Hamiltonian, excitation generators,
dipole and magnetic-moment operators) conserves both quantum numbers, so the
sector restriction is exact; it is what makes the 12-14 qubit systems cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "FermionOperator",
    "PauliSum",
    "StateVector",
    "SectorSpace",
    "jordan_wigner",
    "prepare_reference",
    "apply_pauli_sum",
    "apply_and_expect",
    "expectation",
    "apply_exp_generator",
    "prepare_superposition",
]

PRUNE_TOL = 1e-14


# ---------------------------------------------------------------------------
# fermionic operators
# ---------------------------------------------------------------------------

class FermionOperator:
    """Sum of products of creation/annihilation operators.

    Terms map tuple((index, is_creation), ...) -> complex coefficient; factor
    order in the tuple is operator order (leftmost acts last on a ket).
    """

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    # constructors ---------------------------------------------------------
    @classmethod
    def create(cls, p: int, coeff=1.0):
        return cls({((p, True),): coeff})

    @classmethod
    def annihilate(cls, p: int, coeff=1.0):
        return cls({((p, False),): coeff})

    @classmethod
    def identity(cls, coeff=1.0):
        return cls({(): coeff})

    @classmethod
    def excitation(cls, creators, annihilators, coeff=1.0):
        """a+_c1 a+_c2 ... a_a1 a_a2 ... in the given order."""
        key = tuple((p, True) for p in creators) + tuple((p, False) for p in annihilators)
        return cls({key: coeff})

    @classmethod
    def one_body(cls, coeff_matrix):
        op = cls()
        mat = np.asarray(coeff_matrix)
        for p, q in zip(*np.nonzero(np.abs(mat) > PRUNE_TOL)):
            op.terms[((int(p), True), (int(q), False))] = complex(mat[p, q])
        return op

    @classmethod
    def two_body_antisym(cls, g):
        """(1/4) sum_pqrs <pq||rs> a+_p a+_q a_s a_r."""
        op = cls()
        idx = np.nonzero(np.abs(g) > PRUNE_TOL)
        for p, q, r, s in zip(*idx):
            key = ((int(p), True), (int(q), True), (int(s), False), (int(r), False))
            op.terms[key] = op.terms.get(key, 0.0) + 0.25 * complex(g[p, q, r, s])
        return op

    # algebra ---------------------------------------------------------------
    def __add__(self, other):
        out = FermionOperator(self.terms)
        for k, v in other.terms.items():
            out.terms[k] = out.terms.get(k, 0.0) + v
        return out

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out = FermionOperator()
            for k1, v1 in self.terms.items():
                for k2, v2 in other.terms.items():
                    key = k1 + k2
                    out.terms[key] = out.terms.get(key, 0.0) + v1 * v2
            return out
        out = FermionOperator({k: v * other for k, v in self.terms.items()})
        return out

    __rmul__ = __mul__

    def dagger(self):
        out = FermionOperator()
        for key, v in self.terms.items():
            new = tuple((p, not dag) for (p, dag) in reversed(key))
            out.terms[new] = out.terms.get(new, 0.0) + np.conj(v)
        return out

    def max_index(self) -> int:
        return max((p for key in self.terms for (p, _) in key), default=-1)

    def __repr__(self):
        items = [f"{v:+.6g} {''.join(f'a{p}^' if d else f'a{p}' for p, d in k) or '1'}"
                 for k, v in sorted(self.terms.items(), key=lambda kv: kv[0])]
        return " ".join(items) if items else "0"


def hamiltonian_operator(ham) -> FermionOperator:
    """Second-quantized molecular Hamiltonian from a SpinOrbitalHamiltonian."""
    op = FermionOperator.identity(ham.e_nuc)
    op = op + FermionOperator.one_body(ham.h)
    op = op + FermionOperator.two_body_antisym(ham.g_antisym)
    return op


def number_operator(n: int) -> FermionOperator:
    return FermionOperator.one_body(np.eye(n))


def sz_operator(n: int) -> FermionOperator:
    d = np.zeros((n, n))
    for p in range(n):
        d[p, p] = 0.5 if p % 2 == 0 else -0.5
    return FermionOperator.one_body(d)


def s_squared_operator(n: int) -> FermionOperator:
    """S^2 = S- S+ + S_z (S_z + 1)."""
    sp = FermionOperator()
    for p in range(0, n, 2):
        if p + 1 < n:
            sp = sp + FermionOperator({((p, True), (p + 1, False)): 1.0})
    sm = sp.dagger()
    sz = sz_operator(n)
    return sm * sp + sz * sz + sz


# ---------------------------------------------------------------------------
# Pauli sums
# ---------------------------------------------------------------------------

_PAULI_MUL = {}
for _a, _b, _c, _ph in [
    ("I", "I", "I", 1), ("I", "X", "X", 1), ("I", "Y", "Y", 1), ("I", "Z", "Z", 1),
    ("X", "I", "X", 1), ("Y", "I", "Y", 1), ("Z", "I", "Z", 1),
    ("X", "X", "I", 1), ("Y", "Y", "I", 1), ("Z", "Z", "I", 1),
    ("X", "Y", "Z", 1j), ("Y", "X", "Z", -1j),
    ("Y", "Z", "X", 1j), ("Z", "Y", "X", -1j),
    ("Z", "X", "Y", 1j), ("X", "Z", "Y", -1j),
]:
    _PAULI_MUL[(_a, _b)] = (_c, _ph)


class PauliSum:
    """Weighted sum of Pauli strings on a fixed qubit count."""

    def __init__(self, n_qubits: int, terms=None):
        self.n_qubits = n_qubits
        self.terms = dict(terms) if terms else {}
        self._compiled = None

    @classmethod
    def identity(cls, n_qubits, coeff=1.0):
        return cls(n_qubits, {"I" * n_qubits: coeff})

    @classmethod
    def from_label(cls, label: str, coeff=1.0):
        return cls(len(label), {label: coeff})

    def copy(self):
        return PauliSum(self.n_qubits, self.terms)

    def simplify(self, tol=PRUNE_TOL):
        return PauliSum(self.n_qubits,
                        {k: v for k, v in self.terms.items() if abs(v) > tol})

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return PauliSum(self.n_qubits, out).simplify()

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            if self.n_qubits != other.n_qubits:
                raise ValueError("qubit count mismatch")
            out = {}
            for s1, c1 in self.terms.items():
                for s2, c2 in other.terms.items():
                    phase = 1.0 + 0.0j
                    letters = []
                    for a, b in zip(s1, s2):
                        l, ph = _PAULI_MUL[(a, b)]
                        letters.append(l)
                        phase *= ph
                    key = "".join(letters)
                    out[key] = out.get(key, 0.0) + phase * c1 * c2
            return PauliSum(self.n_qubits, out).simplify()
        return PauliSum(self.n_qubits, {k: v * other for k, v in self.terms.items()})

    __rmul__ = __mul__

    def adjoint(self):
        return PauliSum(self.n_qubits, {k: np.conj(v) for k, v in self.terms.items()})

    def is_hermitian(self, tol=1e-10) -> bool:
        return all(abs(v.imag) <= tol * max(1.0, abs(v)) for v in
                   (complex(c) for c in self.terms.values()))

    def is_anti_hermitian(self, tol=1e-10) -> bool:
        return all(abs(v.real) <= tol * max(1.0, abs(v)) for v in
                   (complex(c) for c in self.terms.values()))

    def coeff_norm(self) -> float:
        return float(sum(abs(v) for v in self.terms.values()))

    def compiled(self):
        """Per-term (flip_mask, zy_mask, effective coefficient) arrays."""
        if self._compiled is None:
            n = self.n_qubits
            flips, zys, coeffs = [], [], []
            for label, c in self.terms.items():
                flip = zy = 0
                ny = 0
                for k, letter in enumerate(label):
                    bit = 1 << (n - 1 - k)
                    if letter == "X":
                        flip |= bit
                    elif letter == "Y":
                        flip |= bit
                        zy |= bit
                        ny += 1
                    elif letter == "Z":
                        zy |= bit
                # phase(s) = i^{ny} * (-1)^{popcount(s & zy)}
                coeffs.append(complex(c) * (1j) ** ny)
                flips.append(flip)
                zys.append(zy)
            self._compiled = (np.array(flips, dtype=np.uint64),
                              np.array(zys, dtype=np.uint64),
                              np.array(coeffs, dtype=complex))
        return self._compiled

    def __repr__(self):
        parts = [f"({v:.6g})*{k}" for k, v in sorted(self.terms.items())]
        return " + ".join(parts) if parts else f"PauliSum({self.n_qubits}, 0)"


def jordan_wigner(op: FermionOperator, n_qubits: int) -> PauliSum:
    """Exact Jordan-Wigner image of a fermionic operator."""
    if op.max_index() >= n_qubits:
        raise ValueError("operator index out of qubit range")
    total = PauliSum(n_qubits)
    factor_cache = {}

    def ladder(p, dag):
        if (p, dag) not in factor_cache:
            z = "Z" * p
            pad = "I" * (n_qubits - p - 1)
            x = PauliSum(n_qubits, {z + "X" + pad: 0.5})
            y = PauliSum(n_qubits, {z + "Y" + pad: -0.5j if dag else 0.5j})
            factor_cache[(p, dag)] = x + y
        return factor_cache[(p, dag)]

    for key, coeff in op.terms.items():
        term = PauliSum.identity(n_qubits, coeff)
        for p, dag in key:
            term = term * ladder(p, dag)
        total = total + term
    return total.simplify()


# ---------------------------------------------------------------------------
# statevectors
# ---------------------------------------------------------------------------

@dataclass
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError("amplitude length must be 2**n_qubits")
        self.amplitudes = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-14:
            raise ValueError("cannot normalize a null vector")
        return StateVector(self.amplitudes / n, self.n_qubits)

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, norm={self.norm():.6f})"


_IDX_CACHE = {}


def _indices(n_qubits: int) -> np.ndarray:
    if n_qubits not in _IDX_CACHE:
        _IDX_CACHE[n_qubits] = np.arange(2**n_qubits, dtype=np.uint64)
    return _IDX_CACHE[n_qubits]


def basis_index(n_qubits: int, occupied) -> int:
    idx = 0
    for k in occupied:
        if not 0 <= k < n_qubits:
            raise ValueError(f"orbital index {k} out of range")
        idx |= 1 << (n_qubits - 1 - k)
    return idx


def prepare_reference(n_qubits: int, occupied) -> StateVector:
    """Computational basis state with the given spin orbitals occupied."""
    occupied = list(occupied)
    if len(set(occupied)) != len(occupied):
        raise ValueError("duplicate orbital index")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[basis_index(n_qubits, occupied)] = 1.0
    return StateVector(amps, n_qubits)


def _apply_raw(op: PauliSum, amps: np.ndarray) -> np.ndarray:
    n = op.n_qubits
    idx = _indices(n)
    flips, zys, coeffs = op.compiled()
    out = np.zeros_like(amps)
    for flip, zy, c in zip(flips, zys, coeffs):
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & zy) & 1)
        g = signs * amps
        if flip:
            out += c * g[(idx ^ flip).astype(np.int64)]
        else:
            out += c * g
    return out


def apply_pauli_sum(op: PauliSum, state: StateVector) -> StateVector:
    if op.n_qubits != state.n_qubits:
        raise ValueError("dimension mismatch")
    return StateVector(_apply_raw(op, state.amplitudes), state.n_qubits)


def apply_and_expect(op: PauliSum, bra: StateVector, ket: StateVector) -> complex:
    """<bra|op|ket>, exact up to floating point."""
    if not (op.n_qubits == bra.n_qubits == ket.n_qubits):
        raise ValueError("dimension mismatch")
    return complex(np.vdot(bra.amplitudes, _apply_raw(op, ket.amplitudes)))


def expectation(op: PauliSum, state: StateVector, hermitian=True) -> float | complex:
    val = apply_and_expect(op, state, state)
    if hermitian:
        if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
            raise ValueError(f"expectation of Hermitian operator not real: {val}")
        return float(val.real)
    return val


def apply_exp_generator(state: StateVector, generator: PauliSum, theta: float,
                        check: bool = True) -> StateVector:
    """exp(theta*generator)|state> for an anti-Hermitian generator.

    Uses the sin/cos closed form when tau^3 = -tau holds on the state (true
    for excitation-difference generators), otherwise a scaled truncated
    Taylor series with 1e-13 error control.
    """
    if check and not generator.is_anti_hermitian():
        raise ValueError("generator is not anti-Hermitian")
    if theta == 0.0:
        return StateVector(state.amplitudes.copy(), state.n_qubits)
    amps = state.amplitudes
    t1 = _apply_raw(generator, amps)
    n1 = np.linalg.norm(t1)
    if n1 < 1e-15:
        return StateVector(amps.copy(), state.n_qubits)
    t2 = _apply_raw(generator, t1)
    t3 = _apply_raw(generator, t2)
    if np.linalg.norm(t3 + t1) <= 1e-12 * n1:
        out = amps + np.sin(theta) * t1 + (1.0 - np.cos(theta)) * t2
        return StateVector(out, state.n_qubits)
    # scaled Taylor fallback
    segments = max(1, int(np.ceil(abs(theta) * generator.coeff_norm())))
    dt = theta / segments
    out = amps.copy()
    for _ in range(segments):
        term = out.copy()
        acc = out.copy()
        for k in range(1, 40):
            term = (dt / k) * _apply_raw(generator, term)
            acc += term
            if np.linalg.norm(term) < 1e-13:
                break
        out = acc
    return StateVector(out, state.n_qubits)


def prepare_superposition(components, reference: StateVector,
                          n_qubits=None) -> StateVector:
    """Normalized sum_i w_i Op_i |reference>; Op may be None for identity."""
    n = n_qubits or reference.n_qubits
    acc = np.zeros_like(reference.amplitudes)
    for op, weight in components:
        if op is None:
            acc += weight * reference.amplitudes
            continue
        if isinstance(op, FermionOperator):
            op = jordan_wigner(op, n)
        acc += weight * _apply_raw(op, reference.amplitudes)
    vec = StateVector(acc, n)
    if vec.norm() < 1e-12:
        raise ValueError("superposition annihilated the reference")
    return vec.normalized()


# ---------------------------------------------------------------------------
# (N, S_z) sector compilation
# ---------------------------------------------------------------------------

class SectorSpace:
    """Dense-matrix compilation of operators on an (N, S_z) occupation sector."""

    def __init__(self, n_qubits: int, n_electrons: int, sz: float = 0.0):
        n_alpha = round(n_electrons / 2 + sz)
        n_beta = n_electrons - n_alpha
        alphas = list(range(0, n_qubits, 2))
        betas = list(range(1, n_qubits, 2))
        if not (0 <= n_alpha <= len(alphas) and 0 <= n_beta <= len(betas)):
            raise ValueError("empty (N, S_z) sector")
        states = []
        for occ_a in combinations(alphas, n_alpha):
            for occ_b in combinations(betas, n_beta):
                states.append(basis_index(n_qubits, occ_a + occ_b))
        self.n_qubits = n_qubits
        self.n_electrons = n_electrons
        self.sz = sz
        self.states = np.array(sorted(states), dtype=np.uint64)
        self.dim = len(self.states)

    # vector embedding -------------------------------------------------------
    def embed(self, vec: np.ndarray) -> StateVector:
        amps = np.zeros(2**self.n_qubits, dtype=complex)
        amps[self.states.astype(np.int64)] = vec
        return StateVector(amps, self.n_qubits)

    def project(self, state: StateVector) -> np.ndarray:
        return state.amplitudes[self.states.astype(np.int64)]

    def basis_position(self, full_index: int) -> int:
        pos = int(np.searchsorted(self.states, full_index))
        if pos >= self.dim or self.states[pos] != full_index:
            raise ValueError("basis state not in sector")
        return pos

    # operator compilation ----------------------------------------------------
    def matrix(self, op: PauliSum) -> np.ndarray:
        """Sector-restricted dense matrix of a sector-conserving PauliSum."""
        if op.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        flips, zys, coeffs = op.compiled()
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        src = self.states
        cols = np.arange(self.dim)
        for flip, zy, c in zip(flips, zys, coeffs):
            signs = 1.0 - 2.0 * (np.bitwise_count(src & zy) & 1)
            tgt = src ^ flip
            pos = np.searchsorted(src, tgt)
            pos_c = np.minimum(pos, self.dim - 1)
            valid = src[pos_c] == tgt
            mat[pos_c[valid], cols[valid]] += c * signs[valid]
        return mat

    def fermion_matrix(self, op: FermionOperator) -> np.ndarray:
        """Direct second-quantized matrix, independent of the JW mapping."""
        n = self.n_qubits
        below = [sum(1 << (n - 1 - q) for q in range(p)) for p in range(n)]
        index = {int(s): i for i, s in enumerate(self.states)}
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        for key, coeff in op.terms.items():
            for j, s in enumerate(self.states):
                bits = int(s)
                sign = 1.0
                dead = False
                for p, dag in reversed(key):
                    bit = 1 << (n - 1 - p)
                    occupied = bits & bit
                    if dag:
                        if occupied:
                            dead = True
                            break
                    else:
                        if not occupied:
                            dead = True
                            break
                    if bin(bits & below[p]).count("1") % 2:
                        sign = -sign
                    bits ^= bit
                if dead:
                    continue
                i = index.get(bits)
                if i is not None:
                    mat[i, j] += coeff * sign
        return mat
