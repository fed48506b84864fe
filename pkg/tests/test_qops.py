import numpy as np
import pytest
import scipy.linalg

from molresp.qops import (FermionOperator, PauliSum, SectorSpace, StateVector,
                          apply_and_expect, apply_exp_generator,
                          apply_pauli_sum, basis_index, expectation,
                          jordan_wigner, number_operator, prepare_reference,
                          prepare_superposition, s_squared_operator,
                          sz_operator)

import oracles


def _random_state(n_qubits, seed=0):
    rng = np.random.RandomState(seed)
    amps = rng.randn(2**n_qubits) + 1j * rng.randn(2**n_qubits)
    return StateVector(amps, n_qubits).normalized()


def _random_pauli_sum(n_qubits, n_terms, seed=0):
    rng = np.random.RandomState(seed)
    terms = {}
    for _ in range(n_terms):
        label = "".join(rng.choice(list("IXYZ")) for _ in range(n_qubits))
        terms[label] = terms.get(label, 0.0) + complex(rng.randn(), rng.randn())
    return PauliSum(n_qubits, terms)


def test_jw_number_operator():
    ps = jordan_wigner(FermionOperator.excitation([0], [0]), 1)
    assert abs(ps.terms.get("I", 0) - 0.5) < 1e-15
    assert abs(ps.terms.get("Z", 0) + 0.5) < 1e-15


def test_jw_hopping_vs_dense_oracle():
    op = FermionOperator.excitation([2], [0])
    op = op + op.dagger()
    ps = jordan_wigner(op, 3)
    assert any("Z" in label and label[1] == "Z" for label in ps.terms)  # parity string
    dense_jw = oracles.pauli_dense(ps)
    dense_ferm = oracles.fermion_dense(op, 3)
    assert np.max(np.abs(dense_jw - dense_ferm)) < 1e-14


def test_jw_adjoint_commutes_with_dagger():
    op = FermionOperator.excitation([3, 1], [0, 2], coeff=0.3 + 0.1j)
    a = jordan_wigner(op, 4).adjoint()
    b = jordan_wigner(op.dagger(), 4)
    diff = a - b
    assert all(abs(c) < 1e-14 for c in diff.terms.values())


def test_jw_index_out_of_range():
    with pytest.raises(ValueError, match="out of qubit range"):
        jordan_wigner(FermionOperator.create(4), 4)


def test_canonical_anticommutation_relations():
    n = 4
    lowering = [oracles.fermion_dense(FermionOperator.annihilate(p), n) for p in range(n)]
    jw = [oracles.pauli_dense(jordan_wigner(FermionOperator.annihilate(p), n))
          for p in range(n)]
    for p in range(n):
        assert np.max(np.abs(lowering[p] - jw[p])) < 1e-14
    for p in range(n):
        for q in range(n):
            anti = jw[p] @ jw[q].conj().T + jw[q].conj().T @ jw[p]
            expected = np.eye(2**n) if p == q else 0.0
            assert np.max(np.abs(anti - expected)) < 1e-13
            anti_aa = jw[p] @ jw[q] + jw[q] @ jw[p]
            assert np.max(np.abs(anti_aa)) < 1e-13


def test_prepare_reference_convention():
    state = prepare_reference(4, [0, 1])
    assert state.amplitudes[0b1100] == 1.0
    nq = jordan_wigner(number_operator(4), 4)
    assert abs(expectation(nq, state) - 2.0) < 1e-14
    with pytest.raises(ValueError, match="duplicate"):
        prepare_reference(4, [1, 1])


def test_apply_and_expect_vs_dense():
    ps = _random_pauli_sum(3, 12, seed=3)
    psi = _random_state(3, seed=4)
    phi = _random_state(3, seed=5)
    dense = oracles.pauli_dense(ps)
    ref = np.vdot(phi.amplitudes, dense @ psi.amplitudes)
    val = apply_and_expect(ps, phi, psi)
    assert abs(val - ref) < 1e-12
    ident = PauliSum.identity(3)
    assert abs(apply_and_expect(ident, psi, psi) - 1.0) < 1e-14


def test_expectation_real_for_real_state():
    psi = StateVector(np.random.RandomState(7).rand(8), 3).normalized()
    x0 = PauliSum.from_label("XII")
    assert isinstance(expectation(x0, psi), float)


def test_hamiltonian_commutes_with_number_and_sz(h2_eq):
    system, _ = h2_eq
    hq = system.hamiltonian_pauli()
    for sym_op in (number_operator(4), sz_operator(4)):
        sym = jordan_wigner(sym_op, 4)
        comm = hq * sym - sym * hq
        psi = _random_state(4, seed=11)
        assert apply_pauli_sum(comm, psi).norm() < 1e-10


def test_exp_generator_identity_norm_and_inverse():
    tau_f = FermionOperator.excitation([2], [0])
    tau = jordan_wigner(tau_f - tau_f.dagger(), 4)
    psi = _random_state(4, seed=2)
    assert np.max(np.abs(apply_exp_generator(psi, tau, 0.0).amplitudes
                         - psi.amplitudes)) == 0.0
    rng = np.random.RandomState(0)
    for theta in rng.uniform(-3, 3, size=5):
        out = apply_exp_generator(psi, tau, theta)
        assert abs(out.norm() - 1.0) < 1e-12
        back = apply_exp_generator(out, tau, -theta)
        assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-12


def test_exp_generator_matches_dense_expm_and_cubic_identity():
    tau_f = FermionOperator.excitation([3, 2], [1, 0])
    tau = jordan_wigner(tau_f - tau_f.dagger(), 4)
    dense = oracles.pauli_dense(tau)
    # excitation-difference generators satisfy tau^3 = -tau
    assert np.max(np.abs(dense @ dense @ dense + dense)) < 1e-13
    psi = _random_state(4, seed=9)
    out = apply_exp_generator(psi, tau, 0.7321)
    ref = scipy.linalg.expm(0.7321 * dense) @ psi.amplitudes
    assert np.max(np.abs(out.amplitudes - ref)) < 1e-12


def test_exp_generator_taylor_fallback_matches_expm():
    # a sum of two non-commuting generators fails tau^3 = -tau on purpose
    t1 = FermionOperator.excitation([2], [0])
    t2 = FermionOperator.excitation([3], [1])
    combo = (t1 - t1.dagger()) + 0.5 * (t2 - t2.dagger())
    tau = jordan_wigner(combo, 4)
    # also exercise the tau^3 != -tau path via an overlapping-index double
    over = FermionOperator.excitation([1, 2], [0, 2])
    tau2 = jordan_wigner(over - over.dagger(), 4)
    for gen in (tau, tau2):
        dense = oracles.pauli_dense(gen)
        psi = _random_state(4, seed=13)
        out = apply_exp_generator(psi, gen, 1.234)
        ref = scipy.linalg.expm(1.234 * dense) @ psi.amplitudes
        assert np.max(np.abs(out.amplitudes - ref)) < 1e-11


def test_exp_generator_rejects_hermitian_input():
    with pytest.raises(ValueError, match="anti-Hermitian"):
        apply_exp_generator(_random_state(2), PauliSum.from_label("XI"), 0.3)


def test_prepare_superposition():
    hf = prepare_reference(4, [0, 1])
    g = FermionOperator.excitation([2], [0])
    sup = prepare_superposition([(None, 1.0), (g, 1.0)], hf)
    assert abs(sup.norm() - 1.0) < 1e-14
    nonzero = np.nonzero(np.abs(sup.amplitudes) > 1e-12)[0]
    assert len(nonzero) == 2
    assert abs(abs(sup.amplitudes[basis_index(4, [0, 1])]) - 1 / np.sqrt(2)) < 1e-12
    g2 = FermionOperator.excitation([3], [1])
    sup2 = prepare_superposition([(g, 1.0), (g2, 1.0)], hf)
    assert abs(sup2.inner(hf)) < 1e-14
    deexc = FermionOperator.excitation([0], [2])
    with pytest.raises(ValueError, match="annihilated"):
        prepare_superposition([(deexc, 1.0)], hf)


def test_pauli_algebra_vs_dense():
    rng = np.random.RandomState(21)
    for seed in range(4):
        a = _random_pauli_sum(3, 6, seed=seed)
        b = _random_pauli_sum(3, 6, seed=seed + 50)
        da, db = oracles.pauli_dense(a), oracles.pauli_dense(b)
        assert np.max(np.abs(oracles.pauli_dense(a * b) - da @ db)) < 1e-12
        assert np.max(np.abs(oracles.pauli_dense(a + b) - (da + db))) < 1e-12
        assert np.max(np.abs(oracles.pauli_dense((a * b).adjoint())
                             - (da @ db).conj().T)) < 1e-12


def test_pauli_simplify_prunes_zeros():
    a = PauliSum.from_label("XY", 1.0)
    b = PauliSum.from_label("XY", -1.0)
    assert len((a + b).terms) == 0


def test_sector_space_dims_and_roundtrip():
    sec = SectorSpace(4, 2, 0.0)
    assert sec.dim == 4
    assert SectorSpace(6, 2, 0.0).dim == 9
    vec = np.arange(1.0, 5.0)
    state = sec.embed(vec)
    assert np.max(np.abs(sec.project(state) - vec)) == 0.0
    with pytest.raises(ValueError, match="empty"):
        SectorSpace(2, 3, 0.5)


def test_sector_matrix_pauli_vs_fermionic():
    rng = np.random.RandomState(5)
    n = 6
    sec = SectorSpace(n, 4, 0.0)
    coeff = rng.randn(n, n)
    coeff = coeff + coeff.T
    op = FermionOperator.one_body(coeff)
    m1 = sec.matrix(jordan_wigner(op, n))
    m2 = sec.fermion_matrix(op)
    assert np.max(np.abs(m1 - m2)) < 1e-13
    two = FermionOperator.excitation([4, 5], [1, 0], 0.7)
    two = two + two.dagger()
    assert np.max(np.abs(sec.matrix(jordan_wigner(two, n))
                         - sec.fermion_matrix(two))) < 1e-13


def test_s_squared_operator_spectrum():
    n = 4
    sec = SectorSpace(n, 2, 0.0)
    s2 = sec.matrix(jordan_wigner(s_squared_operator(n), n))
    vals = np.sort(np.linalg.eigvalsh(s2))
    # two electrons in two spatial orbitals, Sz=0: three singlets + one triplet
    assert np.allclose(vals, [0.0, 0.0, 0.0, 2.0], atol=1e-12)
