"""Perturbative noise laboratory.

Two noise kinds:
  * parameter noise  -- uniform errors on the optimized ansatz angles, ground
    state rebuilt per trial, downstream observable recomputed;
  * matrix-element noise -- uniform errors on every independently measured
    element of the subspace matrices / Z vectors, solves re-run per trial.

Determinism: each trial draws from a Philox stream keyed by (seed, trial),
so reports are bit-identical for a fixed seed regardless of execution order;
aggregation uses compensated (fsum) arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import nm_to_hartree
from .eom import build_proj_matrices, build_qse_matrices, build_sc_matrix
from .qlr import build_z_vector, polarizability, solve_response_separated

__all__ = ["NoiseSpec", "NoiseReport", "perturb_ground_parameters",
           "perturb_subspace_matrices", "run_noise_study"]


@dataclass(frozen=True)
class NoiseSpec:
    kind: str               # "parameter" | "matrix-element"
    magnitude: float        # epsilon or bound
    trials: int
    seed: int
    hermitize: bool = True
    targets: tuple = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.magnitude < 0:
            raise ValueError("noise magnitude must be non-negative")


@dataclass
class NoiseReport:
    spec: NoiseSpec
    baseline: dict                 # observable name -> noiseless value
    mean_percent_error: dict       # observable name -> mean |err| %
    std_percent_error: dict
    mean_abs_error: dict           # same trials, absolute error (for EE
    std_abs_error: dict            # observables whose baselines sit near 0)
    raw: dict = field(default_factory=dict)   # observable name -> per-trial values
    failures: int = 0

    def summary_rows(self):
        for name in sorted(self.baseline):
            yield (name, self.baseline[name], self.mean_percent_error[name],
                   self.std_percent_error[name], self.mean_abs_error[name],
                   self.std_abs_error[name])


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed, spawn_key=(trial,))))


def _mean_std(errors):
    m = math.fsum(errors) / len(errors)
    var = math.fsum((e - m) ** 2 for e in errors) / len(errors)
    return m, math.sqrt(var)


def _aggregate(spec, baseline, raw, failures):
    mean, std, mean_abs, std_abs = {}, {}, {}, {}
    for name, values in raw.items():
        base = baseline[name]
        mean[name], std[name] = _mean_std(
            [100.0 * abs(v - base) / max(abs(base), 1e-300) for v in values])
        mean_abs[name], std_abs[name] = _mean_std([abs(v - base) for v in values])
    return NoiseReport(spec, baseline, mean, std, mean_abs, std_abs, raw, failures)


def perturb_ground_parameters(ansatz, hamiltonian, observable, eps: float,
                              trials: int, seed: int) -> NoiseReport:
    """Uniform U(-eps, eps) noise on every ansatz angle, per trial.

    `observable(vec, engine, angles) -> dict` evaluates the requested
    observables on the rebuilt sector state (default builders live in
    `parameter_noise_study`).
    """
    spec = NoiseSpec("parameter", eps, trials, seed)
    engine = ansatz.engine(hamiltonian)
    angles = ansatz.angles
    base_vec = engine.build_state(ansatz.pool, ansatz.steps)
    baseline = observable(base_vec, engine, angles)
    raw = {name: [] for name in baseline}
    failures = 0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        noisy = angles + rng.uniform(-eps, eps, size=len(angles))
        vec = engine.build_state(ansatz.pool, ansatz.steps, angles=noisy)
        try:
            values = observable(vec, engine, noisy)
        except Exception:
            failures += 1
            continue
        for name, v in values.items():
            raw[name].append(v)
    return _aggregate(spec, baseline, raw, failures)


def _noisy_matrix(mat, bound, rng, hermitize):
    noise = rng.uniform(-bound, bound, size=mat.shape)
    if hermitize and mat.ndim == 2 and mat.shape[0] == mat.shape[1]:
        noise = np.triu(noise)
        noise = noise + np.triu(noise, 1).T
    return mat + noise


def perturb_subspace_matrices(matrices_and_vectors: dict, evaluate, bound: float,
                              trials: int, seed: int,
                              hermitize: bool = True,
                              skip: tuple = ()) -> NoiseReport:
    """Uniform element noise on measured matrices/vectors, re-solving per trial.

    `matrices_and_vectors` maps target name -> ndarray; names in `skip` stay
    noiseless (the "exact overlap" mode). `evaluate(noisy_dict) -> dict` runs
    the downstream eigen/linear solves; a failing trial is counted, not fatal.
    """
    spec = NoiseSpec("matrix-element", bound, trials, seed, hermitize,
                     tuple(sorted(matrices_and_vectors)))
    baseline = evaluate(matrices_and_vectors)
    raw = {name: [] for name in baseline}
    failures = 0
    names = sorted(matrices_and_vectors)
    for t in range(trials):
        rng = _trial_rng(seed, t)
        noisy = {}
        for nm in names:
            arr = matrices_and_vectors[nm]
            if nm in skip:
                noisy[nm] = arr
            else:
                noisy[nm] = _noisy_matrix(arr, bound, rng, hermitize)
        try:
            values = evaluate(noisy)
        except Exception:
            failures += 1
            continue
        for name, v in values.items():
            raw[name].append(v)
    return _aggregate(spec, baseline, raw, failures)


# ---------------------------------------------------------------------------
# built-in studies
# ---------------------------------------------------------------------------

def ee_noise_targets(system, ground, n_states: int = 3):
    """Baseline matrices for the EE noise comparison of sc / proj / QSE."""
    hq = system.hamiltonian_pauli()
    man_sc = system.manifold("sc")
    man_proj = system.manifold("proj", ground)
    man_bare = system.manifold("bare")
    msc = build_sc_matrix(man_sc, ground, hq)
    mproj = build_proj_matrices(man_proj, ground, hq)
    mqse = build_qse_matrices(man_bare, ground, hq)
    targets = {
        "m_sc": msc.m.real.copy(),
        "m_proj": mproj.m.real.copy(),
        "v_proj": mproj.v.real.copy(),
        "h_qse": mqse.h_sub.real.copy(),
        "s_qse": mqse.s_sub.real.copy(),
    }

    def gen_eigvals(m, v, threshold=1e-8):
        vals, vecs = np.linalg.eigh(0.5 * (v + v.T))
        keep = vals > threshold
        if not np.any(keep):
            raise ValueError("metric below threshold")
        x = vecs[:, keep] / np.sqrt(vals[keep])
        mt = x.T @ m @ x
        return np.linalg.eigvalsh(0.5 * (mt + mt.T))

    def evaluate(arrs):
        out = {}
        e_sc = np.linalg.eigvalsh(0.5 * (arrs["m_sc"] + arrs["m_sc"].T))
        for k in range(n_states):
            out[f"q-sc-EOM EE{k + 1}"] = float(e_sc[k])
        e_proj = gen_eigvals(arrs["m_proj"], arrs["v_proj"])
        for k in range(n_states):
            out[f"q-proj-EOM EE{k + 1}"] = float(e_proj[k])
        e_qse = gen_eigvals(arrs["h_qse"], arrs["s_qse"])
        for k in range(n_states):
            out[f"QSE EE{k + 1}"] = float(e_qse[k + 1] - e_qse[0])
        return out

    return targets, evaluate


def qlr_noise_targets(system, ground, omega):
    """Baseline M/V/Z arrays for the polarizability noise comparison."""
    hq = system.hamiltonian_pauli()
    man_sc = system.manifold("sc")
    man_proj = system.manifold("proj", ground)
    msc = build_sc_matrix(man_sc, ground, hq)
    mproj = build_proj_matrices(man_proj, ground, hq)
    names = [f"mu_{c}" for c in "xyz"]
    z_sc = [build_z_vector("sc", man_sc, ground, hq, nm,
                           system.properties.component(nm)) for nm in names]
    z_proj = [build_z_vector("proj", man_proj, ground, hq, nm,
                             system.properties.component(nm)) for nm in names]
    targets = {"m_sc": msc.m.real.copy(), "m_proj": mproj.m.real.copy(),
               "v_proj": mproj.v.real.copy()}
    for z in z_sc:
        targets[f"z_sc_{z.name}"] = z.values.real.copy()
    for z in z_proj:
        targets[f"z_proj_{z.name}"] = z.values.real.copy()

    def evaluate(arrs):
        from .qlr import ZVector
        out = {}
        zs = [ZVector("sc", nm, arrs[f"z_sc_{nm}"].astype(complex)) for nm in names]
        res = solve_response_separated("sc", msc.replace_blocks(m=arrs["m_sc"]),
                                       zs, zs, omega)
        out["qLR(sc) alpha"] = polarizability(res).alpha_iso
        zp = [ZVector("proj", nm, arrs[f"z_proj_{nm}"].astype(complex)) for nm in names]
        res = solve_response_separated(
            "proj", mproj.replace_blocks(m=arrs["m_proj"], v=arrs["v_proj"]),
            zp, zp, omega)
        out["qLR(proj) alpha"] = polarizability(res).alpha_iso
        return out

    return targets, evaluate


def parameter_noise_study(system, ground, eps: float, trials: int, seed: int,
                          omega: float = None) -> NoiseReport:
    """Angle noise propagated to the isotropic alpha of qLR(sc)/qLR(proj).

    The whole response pipeline is rebuilt from the noisy ground state each
    trial (subspace matrices, shifts and Z vectors all inherit the noise).
    """
    import scipy.sparse

    from .eom import SubspaceMatrices
    from .qlr import ZVector
    from .qops import FermionOperator, jordan_wigner

    if omega is None:
        omega = nm_to_hartree(589.0)
    hq = system.hamiltonian_pauli()
    man = system.manifold("sc")
    names = [f"mu_{c}" for c in "xyz"]
    engine = ground.engine(hq)
    sec = engine.sector
    g_mats = [scipy.sparse.csr_matrix(sec.matrix(jordan_wigner(g, system.n_qubits)))
              for g in man.operators]
    mu_mats = [sec.matrix(jordan_wigner(FermionOperator.one_body(
        system.properties.component(nm)), system.n_qubits)) for nm in names]
    b_ref = np.stack([g @ engine.ref for g in g_mats], axis=1)
    eye = np.eye(man.size)

    def observable(vec, eng, angles):
        out = {}
        phi = b_ref
        for i, (k, _) in enumerate(ground.steps):
            phi = eng.apply_exp(ground.pool, k, angles[i], phi)
        e0 = float(np.real(np.vdot(vec, eng.h @ vec)))
        m_sc = phi.conj().T @ (eng.h @ phi) - e0 * eye
        zs = [ZVector("sc", nm, (vec.conj() @ mu_mats[i]) @ phi)
              for i, nm in enumerate(names)]
        res = solve_response_separated("sc", SubspaceMatrices("sc", m=m_sc),
                                       zs, zs, omega)
        out["qLR(sc) alpha"] = polarizability(res).alpha_iso
        x = np.stack([g @ vec for g in g_mats], axis=1)
        shifts = vec.conj() @ x
        b = x - np.outer(vec, shifts)
        m_proj = b.conj().T @ (eng.h @ b) - e0 * (b.conj().T @ b)
        v_proj = b.conj().T @ b
        zp = [ZVector("proj", nm, (vec.conj() @ mu_mats[i]) @ b)
              for i, nm in enumerate(names)]
        res = solve_response_separated(
            "proj", SubspaceMatrices("proj", m=m_proj, v=v_proj), zp, zp, omega)
        out["qLR(proj) alpha"] = polarizability(res).alpha_iso
        return out

    return perturb_ground_parameters(ground, hq, observable, eps, trials, seed)


def run_noise_study(recipe: str, trials: int = 1000, seed: int = 2024,
                    bounds=None, eps_values=None) -> dict:
    """Named noise studies; returns {label: NoiseReport}."""
    from .geometries import h2_molecule, h4_square, h_chain
    from .system import build_system

    reports = {}
    if recipe == "h2-angle-noise":
        eps_values = eps_values or (1e-3, 1e-2)
        bonds = (0.5, 0.75, 1.0, 1.5, 2.0, 2.5)
        for bond in bonds:
            system = build_system(h2_molecule(bond))
            ground = system.adapt_ground_state(grad_tol=1e-6)
            for eps in eps_values:
                rep = parameter_noise_study(system, ground, eps, trials, seed)
                reports[f"H2 r={bond} eps={eps:g}"] = rep
    elif recipe == "h4-matrix-noise":
        bounds = bounds or (1e-6, 1e-5, 1e-4, 1e-3)
        system = build_system(h4_square(1.5))
        ground = system.adapt_ground_state(grad_tol=1e-6)
        omega = nm_to_hartree(589.0)
        targets, evaluate = qlr_noise_targets(system, ground, omega)
        for bound in bounds:
            rep = perturb_subspace_matrices(targets, evaluate, bound, trials, seed)
            reports[f"H4 bound={bound:g}"] = rep
    elif recipe in ("h6-ee-noise", "h6-ee-noise-exact-overlap"):
        bounds = bounds or (1e-6, 1e-5, 1e-4, 1e-3)
        system = build_system(h_chain(6, 4.0))
        ground = system.adapt_ground_state(grad_tol=1e-3, max_iters=80)
        targets, evaluate = ee_noise_targets(system, ground)
        skip = ("v_proj", "s_qse") if recipe.endswith("exact-overlap") else ()
        for bound in bounds:
            rep = perturb_subspace_matrices(targets, evaluate, bound, trials,
                                            seed, skip=skip)
            reports[f"H6 bound={bound:g}"] = rep
    else:
        raise ValueError(f"unknown noise recipe {recipe!r}")
    return reports
