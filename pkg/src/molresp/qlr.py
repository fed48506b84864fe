"""Quantum linear response: qLR(sc) and qLR(proj).

Sign convention: the response assembly is fixed by requiring exact agreement
with the sum-over-states expression for a complete manifold,

    <<X;Y>>_w = z_X^T (wV - M)^-1 conj(z_Y) - z_Y^T (wV + M)^-1 conj(z_X)

with V = I for the sc variant and z_Y(mu) the variant's Z-vector bracket.
docs/theory_notes.md carries the derivation (the printed signs of the source
equations are mutually inconsistent; the SoS expression is the arbiter).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import CM1_PER_HARTREE, ROTATION_PREFACTOR
from .eom import SubspaceMatrices, _canonical_orthogonalization, _workspace
from .oracle import ResonanceError

__all__ = ["ZVector", "ResponseResult", "build_z_vector",
           "solve_response_separated", "solve_response_combined",
           "polarizability", "optical_rotation", "respond"]

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ZVector:
    variant: str
    name: str                 # "mu_x" ... "m_z"
    values: np.ndarray        # complex, one entry per manifold operator
    path: str = "direct"

    @property
    def operator_type(self) -> int:
        """+1 for a real operator (electric dipole), -1 for purely imaginary."""
        re = float(np.max(np.abs(self.values.real), initial=0.0))
        im = float(np.max(np.abs(self.values.imag), initial=0.0))
        scale = max(re, im, 1e-300)
        if im <= 1e-10 * scale:
            return +1
        if re <= 1e-10 * scale:
            return -1
        raise ValueError(f"Z vector {self.name} has mixed real/imaginary type")


def build_z_vector(variant: str, manifold, ground, hamiltonian, name: str,
                   y_matrix: np.ndarray, path: str = "direct") -> ZVector:
    """Property right-hand-side vector for one operator component.

    sc:   Z(mu) = <0|U+ Y U G_mu|0>
    proj: Z(mu) = <Psi0|Y (G_mu - <G_mu>)|Psi0>
    The measurement path assembles Re[Z] from diagonal expectations on
    |Psi_mu> and |Psi_{0+mu}> states; imaginary parts come from the direct
    bracket (they vanish for real Hamiltonians and real ansatz).
    """
    ws = _workspace(manifold, ground, hamiltonian)
    y_sec = ws.sector.matrix(_one_body_pauli(y_matrix, ws.sector.n_qubits))
    if variant == "sc":
        basis = ws.sc_basis
    elif variant == "proj":
        basis = ws.proj_basis
    else:
        raise ValueError(f"unknown qLR variant {variant!r}")
    direct = (ws.psi0.conj() @ y_sec) @ basis
    if path == "direct":
        values = direct
    elif path == "measurement":
        if variant != "sc":
            raise ValueError("measurement path is defined for the sc variant")
        ypsi0 = y_sec @ ws.psi0
        z0 = np.real(np.vdot(ws.psi0, ypsi0))
        zmu = np.real(np.einsum("ij,ij->j", basis.conj(), y_sec @ basis))
        re = np.empty(manifold.size)
        for mu in range(manifold.size):
            sup = (ws.psi0 + basis[:, mu]) / np.sqrt(2.0)
            zsup = np.real(np.vdot(sup, y_sec @ sup))
            re[mu] = zsup - 0.5 * zmu[mu] - 0.5 * z0
        values = re + 1j * direct.imag
    else:
        raise ValueError(f"unknown path {path!r}")
    return ZVector(variant, name, values, path)


def _one_body_pauli(coeff_matrix, n_qubits):
    from .qops import FermionOperator, jordan_wigner
    return jordan_wigner(FermionOperator.one_body(np.asarray(coeff_matrix)), n_qubits)


# ---------------------------------------------------------------------------
# response solves
# ---------------------------------------------------------------------------

@dataclass
class ResponseResult:
    omega: float
    variant: str
    values: dict                       # (x_name, y_name) -> <<X;Y>>_omega
    alpha_tensor: np.ndarray = None
    alpha_iso: float = None
    gprime_tensor: np.ndarray = None
    beta_bar: float = None
    specific_rotation: float = None
    diagnostics: dict = field(default_factory=dict)


def _reduce(matrices: SubspaceMatrices, threshold=1e-8):
    """Project (M, V) onto the metric's canonical-orthogonal basis."""
    if matrices.variant == "sc" or matrices.v is None:
        return matrices.m, None, 0
    x, dropped = _canonical_orthogonalization(matrices.v, threshold)
    return x.conj().T @ matrices.m @ x, x, dropped


def _solve_refined(a, b):
    """LU solve with one step of iterative refinement."""
    sol = np.linalg.solve(a, b)
    sol += np.linalg.solve(a, b - a @ sol)
    return sol


def _check_condition(a, omega, mt, diagnostics):
    cond = float(np.linalg.cond(a))
    diagnostics["condition"] = max(cond, diagnostics.get("condition", 0.0))
    if cond > CONDITION_LIMIT:
        ee = np.linalg.eigvalsh(0.5 * (mt + mt.conj().T))
        nearest = float(ee[np.argmin(np.abs(ee - abs(omega)))])
        raise ResonanceError(omega, nearest)


def solve_response_separated(variant: str, matrices: SubspaceMatrices,
                             z_x_list, z_y_list, omega: float) -> ResponseResult:
    """<<X;Y>>_omega for all (X, Y) pairs via two shifted linear solves per
    operator: (wV -+ M) u = conj(Z)."""
    mt, x, dropped = _reduce(matrices)
    eye = np.eye(mt.shape[0])
    diagnostics = {"dropped_directions": dropped}
    ops = {}
    for z in list(z_x_list) + list(z_y_list):
        if z.name not in ops:
            ops[z.name] = z
    reduced = {}
    for name, z in ops.items():
        zt = z.values if x is None else x.T @ z.values
        a_minus = omega * eye - mt
        a_plus = omega * eye + mt
        _check_condition(a_minus, omega, mt, diagnostics)
        _check_condition(a_plus, omega, mt, diagnostics)
        u = _solve_refined(a_minus, np.conj(zt))
        w = _solve_refined(a_plus, np.conj(zt))
        reduced[name] = (zt, u, w)
    values = {}
    for zx in z_x_list:
        for zy in z_y_list:
            ztx, _, wx = reduced[zx.name]
            zty, uy, _ = reduced[zy.name]
            values[(zx.name, zy.name)] = complex(ztx @ uy - zty @ wx)
    return ResponseResult(omega, variant, values, diagnostics=diagnostics)


def solve_response_combined(variant: str, matrices: SubspaceMatrices,
                            z_x_list, z_y_list, omega: float) -> ResponseResult:
    """Single-solve form ((M)^2 - w^2 V^2-like) for definite-type operators.

    Falls back to the separated path at w = 0 where the combined system is
    the square of the static one and carries no savings.
    """
    if omega == 0.0:
        out = solve_response_separated(variant, matrices, z_x_list, z_y_list, 0.0)
        out.diagnostics["combined_fallback"] = "separated path used at omega=0"
        return out
    mt, x, dropped = _reduce(matrices)
    eye = np.eye(mt.shape[0])
    diagnostics = {"dropped_directions": dropped}
    a = mt @ mt - omega**2 * eye
    _check_condition(a, omega, mt, diagnostics)
    ops = {}
    for z in list(z_x_list) + list(z_y_list):
        if z.name not in ops:
            ops[z.name] = z
    reduced = {}
    for name, z in ops.items():
        zt = z.values if x is None else x.T @ z.values
        reduced[name] = (zt, _solve_refined(a, zt), z.operator_type)
    values = {}
    for zx in z_x_list:
        for zy in z_y_list:
            ztx, _, sx = reduced[zx.name]
            zty, ey, sy = reduced[zy.name]
            val = -(sx + sy) * (ztx @ (mt @ ey)) - (sy - sx) * omega * (ztx @ ey)
            values[(zx.name, zy.name)] = complex(val)
    return ResponseResult(omega, variant, values, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def polarizability(result: ResponseResult) -> ResponseResult:
    """alpha_ij = -<<mu_i;mu_j>>; isotropic average = trace/3."""
    alpha = np.empty((3, 3))
    for i, ci in enumerate("xyz"):
        for j, cj in enumerate("xyz"):
            val = result.values[(f"mu_{ci}", f"mu_{cj}")]
            alpha[i, j] = -val.real
    result.alpha_tensor = alpha
    result.alpha_iso = float(np.trace(alpha) / 3.0)
    result.diagnostics["alpha_asymmetry"] = float(np.max(np.abs(alpha - alpha.T)))
    return result


def optical_rotation(result: ResponseResult, molar_mass: float) -> ResponseResult:
    """Rosenfeld trace -> beta_bar -> specific rotation (deg dm^-1 (g/mL)^-1)."""
    if result.omega == 0.0:
        raise ValueError("optical rotation is undefined at zero frequency")
    gprime = np.empty((3, 3))
    for i, ci in enumerate("xyz"):
        for j, cj in enumerate("xyz"):
            gprime[i, j] = result.values[(f"mu_{ci}", f"m_{cj}")].imag
    result.gprime_tensor = gprime
    result.beta_bar = float(-np.trace(gprime) / (3.0 * result.omega))
    nu = result.omega * CM1_PER_HARTREE
    result.specific_rotation = float(
        ROTATION_PREFACTOR * nu**2 * result.beta_bar / molar_mass)
    return result


def respond(variant: str, manifold, ground, hamiltonian, properties,
            omega: float, molar_mass: float = None, rotation: bool = True,
            path: str = "direct", method: str = "separated",
            matrices: SubspaceMatrices = None) -> ResponseResult:
    """Full response pipeline for one frequency: polarizability tensor and,
    when `rotation`, the Rosenfeld trace and specific rotation."""
    from .eom import build_proj_matrices, build_sc_matrix

    if matrices is None:
        if variant == "sc":
            matrices = build_sc_matrix(manifold, ground, hamiltonian, path=path)
        elif variant == "proj":
            matrices = build_proj_matrices(manifold, ground, hamiltonian)
        else:
            raise ValueError(f"unknown qLR variant {variant!r}")
    names = [f"mu_{c}" for c in "xyz"] + ([f"m_{c}" for c in "xyz"] if rotation else [])
    zvecs = [build_z_vector(variant, manifold, ground, hamiltonian, nm,
                            properties.component(nm),
                            path=path if variant == "sc" else "direct")
             for nm in names]
    mu_z = zvecs[:3]
    solver = solve_response_separated if method == "separated" else solve_response_combined
    result = solver(variant, matrices, mu_z, zvecs, omega)
    polarizability(result)
    if rotation and omega != 0.0 and molar_mass is not None:
        optical_rotation(result, molar_mass)
    result.diagnostics["path"] = path
    result.diagnostics["method"] = method
    return result
