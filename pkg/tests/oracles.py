"""Independent test oracles.

Everything here deliberately avoids the production code paths: dense Pauli
matrices come from explicit Kronecker products, and integrals come from
Gauss-Hermite product quadrature (exact for polynomial-times-Gaussian
integrands) plus the 1/r -> Gaussian-transform trick for Coulomb kernels,
instead of the McMurchie-Davidson recursions under test.
"""

import numpy as np

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_dense(pauli_sum) -> np.ndarray:
    """Dense 2^n matrix by explicit Kronecker products (qubit 0 leftmost)."""
    dim = 2**pauli_sum.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for label, coeff in pauli_sum.terms.items():
        mat = np.array([[1.0]], dtype=complex)
        for ch in label:
            mat = np.kron(mat, _PAULI[ch])
        out += coeff * mat
    return out


def fermion_dense(op, n_qubits) -> np.ndarray:
    """Dense matrix of a FermionOperator from explicit JW ladder matrices."""
    dim = 2**n_qubits
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # a on one qubit
    zmat = _PAULI["Z"]
    a_ops = []
    for p in range(n_qubits):
        mat = np.array([[1.0]], dtype=complex)
        for k in range(n_qubits):
            if k < p:
                mat = np.kron(mat, zmat)
            elif k == p:
                mat = np.kron(mat, lower)
            else:
                mat = np.kron(mat, np.eye(2))
        a_ops.append(mat)
    out = np.zeros((dim, dim), dtype=complex)
    for key, coeff in op.terms.items():
        term = np.eye(dim, dtype=complex)
        for p, dag in key:
            term = term @ (a_ops[p].conj().T if dag else a_ops[p])
        out += coeff * term
    return out


# ---------------------------------------------------------------------------
# quadrature integrals
# ---------------------------------------------------------------------------

def _primitive(ao, k):
    return ao.exponents[k], ao.coefficients[k]


def _poly_value(powers, center, pts):
    val = np.ones(len(pts))
    for d in range(3):
        if powers[d]:
            val = val * (pts[:, d] - center[d]) ** powers[d]
    return val


def _ao_primitive_value(ao, k, pts, deriv=None):
    """Value of one normalized primitive; deriv=d gives d/dx_d analytically."""
    alpha, coeff = _primitive(ao, k)
    rel = pts - ao.center
    expo = np.exp(-alpha * np.sum(rel**2, axis=1))
    poly = _poly_value(ao.powers, ao.center, pts)
    if deriv is None:
        return coeff * poly * expo
    dpoly = np.zeros(len(pts))
    if ao.powers[deriv]:
        lowered = list(ao.powers)
        lowered[deriv] -= 1
        dpoly = ao.powers[deriv] * _poly_value(tuple(lowered), ao.center, pts)
    return coeff * (dpoly - 2.0 * alpha * rel[:, deriv] * poly) * expo


def _gh_grid(exponent, center, n):
    """3D Gauss-Hermite nodes/weights for weight exp(-exponent|r-center|^2)."""
    x, w = np.polynomial.hermite.hermgauss(n)
    scale = 1.0 / np.sqrt(exponent)
    pts_1d = [center[d] + scale * x for d in range(3)]
    gx, gy, gz = np.meshgrid(*pts_1d, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    wx, wy, wz = np.meshgrid(w, w, w, indexing="ij")
    weights = (wx * wy * wz).ravel() * scale**3
    # compensate the weight function so plain sums of f(points) integrate f
    comp = np.exp(np.sum(((pts - center) / scale) ** 2, axis=1))
    return pts, weights * comp


def _pair_gaussian(ao1, k1, ao2, k2):
    a, b = ao1.exponents[k1], ao2.exponents[k2]
    p = a + b
    center = (a * ao1.center + b * ao2.center) / p
    return p, center


def quad_one_electron(ao1, ao2, factor=None, nodes=8) -> float:
    """<ao1 | factor(r) | ao2> by per-primitive-pair Gauss-Hermite quadrature.

    `factor(points) -> array` must be polynomial (exactness), default 1.
    """
    total = 0.0
    for k1 in range(len(ao1.exponents)):
        for k2 in range(len(ao2.exponents)):
            p, center = _pair_gaussian(ao1, k1, ao2, k2)
            pts, wts = _gh_grid(p, center, nodes)
            val = _ao_primitive_value(ao1, k1, pts) * _ao_primitive_value(ao2, k2, pts)
            if factor is not None:
                val = val * factor(pts)
            total += float(np.sum(wts * val))
    return total


def quad_overlap(ao1, ao2) -> float:
    return quad_one_electron(ao1, ao2)


def quad_kinetic(ao1, ao2, nodes=8) -> float:
    """T = (1/2) <grad chi1 . grad chi2> (integration-by-parts form)."""
    total = 0.0
    for k1 in range(len(ao1.exponents)):
        for k2 in range(len(ao2.exponents)):
            p, center = _pair_gaussian(ao1, k1, ao2, k2)
            pts, wts = _gh_grid(p, center, nodes)
            acc = np.zeros(len(pts))
            for d in range(3):
                acc += (_ao_primitive_value(ao1, k1, pts, deriv=d)
                        * _ao_primitive_value(ao2, k2, pts, deriv=d))
            total += 0.5 * float(np.sum(wts * acc))
    return total


def quad_moment(ao1, ao2, origin, axis) -> float:
    return quad_one_electron(ao1, ao2, lambda pts: pts[:, axis] - origin[axis])


def quad_derivative(ao1, ao2, axis, nodes=8) -> float:
    total = 0.0
    for k1 in range(len(ao1.exponents)):
        for k2 in range(len(ao2.exponents)):
            p, center = _pair_gaussian(ao1, k1, ao2, k2)
            pts, wts = _gh_grid(p, center, nodes)
            val = (_ao_primitive_value(ao1, k1, pts)
                   * _ao_primitive_value(ao2, k2, pts, deriv=axis))
            total += float(np.sum(wts * val))
    return total


def quad_angmom_stored(ao1, ao2, origin, axis) -> float:
    """W = Im<ao1|(r-O) x p|ao2> assembled from moment*derivative quadratures."""
    j, k = [(1, 2), (2, 0), (0, 1)][axis]

    def term(mom_axis, der_axis, nodes=8):
        total = 0.0
        for k1 in range(len(ao1.exponents)):
            for k2 in range(len(ao2.exponents)):
                p, center = _pair_gaussian(ao1, k1, ao2, k2)
                pts, wts = _gh_grid(p, center, nodes)
                val = (_ao_primitive_value(ao1, k1, pts)
                       * (pts[:, mom_axis] - origin[mom_axis])
                       * _ao_primitive_value(ao2, k2, pts, deriv=der_axis))
                total += float(np.sum(wts * val))
        return total

    return -(term(j, k) - term(k, j))


def _t_nodes(n):
    """Gauss-Legendre nodes for int_0^inf dt via t = u/(1-u)."""
    u, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    t = u / (1.0 - u)
    jac = 1.0 / (1.0 - u) ** 2
    return t, w * jac


def quad_nuclear(ao1, ao2, geometry, nodes=6, t_nodes=160) -> float:
    """-sum_A Z_A <ao1| 1/|r-R_A| |ao2> via the Gaussian transform of 1/r."""
    ts, tw = _t_nodes(t_nodes)
    total = 0.0
    for k1 in range(len(ao1.exponents)):
        for k2 in range(len(ao2.exponents)):
            p, center = _pair_gaussian(ao1, k1, ao2, k2)
            for z, nuc in zip(geometry.charges, geometry.coords):
                for t, w in zip(ts, tw):
                    pe = p + t * t
                    ce = (p * center + t * t * nuc) / pe
                    pts, wts = _gh_grid(pe, ce, nodes)
                    # full integrand; the GH grid factors its exact Gaussian
                    val = (_ao_primitive_value(ao1, k1, pts)
                           * _ao_primitive_value(ao2, k2, pts)
                           * np.exp(-t * t * np.sum((pts - nuc) ** 2, axis=1)))
                    total += -z * w * (2.0 / np.sqrt(np.pi)) * float(np.sum(wts * val))
    return total


def quad_eri(ao1, ao2, ao3, ao4, nodes=3, t_nodes=120) -> float:
    """(ao1 ao2 | ao3 ao4) via the Gaussian transform and nested quadrature.

    Three GH nodes per dimension are exact here (integrand polynomial degree
    <= 4 against the factored Gaussian); only the t integral is approximate.
    """
    ts, tw = _t_nodes(t_nodes)
    total = 0.0
    for k1 in range(len(ao1.exponents)):
        for k2 in range(len(ao2.exponents)):
            p, pc = _pair_gaussian(ao1, k1, ao2, k2)
            for k3 in range(len(ao3.exponents)):
                for k4 in range(len(ao4.exponents)):
                    q, qc = _pair_gaussian(ao3, k3, ao4, k4)
                    for t, w in zip(ts, tw):
                        t2 = t * t
                        gam = q * t2 / (q + t2)
                        pe = p + gam
                        ce = (p * pc + gam * qc) / pe
                        pts1, wts1 = _gh_grid(pe, ce, nodes)
                        qe = q + t2
                        # r2 grids for every r1 node at once: (n1, n2, 3)
                        qce = (q * qc + t2 * pts1) / qe   # (n1, 3)
                        x, wgl = np.polynomial.hermite.hermgauss(nodes)
                        scale = 1.0 / np.sqrt(qe)
                        gx, gy, gz = np.meshgrid(x, x, x, indexing="ij")
                        base = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
                        wx, wy, wz = np.meshgrid(wgl, wgl, wgl, indexing="ij")
                        w2 = (wx * wy * wz).ravel() * scale**3
                        comp2 = np.exp(np.sum(base**2, axis=1))
                        pts2 = qce[:, None, :] + scale * base[None, :, :]
                        flat = pts2.reshape(-1, 3)
                        val2 = (_ao_primitive_value(ao3, k3, flat)
                                * _ao_primitive_value(ao4, k4, flat)
                                * np.exp(-t2 * np.sum(
                                    (flat - np.repeat(pts1, len(base), axis=0)) ** 2,
                                    axis=1)))
                        inner = (val2.reshape(len(pts1), -1) * (w2 * comp2)).sum(axis=1)
                        val1 = (_ao_primitive_value(ao1, k1, pts1)
                                * _ao_primitive_value(ao2, k2, pts1) * inner)
                        total += w * (2.0 / np.sqrt(np.pi)) * float(np.sum(wts1 * val1))
    return total
