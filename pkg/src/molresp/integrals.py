"""Molecular geometry and analytic STO-3G Gaussian integrals.

McMurchie-Davidson Hermite expansion throughout: one- and two-electron
integrals, Cartesian multipole moments and momentum-derivative integrals all
come from the same 1D expansion tables, so the dipole and angular-momentum
classes need no extra recursion family. Only s and p shells are supported
(enough for H, Li, O in STO-3G); anything higher raises.

Conventions fixed here:
  * positions stored in bohr;
  * AO ordering is atom-major, s before p, p in (x, y, z) order;
  * dipole matrices are -<p|r - origin|q> (electron charge included);
  * angular-momentum matrices store the real factor W with
    <p|(r-origin) x p_op|q> = i*W, i.e. W = Im of the integral; W is real
    antisymmetric and the magnetic-moment operator is m = -(i/2)*W.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, gammainc

from .constants import BOHR_PER_ANGSTROM, ELEMENTS, STO3G

__all__ = [
    "Geometry",
    "BasisSet",
    "AOIntegralSet",
    "load_geometry",
    "build_basis",
    "compute_core_integrals",
    "compute_property_integrals",
]


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Geometry:
    """Nuclear frame: element symbols, charges and positions in bohr."""

    symbols: tuple
    charges: tuple
    coords: np.ndarray  # (n_atoms, 3), bohr

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 3 or coords.shape[0] == 0:
            raise ValueError("coords must be a non-empty (n, 3) array")
        if not np.all(np.isfinite(coords)):
            raise ValueError("non-finite nuclear coordinate")
        if any(z <= 0 for z in self.charges):
            raise ValueError("nuclear charges must be positive")
        object.__setattr__(self, "coords", coords)

    @property
    def n_atoms(self) -> int:
        return len(self.symbols)

    @property
    def center_of_nuclear_charge(self) -> np.ndarray:
        z = np.asarray(self.charges, dtype=float)
        return z @ self.coords / z.sum()

    @property
    def molar_mass(self) -> float:
        return float(sum(ELEMENTS[s][1] for s in self.symbols))

    def translated(self, shift) -> "Geometry":
        return Geometry(self.symbols, self.charges, self.coords + np.asarray(shift, float))

    def nuclear_repulsion(self) -> float:
        e = 0.0
        for i in range(self.n_atoms):
            for j in range(i + 1, self.n_atoms):
                r = np.linalg.norm(self.coords[i] - self.coords[j])
                if r < 1e-10:
                    raise ValueError(f"coincident nuclei {i} and {j}")
                e += self.charges[i] * self.charges[j] / r
        return e


def load_geometry(text: str, unit: str = "angstrom") -> Geometry:
    """Parse `SYMBOL x y z` lines (newline- or semicolon-separated)."""
    unit = unit.lower()
    if unit in ("angstrom", "ang", "a"):
        scale = BOHR_PER_ANGSTROM
    elif unit in ("bohr", "au"):
        scale = 1.0
    else:
        raise ValueError(f"unknown unit {unit!r}")
    symbols, charges, coords = [], [], []
    for raw in text.replace(";", "\n").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"malformed coordinate line: {line!r}")
        sym = parts[0].capitalize()
        if sym not in ELEMENTS:
            raise ValueError(f"unknown element {parts[0]!r}")
        try:
            xyz = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ValueError(f"malformed coordinate line: {line!r}") from exc
        symbols.append(sym)
        charges.append(ELEMENTS[sym][0])
        coords.append(xyz)
    if not symbols:
        raise ValueError("no atoms in geometry text")
    return Geometry(tuple(symbols), tuple(charges), np.asarray(coords) * scale)


# ---------------------------------------------------------------------------
# basis set
# ---------------------------------------------------------------------------

_POWERS = {
    0: [(0, 0, 0)],
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],  # p in x, y, z order
}


@dataclass(frozen=True)
class ContractedAO:
    center: np.ndarray        # (3,), bohr
    powers: tuple             # (lx, ly, lz)
    exponents: np.ndarray     # (n_prim,)
    coefficients: np.ndarray  # (n_prim,), includes all normalization

    @property
    def l_total(self) -> int:
        return sum(self.powers)


@dataclass(frozen=True)
class BasisSet:
    aos: tuple  # of ContractedAO
    geometry: Geometry

    @property
    def n_ao(self) -> int:
        return len(self.aos)


def _primitive_norm(alpha: float, powers) -> float:
    l, m, n = powers
    if l + m + n > 1:
        raise ValueError("only s and p shells are supported")
    norm = (2.0 * alpha / np.pi) ** 0.75
    if l + m + n == 1:
        norm *= 2.0 * np.sqrt(alpha)
    return norm


def build_basis(geometry: Geometry) -> BasisSet:
    """STO-3G basis with normalized contractions, deterministic AO order."""
    aos = []
    for atom, sym in enumerate(geometry.symbols):
        if sym not in STO3G:
            raise ValueError(f"no embedded STO-3G data for element {sym!r}")
        center = geometry.coords[atom]
        for shell in STO3G[sym]:
            kind, prims = shell
            if kind == "S":
                blocks = [(0, [(e, c) for (e, c) in prims])]
            elif kind == "SP":
                blocks = [(0, [(e, cs) for (e, cs, _) in prims]),
                          (1, [(e, cp) for (e, _, cp) in prims])]
            else:
                raise ValueError(f"unsupported shell type {kind!r}")
            for l, prim in blocks:
                for powers in _POWERS[l]:
                    expo = np.array([e for e, _ in prim])
                    if np.any(expo <= 0):
                        raise ValueError("primitive exponents must be positive")
                    coef = np.array([c * _primitive_norm(e, powers) for e, c in prim])
                    ao = ContractedAO(center, powers, expo, coef)
                    self_ov = _pair_overlap(ao, ao)
                    ao = ContractedAO(center, powers, expo, coef / np.sqrt(self_ov))
                    aos.append(ao)
    return BasisSet(tuple(aos), geometry)


# ---------------------------------------------------------------------------
# McMurchie-Davidson kernels
# ---------------------------------------------------------------------------

def _e_table(imax: int, jmax: int, a: float, b: float, ab: float) -> np.ndarray:
    """Hermite expansion coefficients E[i, j, t] for one Cartesian direction."""
    p = a + b
    mu = a * b / p
    xpa = -b * ab / p  # P - A, with ab = A - B
    xpb = a * ab / p   # P - B
    tmax = imax + jmax
    E = np.zeros((imax + 1, jmax + 1, tmax + 2))
    E[0, 0, 0] = np.exp(-mu * ab * ab)
    for i in range(imax):
        for t in range(i + 2):
            E[i + 1, 0, t] = (
                (E[i, 0, t - 1] / (2 * p) if t > 0 else 0.0)
                + xpa * E[i, 0, t]
                + (t + 1) * E[i, 0, t + 1]
            )
    for j in range(jmax):
        for i in range(imax + 1):
            for t in range(i + j + 2):
                E[i, j + 1, t] = (
                    (E[i, j, t - 1] / (2 * p) if t > 0 else 0.0)
                    + xpb * E[i, j, t]
                    + (t + 1) * E[i, j, t + 1]
                )
    return E


def boys(n: int, x: float) -> float:
    """Boys function F_n(x)."""
    if x < 1e-13:
        return 1.0 / (2 * n + 1) - x / (2 * n + 3)
    a = n + 0.5
    return 0.5 * gamma(a) * gammainc(a, x) / x**a


def _hermite_coulomb(tmax: int, umax: int, vmax: int, p: float, pc: np.ndarray) -> np.ndarray:
    """R_{t,u,v} = R^0_{t,u,v}(p, PC) via downward auxiliary-index recursion."""
    nmax = tmax + umax + vmax
    x = p * float(pc @ pc)
    Fn = np.array([boys(n, x) for n in range(nmax + 1)])
    R = np.zeros((nmax + 1, tmax + 1, umax + 1, vmax + 1))
    for n in range(nmax + 1):
        R[n, 0, 0, 0] = (-2.0 * p) ** n * Fn[n]
    for n in range(nmax - 1, -1, -1):
        for t in range(tmax + 1):
            for u in range(umax + 1):
                for v in range(vmax + 1):
                    if t + u + v == 0 or t + u + v > nmax - n:
                        continue
                    if t > 0:
                        val = pc[0] * R[n + 1, t - 1, u, v]
                        if t > 1:
                            val += (t - 1) * R[n + 1, t - 2, u, v]
                    elif u > 0:
                        val = pc[1] * R[n + 1, t, u - 1, v]
                        if u > 1:
                            val += (u - 1) * R[n + 1, t, u - 2, v]
                    else:
                        val = pc[2] * R[n + 1, t, u, v - 1]
                        if v > 1:
                            val += (v - 1) * R[n + 1, t, u, v - 2]
                    R[n, t, u, v] = val
    return R[0]


def _pair_overlap(ao1: ContractedAO, ao2: ContractedAO) -> float:
    val = 0.0
    ab = ao1.center - ao2.center
    for a, ca in zip(ao1.exponents, ao1.coefficients):
        for b, cb in zip(ao2.exponents, ao2.coefficients):
            p = a + b
            s = (np.pi / p) ** 1.5
            for d in range(3):
                E = _e_table(ao1.powers[d], ao2.powers[d], a, b, ab[d])
                s *= E[ao1.powers[d], ao2.powers[d], 0]
            val += ca * cb * s
    return val


# ---------------------------------------------------------------------------
# integral driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AOIntegralSet:
    """All AO-basis integrals needed downstream, plus bookkeeping scalars."""

    overlap: np.ndarray = None
    kinetic: np.ndarray = None
    nuclear: np.ndarray = None
    eri: np.ndarray = None           # chemist convention (pq|rs)
    e_nuc: float = 0.0
    dipole: np.ndarray = None        # (3, n, n): -<p|r-origin|q>
    angmom: np.ndarray = None        # (3, n, n): W with <p|L|q> = i*W
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def with_properties(self, dipole, angmom, origin) -> "AOIntegralSet":
        return AOIntegralSet(self.overlap, self.kinetic, self.nuclear,
                             self.eri, self.e_nuc, dipole, angmom, np.asarray(origin, float))


def _one_electron_tables(ao1, ao2, a, b, jextra=0):
    """Per-direction E tables for a primitive pair, ket side extended by jextra."""
    ab = ao1.center - ao2.center
    return [
        _e_table(ao1.powers[d], ao2.powers[d] + jextra, a, b, ab[d])
        for d in range(3)
    ]


def compute_core_integrals(basis: BasisSet, geometry: Geometry) -> AOIntegralSet:
    """Overlap, kinetic, nuclear attraction, ERI and nuclear repulsion."""
    n = basis.n_ao
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))

    for i in range(n):
        for j in range(i, n):
            ao1, ao2 = basis.aos[i], basis.aos[j]
            la, lb = ao1.powers, ao2.powers
            s = t = v = 0.0
            ab = ao1.center - ao2.center
            for a, ca in zip(ao1.exponents, ao1.coefficients):
                for bexp, cb in zip(ao2.exponents, ao2.coefficients):
                    w = ca * cb
                    p = a + bexp
                    pref = (np.pi / p) ** 0.5
                    E = _one_electron_tables(ao1, ao2, a, bexp, jextra=2)
                    s1d = [pref * E[d][:, :, 0] for d in range(3)]
                    ov = [s1d[d][la[d], lb[d]] for d in range(3)]
                    s += w * ov[0] * ov[1] * ov[2]
                    # 1D kinetic factor from extended overlap table
                    kin = []
                    for d in range(3):
                        jj = lb[d]
                        term = -2.0 * bexp**2 * s1d[d][la[d], jj + 2]
                        term += bexp * (2 * jj + 1) * s1d[d][la[d], jj]
                        if jj >= 2:
                            term -= 0.5 * jj * (jj - 1) * s1d[d][la[d], jj - 2]
                        kin.append(term)
                    t += w * (kin[0] * ov[1] * ov[2] + ov[0] * kin[1] * ov[2]
                              + ov[0] * ov[1] * kin[2])
                    # nuclear attraction via Hermite Coulomb integrals
                    P = (a * ao1.center + bexp * ao2.center) / p
                    tm = [la[d] + lb[d] for d in range(3)]
                    for zc, c in zip(geometry.charges, geometry.coords):
                        R = _hermite_coulomb(tm[0], tm[1], tm[2], p, P - c)
                        acc = 0.0
                        for tt in range(tm[0] + 1):
                            for uu in range(tm[1] + 1):
                                for vv in range(tm[2] + 1):
                                    acc += (E[0][la[0], lb[0], tt]
                                            * E[1][la[1], lb[1], uu]
                                            * E[2][la[2], lb[2], vv]
                                            * R[tt, uu, vv])
                        v -= zc * w * (2.0 * np.pi / p) * acc
            S[i, j] = S[j, i] = s
            T[i, j] = T[j, i] = t
            V[i, j] = V[j, i] = v

    eri = _electron_repulsion(basis)
    return AOIntegralSet(S, T, V, eri, geometry.nuclear_repulsion())


def _electron_repulsion(basis: BasisSet) -> np.ndarray:
    n = basis.n_ao
    eri = np.zeros((n, n, n, n))
    # canonical quartets: i>=j, k>=l, (ij)>=(kl) as pair indices
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    for pi, (i, j) in enumerate(pairs):
        for k, l in pairs[: pi + 1]:
            val = _eri_contracted(basis.aos[i], basis.aos[j], basis.aos[k], basis.aos[l])
            for (p, q, r, s) in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                                 (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)):
                eri[p, q, r, s] = val
    return eri


def _eri_contracted(ao1, ao2, ao3, ao4) -> float:
    la, lb, lc, ld = ao1.powers, ao2.powers, ao3.powers, ao4.powers
    ab = ao1.center - ao2.center
    cd = ao3.center - ao4.center
    val = 0.0
    for a, ca in zip(ao1.exponents, ao1.coefficients):
        for b, cb in zip(ao2.exponents, ao2.coefficients):
            p = a + b
            P = (a * ao1.center + b * ao2.center) / p
            Eab = [_e_table(la[d], lb[d], a, b, ab[d]) for d in range(3)]
            tm = [la[d] + lb[d] for d in range(3)]
            for c, cc in zip(ao3.exponents, ao3.coefficients):
                for dd, cdd in zip(ao4.exponents, ao4.coefficients):
                    q = c + dd
                    Q = (c * ao3.center + dd * ao4.center) / q
                    Ecd = [_e_table(lc[d], ld[d], c, dd, cd[d]) for d in range(3)]
                    sm = [lc[d] + ld[d] for d in range(3)]
                    alpha = p * q / (p + q)
                    R = _hermite_coulomb(tm[0] + sm[0], tm[1] + sm[1], tm[2] + sm[2],
                                         alpha, P - Q)
                    acc = 0.0
                    for t in range(tm[0] + 1):
                        for u in range(tm[1] + 1):
                            for v in range(tm[2] + 1):
                                e_bra = (Eab[0][la[0], lb[0], t]
                                         * Eab[1][la[1], lb[1], u]
                                         * Eab[2][la[2], lb[2], v])
                                if e_bra == 0.0:
                                    continue
                                for tt in range(sm[0] + 1):
                                    for uu in range(sm[1] + 1):
                                        for vv in range(sm[2] + 1):
                                            e_ket = (Ecd[0][lc[0], ld[0], tt]
                                                     * Ecd[1][lc[1], ld[1], uu]
                                                     * Ecd[2][lc[2], ld[2], vv])
                                            if e_ket == 0.0:
                                                continue
                                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                                            acc += e_bra * e_ket * sign * R[t + tt, u + uu, v + vv]
                    pref = 2.0 * np.pi**2.5 / (p * q * np.sqrt(p + q))
                    val += ca * cb * cc * cdd * pref * acc
    return val


def compute_property_integrals(basis: BasisSet, origin=None) -> tuple:
    """Dipole (-<r-origin>) and angular-momentum (Im part) AO matrices.

    Returns (dipole(3,n,n), angmom(3,n,n), origin). Default origin is the
    center of nuclear charge; it must be recorded with any chiroptical result
    because length-gauge rotation is origin dependent in finite bases.
    """
    if origin is None:
        origin = basis.geometry.center_of_nuclear_charge
    origin = np.asarray(origin, dtype=float)
    if not np.all(np.isfinite(origin)):
        raise ValueError("gauge origin must be finite")
    n = basis.n_ao
    dip = np.zeros((3, n, n))
    ang = np.zeros((3, n, n))
    for i in range(n):
        for j in range(n):
            ao1, ao2 = basis.aos[i], basis.aos[j]
            la, lb = ao1.powers, ao2.powers
            mom = np.zeros(3)
            w_acc = np.zeros(3)
            for a, ca in zip(ao1.exponents, ao1.coefficients):
                for b, cb in zip(ao2.exponents, ao2.coefficients):
                    wgt = ca * cb
                    p = a + b
                    pref = (np.pi / p) ** 0.5
                    E = _one_electron_tables(ao1, ao2, a, b, jextra=2)
                    s1d = [pref * E[d][:, :, 0] for d in range(3)]
                    ov = np.array([s1d[d][la[d], lb[d]] for d in range(3)])
                    # moment about origin and d/dx factors, one per direction
                    mo = np.empty(3)
                    dv = np.empty(3)
                    for d in range(3):
                        jj = lb[d]
                        mo[d] = s1d[d][la[d], jj + 1] + (ao2.center[d] - origin[d]) * s1d[d][la[d], jj]
                        dv[d] = -2.0 * b * s1d[d][la[d], jj + 1]
                        if jj >= 1:
                            dv[d] += jj * s1d[d][la[d], jj - 1]
                    mom += wgt * np.array([mo[0] * ov[1] * ov[2],
                                           ov[0] * mo[1] * ov[2],
                                           ov[0] * ov[1] * mo[2]])
                    # W_d = Im <(r-O) x p>_d, assembled from moment*derivative
                    w_acc += wgt * np.array([
                        -(ov[0] * mo[1] * dv[2] - ov[0] * dv[1] * mo[2]),
                        -(dv[0] * ov[1] * mo[2] - mo[0] * ov[1] * dv[2]),
                        -(mo[0] * dv[1] * ov[2] - dv[0] * mo[1] * ov[2]),
                    ])
            dip[:, i, j] = -mom
            ang[:, i, j] = w_acc
    return dip, ang, origin
