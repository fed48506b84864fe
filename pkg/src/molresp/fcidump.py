"""FCIDUMP interchange plus a property sidecar.

Standard layout: `&FCI NORB=..,NELEC=..,MS2=..` header, then one record per
line, `value i j k l` with 1-based indices and chemist-convention (ij|kl)
spatial integrals; `value i j 0 0` carries h_ij and `value 0 0 0 0` the
nuclear repulsion. Values are written with 20 significant digits so a
round trip preserves coefficients to 1e-12.

The sidecar uses the same spatial 1-based index convention: `DX i j value`
(dipole components, -<i|r-origin|j>) and `LX i j value` (angular-momentum
stored factors W, <i|L|j> = i*W), after an `ORIGIN x y z` line.
"""

from __future__ import annotations

import numpy as np

from .scf import SpinOrbitalHamiltonian, spin_orbital_hamiltonian

__all__ = ["write_fcidump", "read_fcidump", "write_property_sidecar",
           "read_property_sidecar"]


def write_fcidump(path: str, ham: SpinOrbitalHamiltonian, tol: float = 1e-14):
    n = ham.h_spatial.shape[0]
    ms2 = 0
    with open(path, "w") as fh:
        fh.write(f"&FCI NORB={n},NELEC={ham.n_electrons},MS2={ms2},\n")
        fh.write("  ORBSYM=" + ",".join(["1"] * n) + ",\n")
        fh.write("  ISYM=1,\n")
        fh.write("&END\n")
        eri = ham.eri_spatial
        for i in range(n):
            for j in range(i + 1):
                for k in range(i + 1):
                    lmax = j if k == i else k
                    for l in range(lmax + 1):
                        v = eri[i, j, k, l]
                        if abs(v) > tol:
                            fh.write(f"{v:.20e} {i+1} {j+1} {k+1} {l+1}\n")
        for i in range(n):
            for j in range(i + 1):
                v = ham.h_spatial[i, j]
                if abs(v) > tol:
                    fh.write(f"{v:.20e} {i+1} {j+1} 0 0\n")
        fh.write(f"{ham.e_nuc:.20e} 0 0 0 0\n")
    return path


def read_fcidump(path: str) -> SpinOrbitalHamiltonian:
    header = ""
    records = []
    with open(path) as fh:
        in_header = True
        for line in fh:
            if in_header:
                header += line
                if "&END" in line.upper() or "/" == line.strip():
                    in_header = False
                continue
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 5:
                raise ValueError(f"malformed FCIDUMP record: {line!r}")
            records.append((float(parts[0]), *(int(p) for p in parts[1:])))
    fields = {}
    for token in header.replace("&FCI", "").replace("&END", "").replace("\n", ",").split(","):
        token = token.strip()
        if "=" in token:
            key, _, value = token.partition("=")
            fields[key.strip().upper()] = value
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
    except (KeyError, ValueError) as exc:
        raise ValueError("FCIDUMP header missing NORB/NELEC") from exc
    if int(fields.get("MS2", "0")) != 0:
        raise ValueError("only MS2=0 FCIDUMP files are supported")

    h = np.zeros((norb, norb))
    eri = np.zeros((norb, norb, norb, norb))
    e_nuc = 0.0
    for value, i, j, k, l in records:
        if i == 0:
            e_nuc = value
        elif k == 0:
            if not (1 <= i <= norb and 1 <= j <= norb):
                raise ValueError(f"orbital index out of range for NORB={norb}")
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        else:
            if max(i, j, k, l) > norb:
                raise ValueError(f"orbital index out of range for NORB={norb}")
            ii, jj, kk, ll = i - 1, j - 1, k - 1, l - 1
            for (p, q, r, s) in ((ii, jj, kk, ll), (jj, ii, kk, ll),
                                 (ii, jj, ll, kk), (jj, ii, ll, kk),
                                 (kk, ll, ii, jj), (ll, kk, ii, jj),
                                 (kk, ll, jj, ii), (ll, kk, jj, ii)):
                eri[p, q, r, s] = value
    return spin_orbital_hamiltonian(h, eri, e_nuc, nelec)


def write_property_sidecar(path: str, properties, tol: float = 1e-14):
    """Spatial-orbital dipole and angular-momentum records."""
    mu_spatial = properties.mu[:, ::2, ::2]
    l_spatial = -2.0 * properties.m_stored[:, ::2, ::2]  # m = -L/2
    n = mu_spatial.shape[1]
    with open(path, "w") as fh:
        fh.write(f"NORB {n}\n")
        fh.write("ORIGIN " + " ".join(f"{v:.20e}" for v in properties.origin) + "\n")
        for tag, block in (("D", mu_spatial), ("L", l_spatial)):
            for axis, comp in enumerate("XYZ"):
                for i in range(n):
                    for j in range(n):
                        v = block[axis, i, j]
                        if abs(v) > tol:
                            fh.write(f"{tag}{comp} {i+1} {j+1} {v:.20e}\n")
    return path


def read_property_sidecar(path: str):
    """Returns (mu_spatial(3,n,n), l_spatial(3,n,n), origin)."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if not lines or lines[0][0] != "NORB":
        raise ValueError("sidecar missing NORB header")
    n = int(lines[0][1])
    origin = np.array([float(v) for v in lines[1][1:4]])
    mu = np.zeros((3, n, n))
    lmat = np.zeros((3, n, n))
    for parts in lines[2:]:
        tag, i, j, value = parts[0], int(parts[1]) - 1, int(parts[2]) - 1, float(parts[3])
        axis = "XYZ".index(tag[1])
        if tag[0] == "D":
            mu[axis, i, j] = value
        elif tag[0] == "L":
            lmat[axis, i, j] = value
        else:
            raise ValueError(f"unknown sidecar tag {tag!r}")
    return mu, lmat, origin
