"""Parametric geometry builders for the built-in scan recipes.

All constructors take angstrom inputs and return Geometry objects in bohr.
The (H2)2 helical default is documented here because chiroptical results are
meaningless without it: two H2 units with r(H-H) = 0.75 A, unit centroids
separated by 1.5 A along z, first unit along x, second unit rotated by the
`dihedral_deg` twist angle about z.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import BOHR_PER_ANGSTROM
from .integrals import Geometry, load_geometry

__all__ = ["h2_molecule", "lih_molecule", "water_molecule", "h2_dimer_helical",
           "h4_square", "h_chain", "dihedral_angle"]


def h2_molecule(bond_angstrom: float) -> Geometry:
    return load_geometry(f"H 0 0 0; H 0 0 {bond_angstrom}", unit="angstrom")


def lih_molecule(bond_angstrom: float) -> Geometry:
    return load_geometry(f"Li 0 0 0; H 0 0 {bond_angstrom}", unit="angstrom")


def water_molecule(r_oh_angstrom: float, angle_deg: float = 104.5) -> Geometry:
    """C2v water in the xz plane, oxygen at the origin, C2 axis along z."""
    half = math.radians(angle_deg) / 2.0
    x = r_oh_angstrom * math.sin(half)
    z = r_oh_angstrom * math.cos(half)
    return load_geometry(f"O 0 0 0; H {x} 0 {z}; H {-x} 0 {z}", unit="angstrom")


def water_single_stretch(r_oh_angstrom: float, r_fixed: float = 0.958,
                         angle_deg: float = 104.5) -> Geometry:
    """Water with one O-H bond stretched, the other held at equilibrium."""
    half = math.radians(angle_deg) / 2.0
    x1 = r_oh_angstrom * math.sin(half)
    z1 = r_oh_angstrom * math.cos(half)
    x2 = -r_fixed * math.sin(half)
    z2 = r_fixed * math.cos(half)
    return load_geometry(f"O 0 0 0; H {x1} 0 {z1}; H {x2} 0 {z2}", unit="angstrom")


def h2_dimer_helical(dihedral_deg: float, r_hh: float = 0.75,
                     separation: float = 1.5) -> Geometry:
    """Chiral (H2)2: twist the second unit by dihedral_deg about the z axis."""
    a = 0.5 * r_hh
    phi = math.radians(dihedral_deg)
    atoms = [
        ("H", -a, 0.0, 0.0),
        ("H", +a, 0.0, 0.0),
        ("H", -a * math.cos(phi), -a * math.sin(phi), separation),
        ("H", +a * math.cos(phi), +a * math.sin(phi), separation),
    ]
    text = "; ".join(f"{s} {x} {y} {z}" for s, x, y, z in atoms)
    return load_geometry(text, unit="angstrom")


def h4_square(bond_angstrom: float) -> Geometry:
    """Square-planar H4 with the given edge length."""
    a = bond_angstrom / 2.0
    text = f"H {a} {a} 0; H {a} {-a} 0; H {-a} {a} 0; H {-a} {-a} 0"
    return load_geometry(text, unit="angstrom")


def h_chain(n: int, bond_angstrom: float) -> Geometry:
    text = "; ".join(f"H 0 0 {i * bond_angstrom}" for i in range(n))
    return load_geometry(text, unit="angstrom")


def h2_dimer_far(bond_angstrom: float, separation_bohr: float = 100.0) -> Geometry:
    """Two H2 monomers along z separated far enough to be non-interacting."""
    r = bond_angstrom * BOHR_PER_ANGSTROM
    coords = [(0, 0, 0.0), (0, 0, r),
              (0, 0, separation_bohr), (0, 0, separation_bohr + r)]
    text = "; ".join(f"H {x} {y} {z}" for x, y, z in coords)
    return load_geometry(text, unit="bohr")


def dihedral_angle(p1, p2, p3, p4) -> float:
    """Signed dihedral (degrees) of four points."""
    p1, p2, p3, p4 = (np.asarray(p, float) for p in (p1, p2, p3, p4))
    b1, b2, b3 = p2 - p1, p3 - p2, p4 - p3
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    m1 = np.cross(n1, b2 / np.linalg.norm(b2))
    x = n1 @ n2
    y = m1 @ n2
    return math.degrees(math.atan2(y, x))
