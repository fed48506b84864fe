"""Physical constants, unit conversions and embedded atomic data.

All internal arithmetic is in Hartree atomic units. Every unit conversion
used anywhere in the package lives here so that CSV headers, CLI inputs and
test oracles agree on the same numbers.
"""

# CODATA-2018 based
BOHR_PER_ANGSTROM = 1.8897259886
# E(hartree) = HARTREE_NM / lambda(nm); consistent with CM1_PER_HARTREE below
HARTREE_NM = 45.56335
CM1_PER_HARTREE = 219474.63
# specific rotation [deg dm^-1 (g/mL)^-1] = ROTATION_PREFACTOR * nu~^2(cm^-2) * beta(au) / M(g/mol)
ROTATION_PREFACTOR = 1.343e-4

# symbol -> (nuclear charge, standard atomic weight g/mol)
ELEMENTS = {
    "H": (1, 1.008),
    "Li": (3, 6.94),
    "O": (8, 15.999),
}

# STO-3G contraction data, Hehre/Stewart/Pople parametrization as distributed
# with standard basis-set tables. Layout per element: list of shells,
# shell = (type, [(exponent, coefficient), ...]) with type in {"S", "SP"}.
# SP shells share exponents between the s and p contractions:
# (exponent, s-coefficient, p-coefficient).
STO3G = {
    "H": [
        ("S", [(3.42525091, 0.15432897),
               (0.62391373, 0.53532814),
               (0.16885540, 0.44463454)]),
    ],
    "Li": [
        ("S", [(16.1195750, 0.15432897),
               (2.9362007, 0.53532814),
               (0.7946505, 0.44463454)]),
        ("SP", [(0.6362897, -0.09996723, 0.15591627),
                (0.1478601, 0.39951283, 0.60768372),
                (0.0480887, 0.70011547, 0.39195739)]),
    ],
    "O": [
        ("S", [(130.7093200, 0.15432897),
               (23.8088610, 0.53532814),
               (6.4436083, 0.44463454)]),
        ("SP", [(5.0331513, -0.09996723, 0.15591627),
                (1.1695961, 0.39951283, 0.60768372),
                (0.3803890, 0.70011547, 0.39195739)]),
    ],
}


def nm_to_hartree(wavelength_nm: float) -> float:
    if wavelength_nm <= 0:
        raise ValueError("wavelength must be positive")
    return HARTREE_NM / wavelength_nm


def hartree_to_nm(energy_hartree: float) -> float:
    if energy_hartree <= 0:
        raise ValueError("energy must be positive")
    return HARTREE_NM / energy_hartree


def hartree_to_cm1(energy_hartree: float) -> float:
    return energy_hartree * CM1_PER_HARTREE
