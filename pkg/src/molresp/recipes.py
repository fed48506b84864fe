"""Built-in scan recipes and the per-point compute kernels behind the CLI.

Every number a recipe emits comes straight from a module operation; the
functions here only orchestrate and format. Recipe defaults (grids,
geometries, frozen cores, gauge origins) are data, listed in RECIPES, and
are documented in docs/formats.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import eom, oracle, qlr
from .geometries import (h2_dimer_helical, h2_molecule, h4_square, h_chain,
                         lih_molecule, water_molecule, water_single_stretch)
from .oracle import ResonanceError
from .system import build_system

DEFAULT_FREQUENCY_NM = 589.0
EOM_METHODS = ("fci", "q-sc-eom", "q-proj-eom", "qeom", "qse")
RESPONSE_METHODS = ("sos-fci", "qlr-sc", "qlr-proj")


@dataclass(frozen=True)
class Recipe:
    name: str
    kind: str                 # ee | polar | rotation | spectrum | noise | table
    parameter: str            # scan parameter name (with unit suffix)
    grid: tuple
    builder: object           # param value -> Geometry
    methods: tuple
    frozen_core: int = 0
    adapt_grad_tol: float = 1e-3
    adapt_max_iters: int = 200
    origin: tuple = None      # None -> center of nuclear charge
    frequency_nm: float = DEFAULT_FREQUENCY_NM
    notes: str = ""
    extra: dict = field(default_factory=dict)


def _lih_ee_grid():
    return tuple(round(x, 2) for x in np.arange(2.0, 4.01, 0.1))


def _h2_grid():
    return tuple(round(x, 2) for x in np.linspace(0.5, 2.5, 21))


RECIPES = {
    "h2-benchmark": Recipe(
        "h2-benchmark", "table", "bond_angstrom", (0.7,), h2_molecule,
        ("fci", "q-sc-eom", "q-proj-eom", "qeom"),
        adapt_grad_tol=1e-7, origin=(0.0, 0.0, 0.0),
        notes="excitation energies, ground-state overlaps and z transition "
              "dipoles of H2 at 0.7 A; gauge origin pinned to the coordinate "
              "origin (first atom) because the bare-qEOM anomaly cell is "
              "origin dependent"),
    "h2-ee": Recipe(
        "h2-ee", "ee", "bond_angstrom", _h2_grid(), h2_molecule,
        ("fci", "q-sc-eom", "q-proj-eom"), adapt_grad_tol=1e-7),
    "h2-polar": Recipe(
        "h2-polar", "polar", "bond_angstrom", _h2_grid(), h2_molecule,
        RESPONSE_METHODS, adapt_grad_tol=1e-7),
    "lih-ee": Recipe(
        "lih-ee", "ee", "bond_angstrom", _lih_ee_grid(), lih_molecule,
        ("fci",), frozen_core=1,
        notes="S1 crossing of the 589 nm line localizes the resonances"),
    "lih-polar": Recipe(
        "lih-polar", "polar", "bond_angstrom",
        (1.2, 1.6, 2.0, 2.4, 2.9, 3.0, 3.1, 3.2, 3.7, 4.0, 4.5),
        lih_molecule, RESPONSE_METHODS, frozen_core=1, adapt_grad_tol=1e-6,
        notes="three non-resonant windows; resonance points are emitted as "
              "flagged rows if the grid touches one"),
    "h2o-polar": Recipe(
        "h2o-polar", "polar", "r_oh_angstrom",
        (0.958, 1.0, 1.2, 1.5, 1.8, 2.1), water_single_stretch,
        RESPONSE_METHODS,
        notes="one O-H bond stretched, the other fixed at 0.958 A, 104.5 deg "
              "angle; the single-bond mode reproduces the reference error "
              "anatomy where the symmetric mode does not (see notes ledger)"),
    "h2o-polar-sym": Recipe(
        "h2o-polar-sym", "polar", "r_oh_angstrom",
        (0.958, 1.0, 1.2, 1.5, 1.8, 2.1), water_molecule, RESPONSE_METHODS,
        notes="symmetric double stretch variant, kept for comparison"),
    "h2o-spectrum": Recipe(
        "h2o-spectrum", "spectrum", "r_oh_angstrom", (0.958,), water_molecule,
        ("fci", "q-sc-eom", "q-proj-eom"),
        extra={"strength": "oscillator"}),
    "h4-chiral-rotation": Recipe(
        "h4-chiral-rotation", "rotation", "dihedral_deg",
        (0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0, 105.0, 120.0, 135.0,
         150.0, 165.0, 180.0),
        h2_dimer_helical, RESPONSE_METHODS, adapt_grad_tol=1e-5,
        notes="two H2 units, r(H-H)=0.75 A, centroids 1.5 A apart on z, "
              "second unit twisted by the dihedral parameter about z"),
    "h4-ecd": Recipe(
        "h4-ecd", "spectrum", "dihedral_deg", (100.0,), h2_dimer_helical,
        ("fci", "q-sc-eom", "q-proj-eom"), adapt_grad_tol=1e-5,
        extra={"strength": "rotational"}),
    "h6-noise": Recipe(
        "h6-noise", "noise", "bound", (1e-6, 1e-5, 1e-4, 1e-3),
        lambda bond=4.0: h_chain(6, bond), ("q-sc-eom", "q-proj-eom", "qse")),
    "h4-polar-noise": Recipe(
        "h4-polar-noise", "noise", "bound", (1e-6, 1e-5, 1e-4, 1e-3),
        lambda bond=1.5: h4_square(bond), ("qlr-sc", "qlr-proj")),
    "h2-param-noise": Recipe(
        "h2-param-noise", "noise", "epsilon", (1e-5, 1e-4, 1e-3, 1e-2, 1e-1),
        h2_molecule, ("qlr-sc", "qlr-proj"), adapt_grad_tol=1e-6),
}


def build_point(recipe: Recipe, value, origin_override=None):
    geometry = recipe.builder(value)
    origin = origin_override if origin_override is not None else recipe.origin
    system = build_system(geometry, origin=origin, n_frozen_core=recipe.frozen_core)
    ground = None
    if set(recipe.methods) - {"fci", "sos-fci"}:
        ground = system.adapt_ground_state(grad_tol=recipe.adapt_grad_tol,
                                           max_iters=recipe.adapt_max_iters)
    return system, ground


def _fci_rows(system, value, recipe, n_states=None):
    spec = oracle.fci_solve(system.hamiltonian_pauli(), system.n_electrons)
    rows = []
    ee = spec.excitation_energies
    n = len(ee) if n_states is None else min(n_states, len(ee))
    mus = [system.properties.component(f"mu_{c}") for c in "xyz"]
    ms = [system.properties.component(f"m_{c}") for c in "xyz"]
    tmu = np.stack([oracle.transition_moments(spec, m) for m in mus])
    tmag = np.stack([oracle.transition_moments(spec, m) for m in ms])
    for k in range(1, n + 1):
        td = tmu[:, k]
        if abs(td[np.argmax(np.abs(td))]) > 1e-8:
            phase = td[np.argmax(np.abs(td))] / abs(td[np.argmax(np.abs(td))])
            td = td / phase
            tm = tmag[:, k] / phase
        else:
            tm = tmag[:, k]
        os_k = (2.0 / 3.0) * ee[k - 1] * float(np.sum(np.abs(td) ** 2))
        rs_k = float(np.sum(np.imag(td * np.conj(tm))))
        rows.append({
            "parameter": value, "method": "fci", "state": k,
            "multiplicity": spec.multiplicity_label(k),
            "excitation_energy_hartree": ee[k - 1],
            "overlap_with_ground": 0.0,
            "tdip_x_ea0": td[0].real, "tdip_y_ea0": td[1].real,
            "tdip_z_ea0": td[2].real,
            "oscillator_strength": os_k, "rotational_strength_au": rs_k,
        })
    return rows


def _eom_states(system, ground, method):
    hq = system.hamiltonian_pauli()
    if method == "q-sc-eom":
        man = system.manifold("sc")
        return eom.solve_sc(eom.build_sc_matrix(man, ground, hq))
    if method == "q-proj-eom":
        man = system.manifold("proj", ground)
        return eom.solve_proj(eom.build_proj_matrices(man, ground, hq))
    if method == "qeom":
        man = system.manifold("bare")
        return eom.solve_qeom(eom.build_qeom_matrices(man, ground, hq))
    if method == "qse":
        man = system.manifold("bare")
        return eom.solve_qse(man, ground, hq)
    raise ValueError(f"unknown EOM method {method!r}")


def point_energy_rows(system, ground, value, recipe, n_states=None):
    """State-resolved rows (energies, overlaps, moments, strengths)."""
    rows = []
    for method in recipe.methods:
        if method in ("sos-fci", "fci"):
            rows.extend(_fci_rows(system, value, recipe, n_states))
            continue
        states = _eom_states(system, ground, method)
        tdip, os_k, rs_k = eom.transition_properties(states, ground,
                                                     system.properties)
        n = states.size if n_states is None else min(n_states, states.size)
        for k in range(n):
            rows.append({
                "parameter": value, "method": method, "state": k + 1,
                "multiplicity": states.multiplicity_label(k),
                "excitation_energy_hartree": float(states.energies[k]),
                "overlap_with_ground": float(np.real(states.overlaps[k])),
                "tdip_x_ea0": float(tdip[0, k].real),
                "tdip_y_ea0": float(tdip[1, k].real),
                "tdip_z_ea0": float(tdip[2, k].real),
                "oscillator_strength": float(os_k[k]),
                "rotational_strength_au": float(rs_k[k]),
            })
    return rows


def point_response_rows(system, ground, value, recipe, omega,
                        rotation=None):
    """Polarizability (and optionally rotation) rows per method; resonance
    points are flagged rows, not failures."""
    if rotation is None:
        rotation = recipe.kind == "rotation"
    rows = []
    hq = system.hamiltonian_pauli()
    for method in recipe.methods:
        row = {"parameter": value, "method": method, "omega_hartree": omega,
               "resonance_flag": 0}
        try:
            if method == "sos-fci":
                spec = oracle.fci_solve(hq, system.n_electrons)
                obs = oracle.sos_observables(spec, system.properties, omega,
                                             system.molar_mass)
                alpha, alpha_iso = obs.alpha_tensor, obs.alpha_iso
                rot = obs.specific_rotation
                cond = 0.0
            else:
                variant = "sc" if method == "qlr-sc" else "proj"
                man = system.manifold(variant, ground if variant == "proj" else None)
                res = qlr.respond(variant, man, ground, hq, system.properties,
                                  omega, system.molar_mass, rotation=rotation)
                alpha, alpha_iso = res.alpha_tensor, res.alpha_iso
                rot = res.specific_rotation
                cond = res.diagnostics.get("condition", 0.0)
        except ResonanceError as exc:
            row.update({"resonance_flag": 1, "nearest_pole_hartree": exc.nearest})
            rows.append(row)
            continue
        for i, ci in enumerate("xyz"):
            for j, cj in enumerate("xyz"):
                row[f"alpha_{ci}{cj}_au"] = float(alpha[i, j])
        row["alpha_iso_au"] = float(alpha_iso)
        row["condition_estimate"] = float(cond)
        if rotation:
            row["specific_rotation_deg"] = float(rot) if rot is not None else float("nan")
            row["origin_x_bohr"], row["origin_y_bohr"], row["origin_z_bohr"] = (
                float(v) for v in system.properties.origin)
        rows.append(row)
    return rows


def annotate_errors(rows, kind):
    """Attach per-row deviations from the reference method so downstream
    figure tools can plot error panels without computing anything."""
    if kind in ("ee", "table"):
        ref = {(r["parameter"], r["state"]): r["excitation_energy_hartree"]
               for r in rows if r["method"] == "fci"}
        for r in rows:
            key = (r["parameter"], r["state"])
            if r["method"] != "fci" and key in ref:
                r["abs_error_vs_fci_hartree"] = abs(
                    r["excitation_energy_hartree"] - ref[key])
    elif kind in ("polar", "rotation"):
        key_col = ("specific_rotation_deg" if kind == "rotation"
                   else "alpha_iso_au")
        ref = {r["parameter"]: r[key_col] for r in rows
               if r["method"] == "sos-fci" and not r.get("resonance_flag")}
        for r in rows:
            if (r["method"] != "sos-fci" and r["parameter"] in ref
                    and not r.get("resonance_flag")):
                denom = abs(ref[r["parameter"]])
                if denom > 0:
                    r["percent_error_vs_sos"] = (
                        100.0 * abs(r[key_col] - ref[r["parameter"]]) / denom)
    return rows


def point_spectrum_rows(system, ground, value, recipe, lineshape="lorentzian",
                        fwhm: float = 0.01):
    """Stick and broadened-curve rows for UV-Vis or ECD spectra."""
    strength_kind = recipe.extra.get("strength", "oscillator")
    stick_rows, curve_rows = [], []
    all_sticks = {}
    for method in recipe.methods:
        if method == "fci":
            rows = _fci_rows(system, value, recipe)
        else:
            rows = point_energy_rows(system, ground, value,
                                     Recipe(recipe.name, recipe.kind,
                                            recipe.parameter, recipe.grid,
                                            recipe.builder, (method,),
                                            recipe.frozen_core,
                                            recipe.adapt_grad_tol,
                                            recipe.adapt_max_iters,
                                            recipe.origin, recipe.frequency_nm,
                                            extra=recipe.extra))
        key = ("oscillator_strength" if strength_kind == "oscillator"
               else "rotational_strength_au")
        sticks = [(r["excitation_energy_hartree"], r[key]) for r in rows
                  if r["method"] in (method, "fci")]
        all_sticks[method] = sticks
        for e, s in sticks:
            stick_rows.append({"method": method, "energy_hartree": e,
                               "strength": s})
    lo = min(e for st in all_sticks.values() for e, _ in st) - 10 * fwhm
    hi = max(e for st in all_sticks.values() for e, _ in st) + 10 * fwhm
    grid = np.linspace(lo, hi, 1201)
    for method, sticks in all_sticks.items():
        _, curve, _ = eom.broaden_spectrum(sticks, lineshape, fwhm, grid)
        for e, y in zip(grid, curve):
            curve_rows.append({"method": method, "energy_hartree": float(e),
                               "intensity": float(y)})
    return stick_rows, curve_rows
