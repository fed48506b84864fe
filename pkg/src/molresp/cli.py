"""Config-driven command-line driver.

Subcommands: run, scan, noise, spectrum, fcidump, recipes. Every run writes
CSV artifacts plus a manifest.json (resolved config, versions, tolerances,
timings, sha256 checksums). CSV bodies are byte-identical across reruns with
the same config and seed; wall-clock data lives only in the manifest.

Exit codes: 0 success, 2 config error, 3 convergence failure, 4 resonance
abort (single-point runs only; scans emit flagged rows instead).

The config format is a TOML-compatible subset parsed in-process (sections,
key = value with strings, numbers, booleans and flat arrays; # comments).
docs/formats.md documents the schema and every CSV layout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, fcidump, noise as noise_mod, recipes as rcp
from .adapt import AdaptError
from .constants import nm_to_hartree
from .integrals import load_geometry
from .oracle import ResonanceError
from .scf import ScfConvergenceError
from .system import build_system

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_RESONANCE = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# TOML-subset config parsing
# ---------------------------------------------------------------------------

def _parse_scalar(text: str):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(part) for part in _split_top(inner)]
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        if any(c in text for c in ".eE") and not text.lstrip("+-").isdigit():
            return float(text)
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {text!r}") from exc


def _split_top(text: str):
    parts, depth, start, in_str = [], 0, 0, False
    for i, ch in enumerate(text):
        if ch == '"':
            in_str = not in_str
        elif not in_str:
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(text[start:i])
                start = i + 1
    parts.append(text[start:])
    return [p for p in (s.strip() for s in parts) if p]


def parse_config_text(text: str) -> dict:
    """Parse the TOML-compatible subset into nested dicts."""
    config = {}
    section = config
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip() if '"' not in raw else raw.strip()
        if line.startswith("#") or not line:
            continue
        if '"' in line and "#" in line.split('"')[-1]:
            line = line[: line.rindex("#")].strip()
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            section = config
            for part in name.split("."):
                section = section.setdefault(part, {})
            continue
        if "=" not in line:
            raise ConfigError(f"malformed config line: {raw!r}")
        key, _, value = line.partition("=")
        section[key.strip()] = _parse_scalar(value)
    return config


_SCHEMA = {
    "molecule": {"geometry", "file", "unit", "charge", "multiplicity",
                 "frozen_core"},
    "model": {"basis", "gauge_origin", "adapt_grad_tol", "adapt_max_iters"},
    "run": {"methods", "frequencies_nm", "frequencies_hartree", "output",
            "seed", "n_states"},
    "scan": {"recipe", "grid", "trials"},
    "noise": {"recipe", "kind", "magnitude", "trials", "seed", "hermitize",
              "bounds"},
    "spectrum": {"lineshape", "fwhm", "kind"},
}


def validate_config(config: dict) -> dict:
    for section, keys in config.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(keys, dict):
            raise ConfigError(f"top-level key {section!r} outside a section")
        unknown = set(keys) - _SCHEMA[section]
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{section}]")
    mol = config.get("molecule", {})
    if "geometry" not in mol and "file" not in mol and "scan" not in config:
        raise ConfigError("[molecule] needs geometry=, file=, or a [scan] recipe")
    if mol.get("charge", 0) != 0 or mol.get("multiplicity", 1) != 1:
        raise ConfigError("only neutral closed-shell systems are supported")
    basis = config.get("model", {}).get("basis", "sto-3g")
    if str(basis).lower() != "sto-3g":
        raise ConfigError(f"unsupported basis {basis!r}")
    grid = config.get("scan", {}).get("grid")
    if grid is not None and len(grid) == 0:
        raise ConfigError("empty scan grid")
    return config


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x) + 0.0:.12g}"  # +0.0 folds -0.0 into 0
    return str(x)


def write_csv(path, rows, columns=None):
    if not rows:
        raise ValueError(f"no rows to write for {path}")
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_number(row.get(c, "")) for c in columns) + "\n")
    return path


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


TOLERANCES = {
    "scf_gradient": 1e-10,
    "adapt_inner_gradient": 1e-8,
    "pauli_prune": 1e-14,
    "canonical_orthogonalization": 1e-8,
    "resonance_guard_hartree": 1e-6,
    "condition_limit": 1e12,
}


def write_manifest(outdir, config, files, timings, extra=None):
    manifest = {
        "software": {"name": "molresp", "version": __version__},
        "resolved_config": config,
        "tolerances": TOLERANCES,
        "timings_seconds": timings,
        "files": {os.path.basename(p): _sha256(p) for p in files},
        "created_unix_time": time.time(),
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return validate_config(parse_config_text(fh.read()))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc


def _system_from_config(config):
    mol = config.get("molecule", {})
    text = mol.get("geometry")
    if text is None:
        with open(mol["file"]) as fh:
            text = fh.read()
    origin = config.get("model", {}).get("gauge_origin")
    if isinstance(origin, str):
        if origin != "nuclear_charge_center":
            raise ConfigError(f"unknown gauge_origin {origin!r}")
        origin = None
    geometry = load_geometry(text, mol.get("unit", "angstrom"))
    return build_system(geometry, origin=origin,
                        n_frozen_core=int(mol.get("frozen_core", 0)))


def _frequencies(config):
    run = config.get("run", {})
    freqs = [nm_to_hartree(nm) for nm in run.get("frequencies_nm", [])]
    freqs += [float(w) for w in run.get("frequencies_hartree", [])]
    return freqs or [nm_to_hartree(rcp.DEFAULT_FREQUENCY_NM)]


def cmd_run(args) -> int:
    config = _load_config(args.config)
    run = config.get("run", {})
    outdir = args.output or run.get("output", "molresp_out")
    os.makedirs(outdir, exist_ok=True)
    timings, files = {}, []
    t0 = time.time()
    system = _system_from_config(config)
    timings["build"] = time.time() - t0
    methods = tuple(run.get("methods",
                            ["fci", "q-sc-eom", "q-proj-eom", "sos-fci",
                             "qlr-sc", "qlr-proj"]))
    model = config.get("model", {})
    recipe = rcp.Recipe("run", "custom", "point", (0,), None, methods,
                        adapt_grad_tol=float(model.get("adapt_grad_tol", 1e-3)),
                        adapt_max_iters=int(model.get("adapt_max_iters", 200)))
    ground = None
    t0 = time.time()
    if set(methods) - {"fci", "sos-fci"}:
        ground = system.adapt_ground_state(grad_tol=recipe.adapt_grad_tol,
                                           max_iters=recipe.adapt_max_iters)
        files.append(os.path.join(outdir, "ansatz.json"))
        with open(files[-1], "w") as fh:
            fh.write(ground.to_json())
    timings["adapt"] = time.time() - t0

    eom_methods = [m for m in methods if m in rcp.EOM_METHODS]
    t0 = time.time()
    if eom_methods:
        sub = rcp.Recipe("run", "ee", "point", (0,), None, tuple(eom_methods),
                         adapt_grad_tol=recipe.adapt_grad_tol)
        rows = rcp.point_energy_rows(system, ground, 0, sub,
                                     n_states=run.get("n_states"))
        files.append(write_csv(os.path.join(outdir, "energies.csv"), rows))
    timings["energies"] = time.time() - t0

    resp_methods = [m for m in methods if m in rcp.RESPONSE_METHODS]
    t0 = time.time()
    if resp_methods:
        rows = []
        sub = rcp.Recipe("run", "rotation", "point", (0,), None,
                         tuple(resp_methods), adapt_grad_tol=recipe.adapt_grad_tol)
        for omega in _frequencies(config):
            rows.extend(rcp.point_response_rows(system, ground, 0, sub, omega,
                                                rotation=True))
        for row in rows:
            if row.get("resonance_flag"):
                write_manifest(outdir, config, files, timings,
                               {"aborted": "resonance", "row": row})
                return EXIT_RESONANCE
        files.append(write_csv(os.path.join(outdir, "response.csv"), rows))
    timings["response"] = time.time() - t0
    write_manifest(outdir, config, files, timings)
    return EXIT_OK


def _scan_point(name, value, n_states, fwhm):
    """One grid point of a named recipe; top-level so worker pools can run it."""
    recipe = rcp.RECIPES[name]
    system, ground = rcp.build_point(recipe, value)
    out = {"energy": [], "resp": [], "sticks": [], "curve": []}
    if recipe.kind in ("ee", "table"):
        out["energy"] = rcp.point_energy_rows(system, ground, value, recipe,
                                              n_states)
    elif recipe.kind in ("polar", "rotation"):
        omega = nm_to_hartree(recipe.frequency_nm)
        out["resp"] = rcp.point_response_rows(system, ground, value, recipe,
                                              omega)
    elif recipe.kind == "spectrum":
        out["sticks"], out["curve"] = rcp.point_spectrum_rows(
            system, ground, value, recipe, fwhm=fwhm)
    return out


def cmd_scan(args) -> int:
    name = args.recipe
    if name not in rcp.RECIPES:
        raise ConfigError(f"unknown recipe {name!r} (see `molresp recipes`)")
    recipe = rcp.RECIPES[name]
    if recipe.kind == "noise":
        return cmd_noise(args)
    outdir = args.output or f"molresp_{name}"
    os.makedirs(outdir, exist_ok=True)
    grid = tuple(float(g) for g in args.grid) if args.grid else recipe.grid
    if not grid:
        raise ConfigError("empty scan grid")
    timings, files = {}, []
    energy_rows, resp_rows, stick_rows, curve_rows = [], [], [], []
    t0 = time.time()
    workers = int(os.environ.get("MOLRESP_WORKERS", "1"))
    if workers > 1:
        import concurrent.futures
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_point, [name] * len(grid), grid,
                                    [args.n_states] * len(grid),
                                    [args.fwhm] * len(grid)))
    else:
        results = [_scan_point(name, value, args.n_states, args.fwhm)
                   for value in grid]
    for point in results:  # gathered in grid order regardless of completion
        energy_rows.extend(point["energy"])
        resp_rows.extend(point["resp"])
        stick_rows.extend(point["sticks"])
        curve_rows.extend(point["curve"])
    timings["scan"] = time.time() - t0
    if energy_rows:
        rcp.annotate_errors(energy_rows, recipe.kind)
        files.append(write_csv(os.path.join(outdir, "energies.csv"), energy_rows))
    if resp_rows:
        rcp.annotate_errors(resp_rows, recipe.kind)
        kind = "rotation" if recipe.kind == "rotation" else "polarizability"
        files.append(write_csv(os.path.join(outdir, f"{kind}.csv"), resp_rows))
    if stick_rows:
        files.append(write_csv(os.path.join(outdir, "spectrum_sticks.csv"), stick_rows))
        files.append(write_csv(os.path.join(outdir, "spectrum_curve.csv"), curve_rows))
    write_manifest(outdir, {"scan": {"recipe": name, "grid": list(grid)}},
                   files, timings)
    return EXIT_OK


def cmd_noise(args) -> int:
    name = args.recipe
    mapping = {"h6-noise": "h6-ee-noise",
               "h6-noise-exact-overlap": "h6-ee-noise-exact-overlap",
               "h4-polar-noise": "h4-matrix-noise",
               "h2-param-noise": "h2-angle-noise",
               "h2-angle-noise": "h2-angle-noise",
               "h4-matrix-noise": "h4-matrix-noise",
               "h6-ee-noise": "h6-ee-noise",
               "h6-ee-noise-exact-overlap": "h6-ee-noise-exact-overlap"}
    if name not in mapping:
        raise ConfigError(f"unknown noise recipe {name!r}")
    outdir = args.output or f"molresp_{name}"
    os.makedirs(outdir, exist_ok=True)
    t0 = time.time()
    reports = noise_mod.run_noise_study(mapping[name], trials=args.trials,
                                        seed=args.seed)
    rows = []
    for label, report in reports.items():
        for (obs, base, mean_pct, std_pct, mean_abs, std_abs) in report.summary_rows():
            rows.append({
                "recipe": name, "case": label, "observable": obs,
                "magnitude": report.spec.magnitude,
                "trials": report.spec.trials, "seed": report.spec.seed,
                "baseline": base, "mean_percent_error": mean_pct,
                "std_percent_error": std_pct, "mean_abs_error": mean_abs,
                "std_abs_error": std_abs, "failures": report.failures,
            })
    files = [write_csv(os.path.join(outdir, "noise.csv"), rows)]
    write_manifest(outdir, {"noise": {"recipe": name, "trials": args.trials,
                                      "seed": args.seed}}, files,
                   {"noise": time.time() - t0})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    name = args.recipe
    if name not in rcp.RECIPES or rcp.RECIPES[name].kind != "spectrum":
        raise ConfigError(f"unknown spectrum recipe {name!r}")
    return cmd_scan(args)


def cmd_fcidump(args) -> int:
    if args.action == "export":
        config = _load_config(args.config)
        system = _system_from_config(config)
        fcidump.write_fcidump(args.path, system.hamiltonian)
        if args.properties:
            fcidump.write_property_sidecar(args.properties, system.properties)
        return EXIT_OK
    ham = fcidump.read_fcidump(args.path)
    print(f"NORB={ham.h_spatial.shape[0]} NELEC={ham.n_electrons} "
          f"E_NUC={ham.e_nuc:.12f}")
    return EXIT_OK


def cmd_recipes(_args) -> int:
    for name, rec in sorted(rcp.RECIPES.items()):
        grid = f"{len(rec.grid)} x {rec.parameter}"
        print(f"{name:20s} kind={rec.kind:9s} {grid:24s} methods={','.join(rec.methods)}")
        if rec.notes:
            print(f"{'':20s} {rec.notes}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="molresp",
        description="Molecular ground states, excited states and response "
                    "properties on an exact statevector simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single-geometry pipeline from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--output", default=None)
    p_run.set_defaults(func=cmd_run)

    p_scan = sub.add_parser("scan", help="built-in scan recipe")
    p_scan.add_argument("recipe")
    p_scan.add_argument("--output", default=None)
    p_scan.add_argument("--grid", nargs="*", type=float, default=None)
    p_scan.add_argument("--n-states", type=int, default=None)
    p_scan.add_argument("--fwhm", type=float, default=0.01)
    p_scan.add_argument("--trials", type=int, default=1000)
    p_scan.add_argument("--seed", type=int, default=2024)
    p_scan.set_defaults(func=cmd_scan)

    p_noise = sub.add_parser("noise", help="perturbative noise study")
    p_noise.add_argument("recipe")
    p_noise.add_argument("--output", default=None)
    p_noise.add_argument("--trials", type=int, default=1000)
    p_noise.add_argument("--seed", type=int, default=2024)
    p_noise.set_defaults(func=cmd_noise)

    p_spec = sub.add_parser("spectrum", help="stick + broadened spectrum recipe")
    p_spec.add_argument("recipe")
    p_spec.add_argument("--output", default=None)
    p_spec.add_argument("--grid", nargs="*", type=float, default=None)
    p_spec.add_argument("--n-states", type=int, default=None)
    p_spec.add_argument("--fwhm", type=float, default=0.01)
    p_spec.set_defaults(func=cmd_spectrum)

    p_fd = sub.add_parser("fcidump", help="FCIDUMP interchange")
    p_fd.add_argument("action", choices=["export", "import"])
    p_fd.add_argument("path")
    p_fd.add_argument("--config", default=None)
    p_fd.add_argument("--properties", default=None)
    p_fd.set_defaults(func=cmd_fcidump)

    p_rec = sub.add_parser("recipes", help="list built-in recipes")
    p_rec.set_defaults(func=cmd_recipes)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScfConvergenceError, AdaptError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ResonanceError as exc:
        print(f"resonance abort: {exc}", file=sys.stderr)
        return EXIT_RESONANCE


if __name__ == "__main__":
    sys.exit(main())
