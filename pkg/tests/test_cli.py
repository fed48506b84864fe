import json
import hashlib
import os

import numpy as np
import pytest

from molresp import cli
from molresp.cli import ConfigError, parse_config_text, validate_config

H2_CONFIG = """
# single-point H2 run
[molecule]
geometry = "H 0 0 0; H 0 0 0.7"
unit = "angstrom"

[model]
adapt_grad_tol = 1e-7

[run]
methods = ["fci", "q-sc-eom", "qlr-sc", "sos-fci"]
frequencies_nm = [589.0]
seed = 11
"""


def test_parse_config_round_trip():
    cfg = parse_config_text(H2_CONFIG)
    assert cfg["molecule"]["geometry"].startswith("H 0 0 0")
    assert cfg["run"]["methods"] == ["fci", "q-sc-eom", "qlr-sc", "sos-fci"]
    assert cfg["run"]["frequencies_nm"] == [589.0]
    assert cfg["model"]["adapt_grad_tol"] == 1e-7
    validate_config(cfg)


def test_parse_config_types():
    cfg = parse_config_text('[run]\nseed = 3\nmethods = ["a", "b"]\n'
                            '[noise]\nhermitize = false\nmagnitude = 1e-4\n')
    assert cfg["run"]["seed"] == 3 and isinstance(cfg["run"]["seed"], int)
    assert cfg["noise"]["hermitize"] is False
    assert cfg["noise"]["magnitude"] == 1e-4


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        validate_config(parse_config_text("[run]\nbogus = 1\n"))
    with pytest.raises(ConfigError, match="unknown config section"):
        validate_config(parse_config_text("[frobnicate]\nx = 1\n"))


def test_charged_systems_rejected():
    with pytest.raises(ConfigError, match="neutral"):
        validate_config(parse_config_text(
            '[molecule]\ngeometry = "H 0 0 0"\ncharge = 1\n'))


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[run]\nbogus = 1\n")
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["run", str(tmp_path / "missing.toml")]) == cli.EXIT_CONFIG
    assert cli.main(["scan", "not-a-recipe"]) == cli.EXIT_CONFIG


@pytest.fixture(scope="module")
def h2_run(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("h2run")
    cfg = outdir / "h2.toml"
    cfg.write_text(H2_CONFIG)
    code = cli.main(["run", str(cfg), "--output", str(outdir / "out")])
    assert code == cli.EXIT_OK
    return outdir / "out", cfg


def _read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [dict(zip(header, line.strip().split(","))) for line in fh]
    return header, rows


def test_run_artifacts_and_manifest(h2_run):
    outdir, _ = h2_run
    for name in ("energies.csv", "response.csv", "ansatz.json", "manifest.json"):
        assert (outdir / name).exists()
    manifest = json.loads((outdir / "manifest.json").read_text())
    for name, digest in manifest["files"].items():
        blob = (outdir / name).read_bytes()
        assert hashlib.sha256(blob).hexdigest() == digest
    assert manifest["software"]["name"] == "molresp"
    assert "tolerances" in manifest and "timings_seconds" in manifest


def test_run_values_traceable_to_modules(h2_run):
    """CSV numbers equal direct module recomputation (no CLI arithmetic)."""
    outdir, _ = h2_run
    _, rows = _read_csv(outdir / "energies.csv")
    fci_rows = [r for r in rows if r["method"] == "fci"]
    from molresp.oracle import fci_solve
    from molresp.system import build_system
    system = build_system("H 0 0 0; H 0 0 0.7")
    spec = fci_solve(system.hamiltonian_pauli(), 2)
    for row, ee in zip(fci_rows, spec.excitation_energies):
        assert abs(float(row["excitation_energy_hartree"]) - ee) < 1e-11
    _, rrows = _read_csv(outdir / "response.csv")
    sos_row = [r for r in rrows if r["method"] == "sos-fci"][0]
    from molresp.constants import nm_to_hartree
    from molresp.oracle import sos_observables
    obs = sos_observables(spec, system.properties, nm_to_hartree(589.0),
                          system.molar_mass)
    assert abs(float(sos_row["alpha_iso_au"]) - obs.alpha_iso) < 1e-10


def test_rerun_is_byte_identical(h2_run, tmp_path):
    outdir, cfg = h2_run
    second = tmp_path / "again"
    code = cli.main(["run", str(cfg), "--output", str(second)])
    assert code == cli.EXIT_OK
    for name in ("energies.csv", "response.csv"):
        assert (outdir / name).read_bytes() == (second / name).read_bytes()


def test_resonance_abort_exit_code(tmp_path):
    from molresp.oracle import fci_solve
    from molresp.system import build_system
    system = build_system("H 0 0 0; H 0 0 0.7")
    ee1 = float(fci_solve(system.hamiltonian_pauli(), 2).excitation_energies[1])
    cfg = tmp_path / "res.toml"
    cfg.write_text(
        '[molecule]\ngeometry = "H 0 0 0; H 0 0 0.7"\n'
        '[model]\nadapt_grad_tol = 1e-7\n'
        '[run]\nmethods = ["qlr-sc"]\n'
        f"frequencies_hartree = [{ee1 + 1e-13}]\n")
    assert cli.main(["run", str(cfg), "--output", str(tmp_path / "o")]) == cli.EXIT_RESONANCE


def test_scan_recipe_small_grid(tmp_path):
    out = tmp_path / "scan"
    code = cli.main(["scan", "h2-ee", "--grid", "0.7", "0.75",
                     "--output", str(out)])
    assert code == cli.EXIT_OK
    header, rows = _read_csv(out / "energies.csv")
    assert set(r["method"] for r in rows) == {"fci", "q-sc-eom", "q-proj-eom"}
    params = sorted(set(float(r["parameter"]) for r in rows))
    assert params == [0.7, 0.75]
    # 3 states x 3 methods x 2 points
    assert len(rows) == 18


def test_spectrum_recipe(tmp_path):
    out = tmp_path / "spec"
    code = cli.main(["spectrum", "h4-ecd", "--output", str(out)])
    assert code == cli.EXIT_OK
    _, sticks = _read_csv(out / "spectrum_sticks.csv")
    _, curve = _read_csv(out / "spectrum_curve.csv")
    assert {r["method"] for r in sticks} == {"fci", "q-sc-eom", "q-proj-eom"}
    assert len(curve) > 100


def test_fcidump_cli_roundtrip(tmp_path):
    cfg = tmp_path / "h2.toml"
    cfg.write_text('[molecule]\ngeometry = "H 0 0 0; H 0 0 0.7"\n')
    dump = tmp_path / "h2.fcidump"
    side = tmp_path / "h2.props"
    assert cli.main(["fcidump", "export", str(dump), "--config", str(cfg),
                     "--properties", str(side)]) == cli.EXIT_OK
    assert cli.main(["fcidump", "import", str(dump)]) == cli.EXIT_OK
    from molresp import fcidump as fd
    ham = fd.read_fcidump(str(dump))
    from molresp.system import build_system
    system = build_system("H 0 0 0; H 0 0 0.7")
    assert np.max(np.abs(ham.h_spatial - system.hamiltonian.h_spatial)) < 1e-12


def test_benchmark_recipe_emits_all_cells(tmp_path):
    out = tmp_path / "t1"
    assert cli.main(["scan", "h2-benchmark", "--output", str(out)]) == cli.EXIT_OK
    _, rows = _read_csv(out / "energies.csv")
    methods = {r["method"] for r in rows}
    assert methods == {"fci", "q-sc-eom", "q-proj-eom", "qeom"}
    assert len(rows) == 12  # 4 methods x 3 states
    qeom_s2 = [r for r in rows if r["method"] == "qeom"][2]
    assert abs(float(qeom_s2["overlap_with_ground"]) - 0.1029) < 5e-4
    assert abs(float(qeom_s2["tdip_z_ea0"]) - (-0.1362)) < 5e-4
    for r in rows:
        if r["method"] != "qeom" or r["state"] != "3":
            assert abs(float(r["overlap_with_ground"])) < 5e-4


def test_recipes_listing(capsys):
    assert cli.main(["recipes"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "h2-ee" in out and "h4-chiral-rotation" in out and "h6-noise" in out


def test_noise_cli_quick(tmp_path):
    out = tmp_path / "noise"
    code = cli.main(["noise", "h2-param-noise", "--trials", "5",
                     "--seed", "3", "--output", str(out)])
    assert code == cli.EXIT_OK
    header, rows = _read_csv(out / "noise.csv")
    assert "mean_percent_error" in header
    assert all(int(r["trials"]) == 5 for r in rows)
