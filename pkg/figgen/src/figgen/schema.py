"""CSV schemas figgen consumes, and a small typed reader.

figgen talks to the simulation package only through these documented CSV
layouts (docs/formats.md over there); it never imports it.
"""

from __future__ import annotations

REQUIRED_COLUMNS = {
    "ee-curve": ("parameter", "method", "state", "excitation_energy_hartree"),
    "polar-curve": ("parameter", "method", "alpha_iso_au"),
    "rotation-curve": ("parameter", "method", "specific_rotation_deg"),
    "spectrum-sticks": ("method", "energy_hartree", "strength"),
    "spectrum-curve": ("method", "energy_hartree", "intensity"),
    "noise": ("case", "observable", "magnitude", "mean_percent_error",
              "mean_abs_error"),
}


class SchemaError(ValueError):
    pass


def read_csv(path: str) -> dict:
    """Column-oriented read; numeric where possible, strings otherwise."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise SchemaError(f"{path}: empty CSV")
        columns = header.split(",")
        data = {c: [] for c in columns}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise SchemaError(f"{path}: ragged row {line!r}")
            for c, v in zip(columns, parts):
                data[c].append(v)
    if not next(iter(data.values()), []):
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for c, values in data.items():
        try:
            # blank cells (columns absent for some methods) become NaN
            out[c] = [float(v) if v != "" else float("nan") for v in values]
        except ValueError:
            out[c] = values
    return out


def require_columns(table: dict, kind: str, path: str):
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in table]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing} for {kind}")


def rows_where(table: dict, **conditions):
    n = len(next(iter(table.values())))
    keep = []
    for i in range(n):
        if all(table[k][i] == v for k, v in conditions.items()):
            keep.append(i)
    return {c: [vals[i] for i in keep] for c, vals in table.items()}
