"""Figure rendering from molresp CSV artifacts.

Every plotted y-series is taken verbatim from an input CSV column (the test
suite lints this); the only transformation figgen ever applies is the
optional nm <-> hartree x-axis conversion, which must round-trip.

Curve kinds get the two-panel layout: values below, log-scale |error| above
with a shaded tolerance band. Error panels use a symmetric log floor of
1e-14 so exact-zero errors stay visible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figgen"  # deterministic SVG ids
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schema import SchemaError, read_csv, require_columns, rows_where  # noqa: E402

HARTREE_NM = 45.56335
ERROR_FLOOR = 1e-14

KINDS = ("ee-curve", "polar-curve", "rotation-curve", "spectrum", "noise")

_METHOD_STYLE = {
    "fci": dict(color="0.55", lw=2.5, zorder=1),
    "sos-fci": dict(color="0.55", lw=2.5, zorder=1),
    "q-sc-eom": dict(color="tab:blue", lw=1.2),
    "q-proj-eom": dict(color="tab:orange", lw=1.2, ls="--"),
    "qeom": dict(color="tab:green", lw=1.2, ls=":"),
    "qse": dict(color="tab:red", lw=1.2, ls="-."),
    "qlr-sc": dict(color="tab:blue", lw=1.2),
    "qlr-proj": dict(color="tab:orange", lw=1.2, ls="--"),
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple                  # CSV paths; spectrum takes (sticks, curve)
    output: str
    shade_below: float = None      # error-panel shaded tolerance
    x_unit: str = None             # "nm" converts hartree x axes
    title: str = ""
    image_format: str = "svg"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("figure spec needs at least one input CSV")


@dataclass
class RenderRecord:
    """What was plotted, for the no-derived-series lint."""
    figure: object
    series: list = field(default_factory=list)  # (axes-role, label, values)

    def add(self, role, label, values):
        self.series.append((role, label, list(values)))


def _style(method):
    return dict(_METHOD_STYLE.get(method, dict(lw=1.2)))


def _two_panel(title):
    fig, (ax_err, ax_val) = plt.subplots(
        2, 1, sharex=True, figsize=(5.2, 4.6),
        gridspec_kw={"height_ratios": [1, 2.2], "hspace": 0.08})
    if title:
        ax_err.set_title(title)
    ax_err.set_yscale("log")
    return fig, ax_err, ax_val


def _finish_error_panel(ax_err, shade_below, ylabel):
    if shade_below:
        ax_err.axhspan(ERROR_FLOOR, shade_below, color="0.92", zorder=0)
    ax_err.set_ylim(bottom=ERROR_FLOOR)
    ax_err.set_ylabel(ylabel)


def _save(fig, spec):
    # strip volatile metadata so identical inputs give identical bytes
    fig.savefig(spec.output, format=spec.image_format,
                metadata={"Date": None} if spec.image_format == "svg" else None)
    plt.close(fig)


def _floored(values):
    return [max(abs(v), ERROR_FLOOR) for v in values]


def render(spec: FigureSpec) -> RenderRecord:
    handler = {
        "ee-curve": _render_ee,
        "polar-curve": _render_response_curve,
        "rotation-curve": _render_response_curve,
        "spectrum": _render_spectrum,
        "noise": _render_noise,
    }[spec.kind]
    return handler(spec)


def _render_ee(spec: FigureSpec) -> RenderRecord:
    table = read_csv(spec.inputs[0])
    require_columns(table, "ee-curve", spec.inputs[0])
    fig, ax_err, ax_val = _two_panel(spec.title)
    record = RenderRecord(fig)
    methods = sorted(set(table["method"]))
    states = sorted(set(int(s) for s in table["state"]))
    for method in methods:
        for state in states:
            sub = rows_where(table, method=method, state=float(state))
            if not sub["parameter"]:
                continue
            order = np.argsort(sub["parameter"])
            x = [sub["parameter"][i] for i in order]
            y = [sub["excitation_energy_hartree"][i] for i in order]
            label = method if state == states[0] else None
            ax_val.plot(x, y, label=label, **_style(method))
            record.add("value", f"{method}/state{state}", y)
            if method != "fci" and "abs_error_vs_fci_hartree" in sub:
                err = [sub["abs_error_vs_fci_hartree"][i] for i in order]
                if not any(np.isnan(err)):
                    ax_err.plot(x, _floored(err), **_style(method))
                    record.add("error", f"{method}/state{state}", err)
    _finish_error_panel(ax_err, spec.shade_below, "|EE error| ($E_h$)")
    ax_val.set_xlabel("scan parameter")
    ax_val.set_ylabel("excitation energy ($E_h$)")
    ax_val.legend(fontsize=8)
    _save(fig, spec)
    return record


def _render_response_curve(spec: FigureSpec) -> RenderRecord:
    value_col = ("specific_rotation_deg" if spec.kind == "rotation-curve"
                 else "alpha_iso_au")
    table = read_csv(spec.inputs[0])
    require_columns(table, spec.kind, spec.inputs[0])
    fig, ax_err, ax_val = _two_panel(spec.title)
    record = RenderRecord(fig)
    for method in sorted(set(table["method"])):
        sub = rows_where(table, method=method, resonance_flag=0.0) \
            if "resonance_flag" in table else rows_where(table, method=method)
        if not sub["parameter"]:
            continue
        order = np.argsort(sub["parameter"])
        x = [sub["parameter"][i] for i in order]
        y = [sub[value_col][i] for i in order]
        ax_val.plot(x, y, label=method, **_style(method))
        record.add("value", method, y)
        if method != "sos-fci" and "percent_error_vs_sos" in sub:
            err = [sub["percent_error_vs_sos"][i] for i in order]
            if err and not any(np.isnan(err)):
                ax_err.plot(x, _floored(err), **_style(method))
                record.add("error", method, err)
    _finish_error_panel(ax_err, spec.shade_below, "% error vs SoS")
    ax_val.set_xlabel("scan parameter")
    ax_val.set_ylabel("isotropic $\\alpha$ (au)" if value_col == "alpha_iso_au"
                      else "specific rotation (deg)")
    ax_val.legend(fontsize=8)
    _save(fig, spec)
    return record


def _hartree_axis(values, x_unit):
    if x_unit == "nm":
        converted = [HARTREE_NM / v for v in values]
        back = [HARTREE_NM / v for v in converted]
        assert max(abs(a - b) for a, b in zip(values, back)) < 1e-12
        return converted
    return values


def _render_spectrum(spec: FigureSpec) -> RenderRecord:
    if len(spec.inputs) < 2:
        raise SchemaError("spectrum kind needs sticks and curve CSVs")
    sticks = read_csv(spec.inputs[0])
    curve = read_csv(spec.inputs[1])
    require_columns(sticks, "spectrum-sticks", spec.inputs[0])
    require_columns(curve, "spectrum-curve", spec.inputs[1])
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    record = RenderRecord(fig)
    if spec.title:
        ax.set_title(spec.title)
    for method in sorted(set(curve["method"])):
        sub = rows_where(curve, method=method)
        x = _hartree_axis(sub["energy_hartree"], spec.x_unit)
        ax.plot(x, sub["intensity"], label=method, **_style(method))
        record.add("value", f"curve/{method}", sub["intensity"])
    for method in sorted(set(sticks["method"])):
        sub = rows_where(sticks, method=method)
        x = _hartree_axis(sub["energy_hartree"], spec.x_unit)
        style = _style(method)
        markerline, stemlines, _ = ax.stem(x, sub["strength"])
        plt.setp(stemlines, color=style.get("color", "k"), linewidth=0.8)
        plt.setp(markerline, color=style.get("color", "k"), markersize=2.5)
        record.add("sticks", f"sticks/{method}", sub["strength"])
    ax.set_xlabel("wavelength (nm)" if spec.x_unit == "nm" else "energy ($E_h$)")
    ax.set_ylabel("intensity")
    ax.legend(fontsize=8)
    _save(fig, spec)
    return record


def _render_noise(spec: FigureSpec) -> RenderRecord:
    table = read_csv(spec.inputs[0])
    require_columns(table, "noise", spec.inputs[0])
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    record = RenderRecord(fig)
    if spec.title:
        ax.set_title(spec.title)
    err_col = ("mean_abs_error"
               if len(set(table["observable"])) > 2 else "mean_percent_error")
    for obs in sorted(set(table["observable"])):
        sub = rows_where(table, observable=obs)
        order = np.argsort(sub["magnitude"])
        x = [sub["magnitude"][i] for i in order]
        y = [sub[err_col][i] for i in order]
        ax.plot(x, _floored(y), marker="o", ms=3, label=obs)
        record.add("value", obs, y)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("noise magnitude")
    ax.set_ylabel(err_col.replace("_", " "))
    ax.legend(fontsize=7)
    _save(fig, spec)
    return record
