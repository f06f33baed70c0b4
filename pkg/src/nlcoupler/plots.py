"""Gnuplot script generation for sweep and tomography outputs.

Scripts are written next to the data and reference the CSV files by
relative name, so running ``gnuplot heatmap_p11.gp`` inside the directory
renders ``heatmap_p11.png``. Nothing is rendered by this package itself.
"""

from __future__ import annotations

from pathlib import Path

from .analytic import QUANTITIES
from .errors import CouplerError

SWEEP_FILES = tuple(f"{q}.csv" for q in QUANTITIES)
TOMOGRAPHY_FILES = ("rho_real.csv", "rho_imag.csv")

_TITLES = {
    "p11": "P(both photons in waveguide 1)",
    "p12": "P(one photon in each waveguide)",
    "p22": "P(both photons in waveguide 2)",
    "phase11_rel": "arg(psi11) relative to psi22 [rad]",
    "phase12_rel": "arg(psi12) relative to psi22 [rad]",
    "concurrence": "concurrence",
}


class PlotError(CouplerError):
    """Expected data files are missing; ``missing`` lists them."""

    def __init__(self, directory, missing):
        self.missing = list(missing)
        super().__init__(f"{directory}: no complete sweep or tomography output ({len(self.missing)} files missing)")


def heatmap_script(quantity: str) -> str:
    cb = "set cbrange [0:1]\n" if quantity in ("p11", "p12", "p22", "concurrence") else "set cbrange [-pi:pi]\n"
    return (
        f"# heatmap of {quantity}.csv (columns: delta_phi, delta_beta_over_c, value)\n"
        "set terminal pngcairo size 700,560\n"
        f"set output '{quantity}.png'\n"
        "set datafile separator ','\n"
        "set datafile missing 'nan'\n"
        f"set title '{_TITLES[quantity]}'\n"
        "set xlabel 'delta phi [rad]'\n"
        "set ylabel 'delta beta / c'\n"
        f"{cb}"
        "set palette rgbformulae 33,13,10\n"
        f"plot '{quantity}.csv' skip 1 using 1:2:3 with image notitle\n"
    )


def bar_script(part: str) -> str:
    name = f"rho_{part}"
    label = "Re" if part == "real" else "Im"
    return (
        f"# bar chart of {name}.csv (4x4 density matrix, waveguide basis 11,12,21,22)\n"
        "set terminal pngcairo size 700,480\n"
        f"set output '{name}.png'\n"
        "set datafile separator ','\n"
        f"set title '{label}(rho)'\n"
        "set style data histograms\n"
        "set style histogram clustered gap 1\n"
        "set style fill solid 0.8 border -1\n"
        "set yrange [-0.6:0.6]\n"
        "set key outside right title 'column'\n"
        f"plot for [col=2:5] '{name}.csv' using col:xtic(1) title columnheader(col)\n"
    )


def emit_plots(directory) -> list:
    """Write the scripts matching whichever outputs exist; return the script names."""
    directory = Path(directory)
    if not directory.is_dir():
        raise PlotError(directory, SWEEP_FILES + TOMOGRAPHY_FILES)
    missing_sweep = [f for f in SWEEP_FILES if not (directory / f).is_file()]
    missing_tomo = [f for f in TOMOGRAPHY_FILES if not (directory / f).is_file()]
    has_sweep = len(missing_sweep) < len(SWEEP_FILES)
    has_tomo = len(missing_tomo) < len(TOMOGRAPHY_FILES)
    if not has_sweep and not has_tomo:
        raise PlotError(directory, missing_sweep + missing_tomo)
    missing = (missing_sweep if has_sweep else []) + (missing_tomo if has_tomo else [])
    if missing:
        raise PlotError(directory, missing)

    scripts = {}
    if has_sweep:
        for q in QUANTITIES:
            scripts[f"heatmap_{q}.gp"] = heatmap_script(q)
    if has_tomo:
        for part in ("real", "imag"):
            scripts[f"bars_rho_{part}.gp"] = bar_script(part)
    for name, text in scripts.items():
        (directory / name).write_text(text, encoding="utf-8", newline="\n")
    return list(scripts)
