"""Figure builders: one function per figure id, all pure CSV -> image."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

C_M2_TO_UC_CM2 = 1e2   # C/m^2 -> uC/cm^2
A_TO_PA = 1e12

# Fixed style: no rcParams leakage, no timestamps, reproducible SVG ids.
_STYLE = {
    "figure.figsize": (4.8, 3.6),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "ftjfigs",
    "lines.linewidth": 1.4,
}


class FigureError(Exception):
    """Raised for missing/empty/malformed input CSVs."""


def _read_csv(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise FigureError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FigureError(f"empty input file (no data rows): {path}")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise FigureError(
            f"{path}: missing columns {missing}; found {list(rows[0])}")
    return {c: np.array([float(r[c]) for r in rows]) for c in required}


def _save(fig, out_base: Path) -> list[Path]:
    written = []
    for ext in ("png", "svg"):
        p = out_base.with_suffix(f".{ext}")
        fig.savefig(p, metadata={"Date": None} if ext == "svg" else None)
        written.append(p)
    plt.close(fig)
    return written


def fig3(run_dir: Path, out_base: Path) -> list[Path]:
    """Hysteresis loop: Q [uC/cm^2] vs mean ferroelectric voltage [V]."""
    d = _read_csv(run_dir / "qvf.csv", ["t", "V_T", "V_F_mean", "Q"])
    fig, ax = plt.subplots()
    ax.plot(d["V_F_mean"], d["Q"] * C_M2_TO_UC_CM2, color="tab:blue")
    ax.set_xlabel(r"$V_F$ (V)")
    ax.set_ylabel(r"$Q$ ($\mu$C/cm$^2$)")
    ax.set_title("Charge vs ferroelectric voltage")
    return _save(fig, out_base)


def fig4(run_dir: Path, out_base: Path) -> list[Path]:
    """Program/read waveform and switched fraction, with minor-loop inset."""
    d = _read_csv(run_dir / "trace.csv", ["t", "V_T", "P_mean", "Q", "f_UP"])
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True,
                                   figsize=(4.8, 4.6))
    t_us = d["t"] * 1e6
    ax1.plot(t_us, d["V_T"], color="tab:gray")
    ax1.set_ylabel(r"$V_T$ (V)")
    ax1.set_title("Waveform and switched fraction")
    ax2.plot(t_us, d["f_UP"], color="tab:red")
    ax2.set_ylabel(r"$f_{UP}$")
    ax2.set_ylim(-0.05, 1.05)
    ax2.set_xlabel(r"$t$ ($\mu$s)")
    loop = run_dir / "minor_loop.csv"
    if loop.exists():
        m = _read_csv(loop, ["V_T", "Q"])
        inset = ax2.inset_axes([0.62, 0.15, 0.35, 0.55])
        inset.plot(m["V_T"], m["Q"] * C_M2_TO_UC_CM2, lw=0.8,
                   color="tab:blue")
        inset.set_xlabel(r"$V_T$ (V)", fontsize=6)
        inset.set_ylabel(r"$Q$ ($\mu$C/cm$^2$)", fontsize=6)
        inset.tick_params(labelsize=6)
        inset.grid(False)
    return _save(fig, out_base)


def fig5(run_dir: Path, out_base: Path) -> list[Path]:
    """Read current [pA, log scale] vs set voltage."""
    d = _read_csv(run_dir / "ir_vs_vset.csv",
                  ["V_SET", "f_UP_set", "f_UP_read", "I_R_A", "V_D_up_V"])
    fig, ax = plt.subplots()
    ax.semilogy(d["V_SET"], d["I_R_A"] * A_TO_PA, "o-", color="tab:blue")
    ax.set_xlabel(r"$V_{SET}$ (V)")
    ax.set_ylabel(r"$I_R$ (pA)")
    ax.set_title("Read current vs set voltage")
    i = d["I_R_A"]
    if np.min(i) > 0:
        r_i = float(np.max(i) / np.min(i))
        ax.annotate(f"$R_I$ = {r_i:.1f}", xy=(0.05, 0.9),
                    xycoords="axes fraction")
    return _save(fig, out_base)


def fig6(run_dir: Path, out_base: Path) -> list[Path]:
    """Dielectric-thickness sweep: I_R and V_D,up vs t_D, R_I inset."""
    d = _read_csv(run_dir / "td_sweep.csv",
                  ["t_D_nm", "V_SET_low", "V_SET_high", "I_R_low_A",
                   "I_R_high_A", "V_D_up_V", "R_I"])
    fig, ax = plt.subplots()
    ax.semilogy(d["t_D_nm"], d["I_R_low_A"] * A_TO_PA, "s-",
                color="tab:blue",
                label=rf"$V_{{SET}}$ = {d['V_SET_low'][0]:g} V")
    ax.semilogy(d["t_D_nm"], d["I_R_high_A"] * A_TO_PA, "o-",
                color="tab:red",
                label=rf"$V_{{SET}}$ = {d['V_SET_high'][0]:g} V")
    ax.set_xlabel(r"$t_D$ (nm)")
    ax.set_ylabel(r"$I_R$ (pA)")
    ax.set_title("Read current vs dielectric thickness")
    ax.legend(loc="lower left", fontsize=7)
    ax2 = ax.twinx()
    ax2.plot(d["t_D_nm"], d["V_D_up_V"], "^--", color="tab:green")
    ax2.set_ylabel(r"$V_{D,up}$ (V)", color="tab:green")
    ax2.grid(False)
    inset = ax.inset_axes([0.64, 0.62, 0.33, 0.33])
    inset.plot(d["t_D_nm"], d["R_I"], "d-", color="black", lw=0.8)
    inset.set_xlabel(r"$t_D$ (nm)", fontsize=6)
    inset.set_ylabel(r"$R_I$", fontsize=6)
    inset.tick_params(labelsize=6)
    inset.grid(False)
    return _save(fig, out_base)


def fig7(run_dir: Path, out_base: Path) -> list[Path]:
    """Design-variant comparison: every ir_vs_vset*.csv becomes one series
    (I_R vs V_SET on top, V_D,up vs V_SET below), labelled by file suffix."""
    paths = sorted(run_dir.glob("ir_vs_vset*.csv"))
    if not paths:
        raise FigureError(f"no ir_vs_vset*.csv files in {run_dir}")
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(4.8, 5.4))
    for path in paths:
        d = _read_csv(path, ["V_SET", "f_UP_set", "f_UP_read", "I_R_A",
                             "V_D_up_V"])
        label = path.stem.removeprefix("ir_vs_vset").lstrip("_") or "baseline"
        ax1.semilogy(d["V_SET"], d["I_R_A"] * A_TO_PA, "o-", label=label,
                     ms=3)
        ax2.plot(d["V_SET"], d["V_D_up_V"], "s--", label=label, ms=3)
    ax1.set_ylabel(r"$I_R$ (pA)")
    ax1.set_title("Design variants")
    ax1.legend(fontsize=7)
    ax2.set_ylabel(r"$V_{D,up}$ (V)")
    ax2.set_xlabel(r"$V_{SET}$ (V)")
    return _save(fig, out_base)


FIGURES = {"fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6,
           "fig7": fig7}


def render(figure_id: str, run_dir: Path, out_dir: Path) -> list[Path]:
    """Render one figure id from a run directory; returns written paths."""
    if figure_id not in FIGURES:
        raise FigureError(f"unknown figure id '{figure_id}'; "
                          f"choose from {sorted(FIGURES)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_STYLE):
        return FIGURES[figure_id](Path(run_dir), out_dir / figure_id)


def render_all(figure_ids, run_dir: Path, out_dir: Path) -> list[Path]:
    written = []
    for fid in figure_ids:
        written.extend(render(fid, run_dir, out_dir))
    return written
