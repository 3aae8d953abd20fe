"""Command-line interface: experiment dispatch and CSV/manifest persistence.

All on-disk physical quantities are SI (A, V, s, C/m^2) except the explicit
*_nm columns; figure scripts do the display-unit conversions.
"""

from __future__ import annotations

import csv
import functools
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .electrostatics import (build_coupling_closure, build_coupling_laplace,
                             calibrated_closure_kernel)
from .errors import FtjError
from .protocol import ProgramReadSpec, run_hysteresis, run_set_read, sweep_td, sweep_vset
from .stack import ELECTRODES, MATERIALS


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _common_options(fn):
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=True, dir_okay=False),
                  help="TOML run configuration.")
    @click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
                  help="Output directory for CSVs and the run manifest.")
    @click.option("--seed", type=int, default=None, help="Override the RNG seed.")
    @click.option("--workers", type=int, default=None,
                  help="Worker count for sweep parallelism.")
    @click.option("--deterministic", is_flag=True,
                  help="Force single-worker, fixed-order execution.")
    @functools.wraps(fn)
    def wrapper(config_path, out_dir, seed, workers, deterministic, **kwargs):
        try:
            cfg = parse_config(config_path)
            if seed is not None:
                cfg["experiment"]["seed"] = seed
            if workers is not None:
                cfg["experiment"]["workers"] = workers
            if deterministic:
                cfg["experiment"]["workers"] = 1
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            fn(cfg, out, **kwargs)
        except FtjError as exc:
            raise click.ClickException(str(exc))
    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """MFIM ferroelectric tunnel junction simulator."""


def _program_spec(cfg: RunConfig, v_set: float) -> ProgramReadSpec:
    ex = cfg["experiment"]
    spv = ex["seconds_per_volt"] or None
    return ProgramReadSpec(
        v_set=v_set, v_preset=ex["v_preset"], v_r=ex["v_r"],
        seconds_per_volt=spv,
        retention_hold=None, read_hold=None,
    )


def _resolve_holds(cfg: RunConfig, device) -> ProgramReadSpec:
    ex = cfg["experiment"]
    return ProgramReadSpec(
        v_set=ex["v_set"], v_preset=ex["v_preset"], v_r=ex["v_r"],
        seconds_per_volt=ex["seconds_per_volt"] or None,
        retention_hold=ex["retention_hold_trho"] * device.t_rho,
        read_hold=ex["read_hold_trho"] * device.t_rho,
    )


@main.command()
@_common_options
def hysteresis(cfg: RunConfig, out: Path):
    """Quasi-static Q-V_F major loop -> qvf.csv."""
    device = cfg.device()
    ex = cfg["experiment"]
    res = run_hysteresis(device, amplitude=ex["amplitude_v"],
                         period=ex["period_s"] or None)
    _write_csv(out / "qvf.csv", ["t", "V_T", "V_F_mean", "Q"],
               zip(res.t, res.v_t, res.v_f_mean, res.q))
    cfg.write_manifest(out / "manifest.toml", "hysteresis")
    if res.warning:
        click.echo(f"warning: {res.warning}", err=True)
    click.echo(f"wrote {out / 'qvf.csv'}")


@main.command("program-read")
@_common_options
def program_read(cfg: RunConfig, out: Path):
    """One preset/set/read sequence -> trace.csv, minor_loop.csv, summary.csv."""
    device = cfg.device()
    spec = _resolve_holds(cfg, device)
    res = run_set_read(device, spec)
    _write_csv(out / "trace.csv", ["t", "V_T", "P_mean", "Q", "f_UP"],
               zip(res.trace_t, res.trace_v, res.trace_p_mean, res.trace_q,
                   res.trace_f_up))
    _write_csv(out / "minor_loop.csv", ["V_T", "Q"],
               zip(res.trace_v, res.trace_q))
    _write_csv(out / "summary.csv",
               ["V_SET", "f_UP_set", "f_UP_ret", "f_UP_read", "I_R_A", "V_D_up_V"],
               [[res.v_set, res.f_up_set, res.f_up_ret, res.f_up_read,
                 res.i_r, res.v_d_up]])
    cfg.write_manifest(out / "manifest.toml", "program-read")
    click.echo(f"V_SET={res.v_set} V: I_R={res.i_r:.4e} A, f_UP(read)={res.f_up_read:.3f}")


@main.command("sweep-vset")
@_common_options
def sweep_vset_cmd(cfg: RunConfig, out: Path):
    """V_SET sweep -> ir_vs_vset.csv + summary.csv with R_I."""
    device = cfg.device()
    ex = cfg["experiment"]
    v_sets = np.arange(ex["v_set_min"], ex["v_set_max"] + 1e-9, ex["v_set_step"])
    res = sweep_vset(device, v_sets, _program_spec(cfg, 0.0))
    _write_csv(out / "ir_vs_vset.csv",
               ["V_SET", "f_UP_set", "f_UP_read", "I_R_A", "V_D_up_V"],
               [[r.v_set, r.f_up_set, r.f_up_read, r.i_r, r.v_d_up]
                for r in res.rows])
    _write_csv(out / "summary.csv", ["R_I"], [[res.r_i]])
    cfg.write_manifest(out / "manifest.toml", "sweep-vset")
    click.echo(f"R_I = {res.r_i:.3f} over V_SET in "
               f"[{v_sets[0]:.2f}, {v_sets[-1]:.2f}] V")


@main.command("sweep-td")
@_common_options
def sweep_td_cmd(cfg: RunConfig, out: Path):
    """Dielectric-thickness sweep -> td_sweep.csv."""
    ex = cfg["experiment"]
    rows = sweep_td(lambda t_d_nm: cfg.device(t_d_override_nm=t_d_nm),
                    ex["t_d_list_nm"], v_set_pair=(2.5, 6.5),
                    spec=_program_spec(cfg, 0.0))
    _write_csv(out / "td_sweep.csv",
               ["t_D_nm", "V_SET_low", "V_SET_high", "I_R_low_A",
                "I_R_high_A", "V_D_up_V", "R_I"],
               [[r.t_d, r.v_set_low, r.v_set_high, r.i_r_low, r.i_r_high,
                 r.v_d_up, r.r_i] for r in rows])
    cfg.write_manifest(out / "manifest.toml", "sweep-td")
    click.echo(f"wrote {out / 'td_sweep.csv'}")


@main.command()
def materials():
    """Print the built-in material and electrode presets."""
    click.echo("materials (chi [eV], eps_r, m_ox [m0]):")
    for m in MATERIALS.values():
        click.echo(f"  {m.name:6s} chi={m.chi:5.2f} eps_r={m.eps_r:5.1f} "
                   f"m_ox={m.m_ox:4.2f}")
    click.echo("electrodes (workfunction [eV]):")
    for e in ELECTRODES.values():
        click.echo(f"  {e.name:6s} phi_M={e.workfunction:5.2f}")


@main.command("coupling-matrix")
@click.option("--method", type=click.Choice(["closure", "laplace"]),
              default="laplace", show_default=True)
@_common_options
def coupling_matrix(cfg: RunConfig, out: Path, method: str):
    """Build and dump the depolarization coupling matrix -> matrix.csv."""
    grid = cfg.grid()
    stack = cfg.stack()
    if method == "laplace":
        m = build_coupling_laplace(grid, stack, cfg.mesh())
    else:
        kernel = cfg.closure_kernel()
        if kernel is None and grid.n_d > 1:
            kernel = calibrated_closure_kernel(stack, d=grid.d)
        if kernel is None:
            m = build_coupling_closure(grid, stack.c_0)
        else:
            m = build_coupling_closure(grid, stack.c_0, *kernel)
    path = out / "matrix.csv"
    with open(path, "w", newline="") as fh:
        fh.write(f"# method={m.method} C_0={float(m.c_0)!r} "
                 f"sum_rule_residual={float(m.row_sum_residual())!r} "
                 f"solver_residual={float(m.solver_residual)!r}\n")
        writer = csv.writer(fh)
        for row in m.inv_c:
            writer.writerow([repr(float(v)) for v in row])
    cfg.write_manifest(out / "manifest.toml", f"coupling-matrix --method {method}")
    click.echo(f"sum-rule residual: {m.row_sum_residual():.3e}")


if __name__ == "__main__":
    main()
