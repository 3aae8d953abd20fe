"""Experiment orchestration: hysteresis loops, set/read sequences, sweeps.

All experiments start from an erased (all-down) state enforced by a
saturating negative preset pulse, and use ramps slow enough relative to the
ferroelectric time scale t_rho to stay quasi-static.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import EPS0
from .domains import DomainParams, GridSpec, VariationSpec, sample_anisotropy
from .dynamics import (DynamicsConfig, LgdSystem, integrate,
                       single_domain_equilibria)
from .electrostatics import (CouplingMatrix, LaplaceMesh,
                             build_coupling_closure, build_coupling_laplace,
                             calibrated_closure_kernel, dielectric_voltages)
from .errors import FtjError, UndefinedMetricError
from .stack import StackSpec
from .tunneling import TransportConfig, device_current
from .waveform import Waveform, triangle

QUASI_STATIC_TRHO_PER_VOLT = 100.0


def total_charge(p: np.ndarray, v_t: float, coupling: CouplingMatrix,
                 stack: StackSpec) -> float:
    """Device charge density Q = <P_i + eps0 eps_F V_F,i / t_F> [C/m^2]."""
    _, v_f = dielectric_voltages(np.asarray(p, dtype=float), v_t, coupling,
                                 stack)
    return float(np.mean(p + EPS0 * stack.ferroelectric.eps_r * v_f / stack.t_f))


def total_charge_dielectric_side(p: np.ndarray, v_t: float,
                                 coupling: CouplingMatrix,
                                 stack: StackSpec) -> float:
    """Q evaluated as <C_D V_D,i>; equals total_charge by flux continuity."""
    v_d, _ = dielectric_voltages(np.asarray(p, dtype=float), v_t, coupling,
                                 stack)
    return float(np.mean(stack.c_d * v_d))


def f_up(p: np.ndarray) -> float:
    """Fraction of domains with positive polarization."""
    p = np.asarray(p)
    return float(np.count_nonzero(p > 0) / p.size)


def v_d_up(p: np.ndarray, v_t: float, coupling: CouplingMatrix,
           stack: StackSpec) -> float:
    """Mean dielectric voltage drop over the positively polarized domains [V]."""
    p = np.asarray(p, dtype=float)
    up = p > 0
    if not np.any(up):
        raise UndefinedMetricError("V_D,up undefined: no domain has P > 0")
    v_d, _ = dielectric_voltages(p, v_t, coupling, stack)
    return float(np.mean(v_d[up]))


@dataclass
class Device:
    """Everything needed to run experiments on one device configuration."""

    stack: StackSpec
    grid: GridSpec
    params: DomainParams
    coupling: CouplingMatrix
    dyn: DynamicsConfig
    transport: TransportConfig
    system: LgdSystem = field(init=False)

    def __post_init__(self):
        self.system = LgdSystem(self.stack, self.grid, self.params,
                                self.coupling, self.dyn)

    @property
    def t_rho(self) -> float:
        return self.system.t_rho

    @property
    def p_r_nominal(self) -> float:
        p_r, _ = single_domain_equilibria(float(np.mean(self.params.alpha)),
                                          float(np.mean(self.params.beta)),
                                          float(np.mean(self.params.gamma)))
        return p_r

    def erased_state(self) -> np.ndarray:
        return np.full(self.grid.n_d, -self.p_r_nominal)

    @classmethod
    def build(cls, stack: StackSpec, grid: GridSpec,
              nominal: tuple[float, float, float],
              variation: VariationSpec,
              dyn: DynamicsConfig | None = None,
              transport: TransportConfig | None = None,
              coupling_method: str = "closure",
              mesh: LaplaceMesh | None = None,
              closure_kernel: tuple[float, float] | None = None) -> "Device":
        params = sample_anisotropy(nominal, variation, grid)
        if coupling_method == "closure":
            if closure_kernel is None and grid.n_d > 1:
                closure_kernel = calibrated_closure_kernel(stack, d=grid.d)
            if closure_kernel is not None:
                coupling = build_coupling_closure(grid, stack.c_0,
                                                  *closure_kernel)
            else:
                coupling = build_coupling_closure(grid, stack.c_0)
        elif coupling_method == "laplace":
            coupling = build_coupling_laplace(grid, stack,
                                              mesh or LaplaceMesh())
        else:
            raise FtjError(f"unknown coupling method '{coupling_method}'")
        return cls(stack=stack, grid=grid, params=params, coupling=coupling,
                   dyn=dyn or DynamicsConfig(),
                   transport=transport or TransportConfig())


@dataclass(frozen=True)
class ProgramReadSpec:
    """Preset/set/read protocol parameters. Durations default to multiples of
    t_rho when left None."""

    v_set: float
    v_preset: float = -5.0
    v_r: float = 2.0
    seconds_per_volt: float | None = None
    retention_hold: float | None = None
    read_hold: float | None = None

    def resolved(self, t_rho: float) -> "ProgramReadSpec":
        spv = self.seconds_per_volt
        if spv is None:
            spv = 120.0 * t_rho
        if spv < QUASI_STATIC_TRHO_PER_VOLT * t_rho:
            raise FtjError(
                f"ramp rate too fast: need >= {QUASI_STATIC_TRHO_PER_VOLT} "
                "t_rho per volt for quasi-static operation")
        return ProgramReadSpec(
            v_set=self.v_set, v_preset=self.v_preset, v_r=self.v_r,
            seconds_per_volt=spv,
            retention_hold=self.retention_hold if self.retention_hold is not None
            else 10.0 * t_rho,
            read_hold=self.read_hold if self.read_hold is not None
            else 20.0 * t_rho,
        )


def program_read_waveform(spec: ProgramReadSpec) -> Waveform:
    """preset pulse -> set ramp -> retention at 0 -> read ramp/hold -> 0."""
    spv = spec.seconds_per_volt
    segs = [
        (abs(spec.v_preset) * spv, spec.v_preset),
        (abs(spec.v_preset) * spv, 0.0),
        (abs(spec.v_set) * spv, spec.v_set),
        (abs(spec.v_set) * spv, 0.0),
        (spec.retention_hold, 0.0),
        (abs(spec.v_r) * spv, spec.v_r),
        (spec.read_hold, spec.v_r),
        (abs(spec.v_r) * spv, 0.0),
    ]
    return Waveform.from_segments(segs)


@dataclass
class HysteresisResult:
    t: np.ndarray
    v_t: np.ndarray
    v_f_mean: np.ndarray
    q: np.ndarray
    warning: str | None = None


def run_hysteresis(device: Device, amplitude: float = 5.0,
                   period: float | None = None, n_samples: int = 800,
                   ) -> HysteresisResult:
    """Quasi-static triangular V_T sweep; returns the closed Q-V_F loop of the
    second cycle (the first preconditions the domain pattern)."""
    t_rho = device.t_rho
    if period is None:
        period = QUASI_STATIC_TRHO_PER_VOLT * t_rho * 4.0 * amplitude * 1.2
    warning = None
    if period < QUASI_STATIC_TRHO_PER_VOLT * t_rho * 4.0 * amplitude:
        warning = "period below the quasi-static guard; loop may be rate-dependent"
        warnings.warn(warning)
    wf = triangle(amplitude, period, cycles=2)
    rec_t = np.linspace(period, 2.0 * period, n_samples)
    _, rec = integrate(device.system, wf, device.erased_state(),
                       record_times=rec_t)
    v_t = wf(rec_t)
    v_f_mean = np.empty(n_samples)
    q = np.empty(n_samples)
    for i, (p, vt) in enumerate(zip(rec, v_t)):
        _, v_f = dielectric_voltages(p, float(vt), device.coupling,
                                     device.stack)
        v_f_mean[i] = float(np.mean(v_f))
        q[i] = total_charge(p, float(vt), device.coupling, device.stack)
    return HysteresisResult(t=rec_t, v_t=v_t, v_f_mean=v_f_mean, q=q,
                            warning=warning)


@dataclass
class SetReadResult:
    v_set: float
    f_up_set: float
    f_up_ret: float
    f_up_read: float
    i_r: float
    v_d_up: float            # NaN when no domain is up at read
    trace_t: np.ndarray
    trace_v: np.ndarray
    trace_p_mean: np.ndarray
    trace_q: np.ndarray
    trace_f_up: np.ndarray


def run_set_read(device: Device, spec: ProgramReadSpec, n_samples: int = 400,
                 n_read_samples: int = 5) -> SetReadResult:
    """Execute one preset/set/read sequence and extract the summary metrics.

    I_R and V_D,up are time averages over the final 50% of the read hold at
    fixed V_T = V_R.
    """
    spec = spec.resolved(device.t_rho)
    wf = program_read_waveform(spec)
    bp = wf.times
    t_set_peak = bp[3]
    t_ret_end = bp[5]
    hold_t = np.linspace(0.5 * (bp[6] + bp[7]), bp[7], n_read_samples)
    trace_t = np.linspace(0.0, wf.t_end, n_samples)
    rec_t = np.unique(np.concatenate(
        [trace_t, [t_set_peak, t_ret_end], hold_t]))
    _, rec = integrate(device.system, wf, device.erased_state(),
                       record_times=rec_t)

    def p_at(t):
        return rec[np.searchsorted(rec_t, t)]

    v_of = wf
    f_set = f_up(p_at(t_set_peak))
    f_ret = f_up(p_at(t_ret_end))
    i_vals, vd_vals, f_read_vals = [], [], []
    for th in hold_t:
        p = p_at(th)
        i_vals.append(device_current(p, spec.v_r, device.stack, device.grid,
                                     device.coupling, device.transport))
        f_read_vals.append(f_up(p))
        try:
            vd_vals.append(v_d_up(p, spec.v_r, device.coupling, device.stack))
        except UndefinedMetricError:
            vd_vals.append(np.nan)
    trace_q = np.array([total_charge(p_at(t), float(v_of(t)), device.coupling,
                                     device.stack) for t in trace_t])
    trace_f = np.array([f_up(p_at(t)) for t in trace_t])
    trace_p = np.array([float(np.mean(p_at(t))) for t in trace_t])
    return SetReadResult(
        v_set=spec.v_set,
        f_up_set=f_set,
        f_up_ret=f_ret,
        f_up_read=float(np.mean(f_read_vals)),
        i_r=float(np.mean(i_vals)),
        v_d_up=float(np.nanmean(vd_vals)) if not np.all(np.isnan(vd_vals))
        else float("nan"),
        trace_t=trace_t,
        trace_v=np.asarray(v_of(trace_t), dtype=float),
        trace_p_mean=trace_p,
        trace_q=trace_q,
        trace_f_up=trace_f,
    )


@dataclass
class SweepResult:
    rows: list[SetReadResult]
    r_i: float

    @property
    def v_sets(self):
        return np.array([r.v_set for r in self.rows])

    @property
    def currents(self):
        return np.array([r.i_r for r in self.rows])


def sweep_vset(device: Device, v_sets, spec: ProgramReadSpec | None = None,
               n_samples: int = 200) -> SweepResult:
    """run_set_read per V_SET; R_I = max I_R / min I_R over the sweep."""
    v_sets = list(v_sets)
    if len(v_sets) < 2:
        raise FtjError("V_SET sweep needs at least two points")
    base = spec or ProgramReadSpec(v_set=0.0)
    rows = []
    for v in v_sets:
        s = ProgramReadSpec(v_set=float(v), v_preset=base.v_preset,
                            v_r=base.v_r,
                            seconds_per_volt=base.seconds_per_volt,
                            retention_hold=base.retention_hold,
                            read_hold=base.read_hold)
        rows.append(run_set_read(device, s, n_samples=n_samples))
    currents = np.array([r.i_r for r in rows])
    i_min = float(np.min(currents))
    r_i = float(np.max(currents) / i_min) if i_min > 0 else float("inf")
    return SweepResult(rows=rows, r_i=r_i)


@dataclass
class TdSweepRow:
    t_d: float
    v_set_low: float
    v_set_high: float
    i_r_low: float
    i_r_high: float
    v_d_up: float
    r_i: float


def sweep_td(device_factory, t_ds, v_set_pair=(2.5, 6.5),
             spec: ProgramReadSpec | None = None) -> list[TdSweepRow]:
    """Rebuild the device per t_D (via `device_factory(t_d)`) and evaluate the
    read current at the low/high V_SET pair; R_I and V_D,up per thickness."""
    rows = []
    for t_d in t_ds:
        if t_d <= 0:
            raise FtjError("t_D values must be > 0")
        device = device_factory(float(t_d))
        sweep = sweep_vset(device, v_set_pair, spec=spec)
        low, high = sweep.rows
        rows.append(TdSweepRow(
            t_d=float(t_d), v_set_low=low.v_set, v_set_high=high.v_set,
            i_r_low=low.i_r, i_r_high=high.i_r, v_d_up=high.v_d_up,
            r_i=sweep.r_i))
    return rows
