"""Time integration of the multi-domain LGD equation.

The right-hand side (per domain, every bracketed term in volts):

    t_F * rho * dP_i/dt = -(2 a_i P_i + 4 b_i P_i^3 + 6 g_i P_i^5) t_F
                          - (t_F k / (d w)) sum_n (P_i - P_n)
                          - 1/2 sum_j (1/C_{i,j} + 1/C_{j,i}) P_j
                          + (C_D/C_0) (V_T + V_bi)

Integration uses an explicit adaptive Dormand-Prince 5(4) embedded pair with
the step capped at min(dt_max, t_rho/20); the drive V_T is sampled from the
waveform at the stage times, and steps land exactly on waveform breakpoints
and requested sample times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import DomainParams, GridSpec, wall_laplacian
from .electrostatics import CouplingMatrix
from .errors import DivergenceError, FtjError, StiffnessError
from .stack import StackSpec
from .waveform import Waveform


def characteristic_time(params: DomainParams, rho: float) -> float:
    """Ferroelectric relaxation time t_rho = rho / (2 |<alpha>|) [s]."""
    mean_alpha = params.mean_alpha
    if mean_alpha == 0.0:
        raise FtjError("mean anisotropy alpha must be nonzero")
    return rho / (2.0 * abs(mean_alpha))


def single_domain_equilibria(alpha: float, beta: float, gamma: float,
                             ) -> tuple[float, float]:
    """Analytic single-domain oracle: (P_r, E_c).

    P_r is the positive remnant root of 2aP + 4bP^3 + 6gP^5 = 0 (quadratic in
    x = P^2); E_c the coercive field, i.e. the extremum of the anisotropy
    field on the descending branch.
    """
    if alpha >= 0:
        raise FtjError("not ferroelectric: need alpha < 0 for a double well")
    # 6g x^2 + 4b x + 2a = 0
    disc = (4 * beta) ** 2 - 4 * (6 * gamma) * (2 * alpha)
    if disc < 0:
        raise FtjError("no real remnant polarization root")
    x = (-4 * beta + math.sqrt(disc)) / (2 * 6 * gamma)
    if x <= 0:
        raise FtjError("no positive remnant polarization root")
    p_r = math.sqrt(x)
    # dE/dP = 2a + 12b P^2 + 30g P^4 = 0
    disc_c = (12 * beta) ** 2 - 4 * (30 * gamma) * (2 * alpha)
    y = (-12 * beta + math.sqrt(disc_c)) / (2 * 30 * gamma)
    p_c = math.sqrt(y)
    e_c = abs(2 * alpha * p_c + 4 * beta * p_c ** 3 + 6 * gamma * p_c ** 5)
    return p_r, e_c


@dataclass
class DynamicsConfig:
    """Integrator settings. rho [Ohm m] sets the kinetic time scale."""

    rho: float = 116.0
    rtol: float = 1e-6
    dt_max: float = math.inf
    dt_init: float | None = None

    def __post_init__(self):
        if self.rho <= 0:
            raise FtjError("kinetic resistivity must be > 0")


@dataclass
class SimState:
    """Snapshot of the simulation: time [s], per-domain P [C/m^2], bias [V]."""

    t: float
    p: np.ndarray
    v_t: float


class LgdSystem:
    """Precompiled RHS of the LGD equation for one device configuration."""

    def __init__(self, stack: StackSpec, grid: GridSpec, params: DomainParams,
                 coupling: CouplingMatrix, cfg: DynamicsConfig):
        self.stack = stack
        self.grid = grid
        self.params = params
        self.coupling = coupling
        self.cfg = cfg
        t_f = stack.t_f
        self._c1 = -2.0 * params.alpha * t_f
        self._c3 = -4.0 * params.beta * t_f
        self._c5 = -6.0 * params.gamma * t_f
        m_sym = 0.5 * (coupling.inv_c + coupling.inv_c.T)
        wall = (t_f * grid.k / (grid.d * grid.w)) * wall_laplacian(grid).toarray()
        self._lin = -(wall + m_sym)          # acts on P, yields volts
        self._drive = stack.c_d / stack.c_0  # multiplies effective bias
        self._scale = 1.0 / (t_f * cfg.rho)
        self.t_rho = characteristic_time(params, cfg.rho)
        p_r, _ = single_domain_equilibria(float(np.mean(params.alpha)),
                                          float(np.mean(params.beta)),
                                          float(np.mean(params.gamma)))
        self._p_guard = 2.0 * p_r

    def rhs(self, p: np.ndarray, v_t: float) -> np.ndarray:
        """dP/dt [C/m^2/s] for bias v_t (built-in shift included)."""
        p2 = p * p
        aniso = p * (self._c1 + p2 * (self._c3 + p2 * self._c5))
        volts = aniso + self._lin @ p + self._drive * (v_t + self.stack.v_bi)
        return self._scale * volts

    def check_finite(self, p: np.ndarray, t: float) -> None:
        if not np.all(np.isfinite(p)) or np.max(np.abs(p)) > self._p_guard:
            raise DivergenceError(
                f"polarization left the physical range at t={t:.3e} s "
                f"(max |P| = {np.max(np.abs(p)):.3e}, guard {self._p_guard:.3e})")


def lgd_rhs(state: SimState, params: DomainParams, grid: GridSpec,
            coupling: CouplingMatrix, stack: StackSpec,
            rho: float = 116.0) -> np.ndarray:
    """Functional form of the RHS, convenient for tests."""
    system = LgdSystem(stack, grid, params, coupling, DynamicsConfig(rho=rho))
    return system.rhs(np.asarray(state.p, dtype=float), state.v_t)


# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                   11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def integrate(system: LgdSystem, waveform: Waveform, p0: np.ndarray,
              t0: float = 0.0, t_end: float | None = None,
              record_times: np.ndarray | None = None,
              ) -> tuple[SimState, np.ndarray | None]:
    """Advance the LGD state from t0 to t_end under the given waveform.

    Returns the final state and, if `record_times` is given, the (n_rec, n_d)
    polarization snapshots at exactly those times (steps are clipped to land
    on them and on every waveform breakpoint).
    """
    cfg = system.cfg
    if t_end is None:
        t_end = waveform.t_end
    p = np.array(p0, dtype=float)
    t = t0
    dt_cap = min(cfg.dt_max, system.t_rho / 20.0)
    dt = cfg.dt_init if cfg.dt_init is not None else dt_cap
    if dt > dt_cap:
        raise FtjError("dt_init must not exceed the step cap")
    dt_floor = 1e-6 * system.t_rho
    p_scale = max(0.3, float(np.max(np.abs(p))))

    checkpoints = [waveform.times[(waveform.times > t0) & (waveform.times < t_end)]]
    if record_times is not None:
        record_times = np.asarray(record_times, dtype=float)
        checkpoints.append(record_times[(record_times > t0) & (record_times < t_end)])
    checkpoints.append(np.array([t_end]))
    checkpoints = np.unique(np.concatenate(checkpoints))
    ck_idx = 0

    recorded = None
    rec_idx = 0
    if record_times is not None:
        recorded = np.empty((record_times.size, p.size))
        while rec_idx < record_times.size and record_times[rec_idx] <= t0:
            recorded[rec_idx] = p
            rec_idx += 1

    k = np.empty((7, p.size))
    k[0] = system.rhs(p, float(waveform(t)))
    while ck_idx < checkpoints.size:
        t_target = checkpoints[ck_idx]
        h = min(dt, dt_cap)
        hit = t + h >= t_target - 1e-9 * dt_cap
        if hit:
            h = t_target - t
        for s in range(1, 7):
            ps = p + h * (_DP_A[s] @ k[:s])
            k[s] = system.rhs(ps, float(waveform(t + _DP_C[s] * h)))
        p5 = p + h * (_DP_B5 @ k)
        err = h * (_DP_E @ k)
        tol = cfg.rtol * max(p_scale, float(np.max(np.abs(p5))))
        err_norm = float(np.max(np.abs(err))) / tol
        accept = err_norm <= 1.0
        if accept:
            t = t_target if hit else t + h
            p = p5
            k[0] = k[6]  # FSAL
            system.check_finite(p, t)
            if record_times is not None:
                while (rec_idx < record_times.size
                       and record_times[rec_idx] <= t):
                    recorded[rec_idx] = p
                    rec_idx += 1
            if hit:
                ck_idx += 1
        factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
        dt_prop = h * min(5.0, max(0.2, factor))
        # a checkpoint-clipped step must not shrink the error-controlled step
        dt = max(dt, dt_prop) if (hit and accept) else dt_prop
        if not accept and dt < dt_floor:
            raise StiffnessError(
                f"time step underflow (dt={dt:.3e} s < 1e-6 t_rho); "
                "loosen rtol or reduce the drive rate")
    if record_times is not None:
        while rec_idx < record_times.size:
            recorded[rec_idx] = p
            rec_idx += 1
    return SimState(t=t, p=p, v_t=float(waveform(t))), recorded
