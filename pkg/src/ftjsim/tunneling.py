"""WKB transmission through the MFIM band profile and Landauer read current.

Conduction bands are linear within each layer (set by the per-domain voltage
drops); the transmission is exp(-2 * integral kappa dz) over the classically
forbidden regions, with the closed-form integral for linear segments. The
per-domain current follows the Landauer expression with the analytic
transverse-momentum sum (supply function ln(1 + exp(eta))).

Energies are in eV relative to the MD-electrode Fermi level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR, KB, M0, Q_E
from .errors import ConvergenceError, FtjError
from .stack import StackSpec

# Below this band slope [eV/m] the rectangular formula replaces the 3/2-power
# closed form (avoids cancellation); 1e-3 eV/nm.
FLAT_SLOPE_THRESHOLD = 1e6


@dataclass(frozen=True)
class BandSegment:
    """One linear conduction-band piece: z in [z0, z1] m, E_C from e0 to e1 eV,
    tunnelling mass m_ox in m0 units."""

    z0: float
    z1: float
    e0: float
    e1: float
    m_ox: float

    @property
    def length(self) -> float:
        return self.z1 - self.z0

    @property
    def slope(self) -> float:
        """dE_C/dz in eV/m."""
        return (self.e1 - self.e0) / self.length


@dataclass(frozen=True)
class BandProfile:
    """Piecewise-linear band profile, dielectric first (MD side at z=0)."""

    segments: tuple[BandSegment, ...]
    e_f_md: float = 0.0
    e_f_mf: float = 0.0


def band_profile(stack: StackSpec, v_d: float, v_f: float, v_r: float,
                 ) -> BandProfile:
    """Profile for dielectric drop v_d and ferroelectric drop v_f at read bias
    v_r applied to the MF electrode. Requires v_d + v_f = v_r + V_bi."""
    if abs(v_d + v_f - (v_r + stack.v_bi)) > 1e-9 * max(1.0, abs(v_r)):
        raise FtjError("inconsistent voltage partition: V_D + V_F must equal "
                       "V_R + V_bi")
    phi_md = stack.electrode_md.workfunction
    e_d0 = phi_md - stack.dielectric.chi
    e_d1 = e_d0 - v_d
    e_f0 = e_d1 + (stack.dielectric.chi - stack.ferroelectric.chi)
    e_f1 = e_f0 - v_f
    return BandProfile(
        segments=(
            BandSegment(0.0, stack.t_d, e_d0, e_d1, stack.dielectric.m_ox),
            BandSegment(stack.t_d, stack.t_d + stack.t_f, e_f0, e_f1,
                        stack.ferroelectric.m_ox),
        ),
        e_f_md=0.0,
        e_f_mf=-v_r,
    )


def forbidden_segments(profile: BandProfile, e_perp: float,
                       ) -> list[tuple[float, float]]:
    """Maximal z-intervals where E_C(z) > e_perp. Endpoints are analytic from
    the linear segments; contiguous pieces across the layer interface merge."""
    pieces = []
    for seg in profile.segments:
        lo, hi = sorted((seg.e0, seg.e1))
        if hi <= e_perp:
            continue
        if lo >= e_perp:
            pieces.append((seg.z0, seg.z1))
            continue
        # one crossing inside the segment
        z_cross = seg.z0 + (e_perp - seg.e0) / seg.slope
        if seg.e0 > e_perp:
            pieces.append((seg.z0, z_cross))
        else:
            pieces.append((z_cross, seg.z1))
    merged: list[tuple[float, float]] = []
    for z_in, z_out in pieces:
        if merged and math.isclose(merged[-1][1], z_in, rel_tol=0.0,
                                   abs_tol=1e-18):
            merged[-1] = (merged[-1][0], z_out)
        else:
            merged.append((z_in, z_out))
    return merged


def _kappa_prefactor(m_ox: float) -> float:
    """kappa = pref * sqrt(E_eV) [1/m] for barrier height E in eV."""
    return math.sqrt(2.0 * m_ox * M0 * Q_E) / HBAR


def _segment_action(seg: BandSegment, e_perp: np.ndarray) -> np.ndarray:
    """integral kappa dz over the forbidden part of one linear segment,
    vectorized over e_perp."""
    a = seg.e0 - e_perp   # barrier height at z0 [eV]
    b = seg.e1 - e_perp
    hi = np.maximum(a, b)
    out = np.zeros_like(hi)
    mask = hi > 0
    if not np.any(mask):
        return out
    pref = _kappa_prefactor(seg.m_ox)
    am = np.clip(a[mask], 0.0, None)
    bm = np.clip(b[mask], 0.0, None)
    slope = abs(seg.slope)
    if slope < FLAT_SLOPE_THRESHOLD:
        # near-flat: rectangular barrier at the mean height (a ~ b, so the
        # whole segment is forbidden wherever mask holds)
        out[mask] = pref * np.sqrt(0.5 * (am + bm)) * seg.length
        return out
    # antiderivative of sqrt(E(z)) between the clipped endpoint heights;
    # clipping at zero lands exactly on the classical turning point
    out[mask] = pref * (2.0 / 3.0) * np.abs(am ** 1.5 - bm ** 1.5) / slope
    return out


def log_transmission(profile: BandProfile, e_perp) -> np.ndarray:
    """ln T(E_perp), vectorized. T is the product over forbidden intervals of
    exp(-2 integral kappa dz); summing the actions implements the two-path
    product when the band crosses e_perp inside the stack."""
    e = np.atleast_1d(np.asarray(e_perp, dtype=float))
    action = np.zeros_like(e)
    for seg in profile.segments:
        action += _segment_action(seg, e)
    return -2.0 * action


def wkb_transmission(profile: BandProfile, e_perp) -> np.ndarray:
    """Transmission T in (0, 1], vectorized over e_perp."""
    return np.exp(log_transmission(profile, e_perp))


def supply_function(e_perp, e_f: float, temperature: float) -> np.ndarray:
    """Analytic transverse sum ln(1 + exp((e_f - e_perp)/kT)), numerically
    stable for both signs of the argument."""
    if temperature <= 0:
        raise FtjError("temperature must be > 0")
    eta = (e_f - np.asarray(e_perp, dtype=float)) * Q_E / (KB * temperature)
    return np.where(eta > 0, eta + np.log1p(np.exp(-np.abs(eta))),
                    np.log1p(np.exp(np.minimum(eta, 0.0))))


@dataclass
class TransportConfig:
    """Landauer-integral settings: transverse DOS mass [m0], integration
    windows [eV] below/above the Fermi span, quadrature tolerance, device
    area [m^2]."""

    m_par: float = 1.0
    window_below: float = 3.0
    window_above_kt: float = 20.0
    epsrel: float = 1e-6
    device_area: float = 3.14e-8
    max_window_extensions: int = 8

    def __post_init__(self):
        if self.m_par <= 0:
            raise FtjError("transverse mass must be > 0")
        if self.window_below <= 0 or self.window_above_kt <= 0:
            raise FtjError("integration windows must be > 0")


def _landauer_integrand(profile: BandProfile, temperature: float):
    def f(e):
        t = wkb_transmission(profile, e)
        return t * (supply_function(e, profile.e_f_md, temperature)
                    - supply_function(e, profile.e_f_mf, temperature))
    return f


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _panel_breakpoints(profile: BandProfile, lo: float, hi: float,
                       temperature: float) -> np.ndarray:
    """Panel edges: window bounds, band-corner energies and Fermi levels
    (where T(E) or the supply difference have kinks), plus a kT-scale split
    around the Fermi span so no panel is much wider than the thermal scale
    demands."""
    kt = KB * temperature / Q_E
    crit = {lo, hi, profile.e_f_md, profile.e_f_mf}
    for s in profile.segments:
        crit.update((s.e0, s.e1))
    edges = sorted(c for c in crit if lo <= c <= hi)
    # cap panel width at ~0.25 eV so the exponential factors stay tame per panel
    out = [edges[0]]
    for e in edges[1:]:
        base = out[-1]
        width = e - base
        n_split = max(1, int(width / 0.25))
        out.extend(base + width * (i + 1) / n_split for i in range(n_split))
    return np.array(out)


def _integrate_panels(f, edges: np.ndarray, level: int) -> float:
    """Composite Gauss-Legendre over the panels with geometric grading toward
    both panel endpoints (integrable sqrt kinks live there). Vectorized over
    all nodes; `level` doubles the grading depth."""
    m = 3 * level
    g = np.geomspace(1e-7, 0.5, m)
    frac = np.concatenate(([0.0], g, (1.0 - g)[::-1][1:], [1.0]))
    a = edges[:-1][:, None]
    width = np.diff(edges)[:, None]
    sub = a + width * frac[None, :]                     # (n_panels, n_frac)
    left = sub[:, :-1].ravel()
    right = sub[:, 1:].ravel()
    mid = 0.5 * (left + right)
    half = 0.5 * (right - left)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    y = f(x.ravel()).reshape(x.shape)
    return float(np.sum((y @ _GL_WEIGHTS) * half))


def _adaptive_panels(f, profile: BandProfile, lo: float, hi: float,
                     temperature: float, epsrel: float) -> float:
    """Refine the graded panel quadrature until the value changes by less
    than epsrel."""
    edges = _panel_breakpoints(profile, lo, hi, temperature)
    prev = None
    for level in (1, 2, 4, 8, 16):
        val = _integrate_panels(f, edges, level)
        if prev is not None and abs(val - prev) <= epsrel * max(abs(val), 1e-300):
            return val
        prev = val
    return prev


def domain_current(profile: BandProfile, cfg: TransportConfig, area: float,
                   temperature: float) -> float:
    """Read current of one domain footprint of the given area [A]."""
    if profile.e_f_md == profile.e_f_mf:
        return 0.0
    kt = KB * temperature
    pref = area * kt * cfg.m_par * M0 * Q_E / (2.0 * math.pi ** 2 * HBAR ** 3)
    f = _landauer_integrand(profile, temperature)
    tops = [max(s.e0, s.e1) for s in profile.segments]
    lo = min(profile.e_f_md, profile.e_f_mf) - cfg.window_below
    hi = max(max(tops), profile.e_f_md, profile.e_f_mf) \
        + cfg.window_above_kt * kt / Q_E
    val = _adaptive_panels(f, profile, lo, hi, temperature, cfg.epsrel)
    # window convergence: extend until the added tails are negligible
    for _ in range(cfg.max_window_extensions):
        lo2 = lo - 0.5
        hi2 = hi + 0.5
        val2 = _adaptive_panels(f, profile, lo2, hi2, temperature, cfg.epsrel)
        if abs(val2 - val) <= 10 * cfg.epsrel * max(abs(val2), 1e-300):
            # convert dE from eV to J
            return pref * val2 * Q_E
        lo, hi, val = lo2, hi2, val2
    raise ConvergenceError("Landauer integration window did not converge; "
                           "increase window_below/window_above_kt")


def device_current(p: np.ndarray, v_t: float, stack: StackSpec, grid,
                   coupling, cfg: TransportConfig) -> float:
    """Device read current: per-domain Landauer currents from each domain's
    own voltage partition, scaled from the simulated lattice to the physical
    device area."""
    from .electrostatics import dielectric_voltages

    v_d, v_f = dielectric_voltages(np.asarray(p, dtype=float), v_t, coupling,
                                   stack)
    a_dom = grid.d ** 2
    total = 0.0
    for vd_i, vf_i in zip(v_d, v_f):
        prof = band_profile(stack, float(vd_i), float(vf_i), v_t)
        total += domain_current(prof, cfg, a_dom, stack.temperature)
    return cfg.device_area / grid.area * total
