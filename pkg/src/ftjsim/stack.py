"""MFIM layer stack description: materials, electrodes, derived electrostatics.

The stack is Metal(MF) / ferroelectric / dielectric / Metal(MD), read bias
applied to the MF electrode. All quantities SI unless stated otherwise
(energies and workfunctions in eV).
"""

from __future__ import annotations

from dataclasses import dataclass

from .constants import EPS0
from .errors import InvalidStackError


@dataclass(frozen=True)
class Material:
    """Insulator material: electron affinity chi [eV], relative permittivity,
    tunnelling effective mass in units of m0."""

    name: str
    chi: float
    eps_r: float
    m_ox: float

    def __post_init__(self):
        if self.chi <= 0:
            raise InvalidStackError(f"{self.name}: electron affinity must be > 0")
        if self.eps_r < 1:
            raise InvalidStackError(f"{self.name}: relative permittivity must be >= 1")
        if not 0 < self.m_ox <= 2:
            raise InvalidStackError(f"{self.name}: tunnelling mass must be in (0, 2] m0")


@dataclass(frozen=True)
class Electrode:
    """Metal electrode with workfunction [eV]."""

    name: str
    workfunction: float

    def __post_init__(self):
        if self.workfunction <= 0:
            raise InvalidStackError(f"{self.name}: workfunction must be > 0")


# Built-in material/electrode presets.
HZO = Material("HZO", chi=2.1, eps_r=30.0, m_ox=0.4)
AL2O3 = Material("Al2O3", chi=1.4, eps_r=10.0, m_ox=0.3)
SIO2 = Material("SiO2", chi=0.95, eps_r=3.9, m_ox=0.5)
TIN = Electrode("TiN", workfunction=4.55)
AL = Electrode("Al", workfunction=4.08)

MATERIALS = {m.name: m for m in (HZO, AL2O3, SIO2)}
ELECTRODES = {e.name: e for e in (TIN, AL)}


@dataclass(frozen=True)
class StackSpec:
    """Immutable MFIM stack: layers, thicknesses [m], electrodes, temperature [K]."""

    ferroelectric: Material
    dielectric: Material
    t_f: float
    t_d: float
    electrode_mf: Electrode
    electrode_md: Electrode
    temperature: float = 300.0

    def __post_init__(self):
        if self.t_f <= 0:
            raise InvalidStackError("ferroelectric thickness must be > 0")
        if self.t_d <= 0:
            raise InvalidStackError("dielectric thickness must be > 0")
        if self.temperature <= 0:
            raise InvalidStackError("temperature must be > 0")

    @property
    def c_f(self) -> float:
        """Ferroelectric per-area capacitance [F/m^2]."""
        return EPS0 * self.ferroelectric.eps_r / self.t_f

    @property
    def c_d(self) -> float:
        """Dielectric per-area capacitance [F/m^2]."""
        return EPS0 * self.dielectric.eps_r / self.t_d

    @property
    def c_0(self) -> float:
        """Series-node total C_F + C_D [F/m^2]."""
        return self.c_f + self.c_d

    @property
    def v_bi(self) -> float:
        """Built-in bias shift from the electrode workfunction difference [V].

        Added to the applied bias inside the electrostatics so that at zero
        applied bias the band tilt matches the workfunction difference. Zero
        for same-metal stacks.
        """
        return self.electrode_md.workfunction - self.electrode_mf.workfunction


def derive_capacitances(stack: StackSpec) -> tuple[float, float, float]:
    """Return (C_F, C_D, C_0) in F/m^2."""
    return stack.c_f, stack.c_d, stack.c_0


def barrier_heights(stack: StackSpec) -> tuple[float, float, float]:
    """Return (phi_MD_D, phi_MD_F, phi_MF_F) barrier heights in eV.

    phi_MD_D: MD electrode to dielectric conduction band.
    phi_MD_F: MD electrode to ferroelectric conduction band (read threshold).
    phi_MF_F: MF electrode to ferroelectric conduction band.
    """
    phi_md = stack.electrode_md.workfunction
    phi_mf = stack.electrode_mf.workfunction
    return (
        phi_md - stack.dielectric.chi,
        phi_md - stack.ferroelectric.chi,
        phi_mf - stack.ferroelectric.chi,
    )


def baseline_stack(t_f: float = 12e-9, t_d: float = 2e-9,
                   dielectric: Material = AL2O3,
                   electrode: Electrode = TIN,
                   temperature: float = 300.0) -> StackSpec:
    """TiN/HZO/Al2O3/TiN baseline (12 nm / 2 nm) unless overridden."""
    return StackSpec(
        ferroelectric=HZO,
        dielectric=dielectric,
        t_f=t_f,
        t_d=t_d,
        electrode_mf=electrode,
        electrode_md=electrode,
        temperature=temperature,
    )
