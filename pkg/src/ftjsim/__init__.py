"""ftjsim: multi-domain MFIM ferroelectric tunnel junction simulator."""

from .domains import (DomainParams, GridSpec, VariationSpec,
                      NOMINAL_ANISOTROPY, neighbors, sample_anisotropy)
from .dynamics import (DynamicsConfig, LgdSystem, SimState,
                       characteristic_time, integrate, lgd_rhs,
                       single_domain_equilibria)
from .electrostatics import (CouplingMatrix, LaplaceMesh,
                             build_coupling_closure, build_coupling_laplace,
                             depolarization_field, dielectric_voltages)
from .protocol import (Device, ProgramReadSpec, f_up, run_hysteresis,
                       run_set_read, sweep_td, sweep_vset, total_charge,
                       v_d_up)
from .stack import (AL, AL2O3, ELECTRODES, HZO, MATERIALS, SIO2, TIN,
                    Electrode, Material, StackSpec, barrier_heights,
                    baseline_stack, derive_capacitances)
from .tunneling import (BandProfile, TransportConfig, band_profile,
                        device_current, domain_current, forbidden_segments,
                        supply_function, wkb_transmission)
from .waveform import Waveform, triangle

__version__ = "0.1.0"
