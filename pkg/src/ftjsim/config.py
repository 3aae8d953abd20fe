"""TOML run configuration: parsing, validation, defaults, manifest emission.

Lengths are nm, energies eV, permittivities relative; everything is converted
to SI on resolution. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__ as _pkg_version
from .domains import NOMINAL_ANISOTROPY, GridSpec, VariationSpec
from .dynamics import DynamicsConfig
from .electrostatics import LaplaceMesh
from .errors import ConfigError
from .stack import ELECTRODES, MATERIALS, Electrode, Material, StackSpec
from .tunneling import TransportConfig

_NM = 1e-9

# section -> key -> (default or REQUIRED, type)
_REQUIRED = object()
_SCHEMA: dict[str, dict[str, tuple]] = {
    "ferroelectric": {
        "material": (_REQUIRED, str),
        "chi_ev": (None, float),
        "eps_r": (None, float),
        "m_ox": (None, float),
        "alpha": (NOMINAL_ANISOTROPY[0], float),
        "beta": (NOMINAL_ANISOTROPY[1], float),
        "gamma": (NOMINAL_ANISOTROPY[2], float),
        "sigma_alpha": (0.05, float),
        "sigma_beta": (0.05, float),
        "sigma_gamma": (0.05, float),
    },
    "dielectric": {
        "material": (_REQUIRED, str),
        "chi_ev": (None, float),
        "eps_r": (None, float),
        "m_ox": (None, float),
    },
    "electrodes": {
        "mf": (_REQUIRED, str),
        "md": (_REQUIRED, str),
        "workfunction_mf_ev": (None, float),
        "workfunction_md_ev": (None, float),
    },
    "geometry": {
        "t_f_nm": (_REQUIRED, float),
        "t_d_nm": (_REQUIRED, float),
        "n_x": (20, int),
        "n_y": (20, int),
        "d_nm": (5.0, float),
        "w_nm": (0.5, float),
        "k_over_w": (2e-3, float),
    },
    "electrostatics": {
        "method": ("closure", str),
        # 0.0 -> calibrate the closure kernel to the stack's Laplace matrix
        "self_fraction": (0.0, float),
        "decay_length_nm": (0.0, float),
        "lateral_cells": (2, int),
        "nz_dielectric": (4, int),
        "nz_ferroelectric": (8, int),
        "solver_rtol": (1e-10, float),
    },
    "dynamics": {
        "rho_ohm_m": (116.0, float),
        "rtol": (1e-6, float),
    },
    "transport": {
        "m_par": (1.0, float),
        "window_below_ev": (3.0, float),
        "window_above_kt": (20.0, float),
        "epsrel": (1e-6, float),
        "device_area_cm2": (3.14e-4, float),
    },
    "experiment": {
        "seed": (0, int),
        "temperature_k": (300.0, float),
        "v_preset": (-5.0, float),
        "v_r": (2.0, float),
        "v_set": (4.5, float),
        "v_set_min": (2.5, float),
        "v_set_max": (6.5, float),
        "v_set_step": (0.25, float),
        "t_d_list_nm": ([1.0, 1.5, 2.0, 2.5], list),
        "amplitude_v": (5.0, float),
        "period_s": (0.0, float),        # 0 -> quasi-static default
        "seconds_per_volt": (0.0, float),  # 0 -> 120 t_rho per volt
        "retention_hold_trho": (10.0, float),
        "read_hold_trho": (20.0, float),
        "workers": (1, int),
    },
}


@dataclass
class RunConfig:
    """Fully resolved configuration: one flat dict per section."""

    sections: dict[str, dict] = field(default_factory=dict)

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    # -- construction -----------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        errors = []
        for section in raw:
            if section not in _SCHEMA:
                errors.append(f"unknown section [{section}]")
        resolved: dict[str, dict] = {}
        for section, schema in _SCHEMA.items():
            given = raw.get(section, {})
            if not isinstance(given, dict):
                errors.append(f"[{section}] must be a table")
                given = {}
            for key in given:
                if key not in schema:
                    errors.append(f"unknown key {section}.{key}")
            out = {}
            for key, (default, typ) in schema.items():
                if key in given:
                    val = given[key]
                    if typ is float and isinstance(val, int):
                        val = float(val)
                    if val is not None and not isinstance(val, typ):
                        errors.append(f"{section}.{key}: expected {typ.__name__}, "
                                      f"got {type(val).__name__}")
                    out[key] = val
                elif default is _REQUIRED:
                    errors.append(f"missing required key {section}.{key}")
                else:
                    out[key] = default
            resolved[section] = out
        if errors:
            raise ConfigError("; ".join(errors))
        cfg = cls(sections=resolved)
        cfg._apply_env_overrides()
        cfg._validate_materials()
        return cfg

    def _apply_env_overrides(self):
        seed = os.environ.get("FTJSIM_SEED")
        if seed is not None:
            self.sections["experiment"]["seed"] = int(seed)
        workers = os.environ.get("FTJSIM_WORKERS")
        if workers is not None:
            self.sections["experiment"]["workers"] = int(workers)

    def _validate_materials(self):
        for section in ("ferroelectric", "dielectric"):
            sec = self.sections[section]
            if sec["material"] not in MATERIALS:
                missing = [k for k in ("chi_ev", "eps_r", "m_ox")
                           if sec[k] is None]
                if missing:
                    raise ConfigError(
                        f"{section}.material '{sec['material']}' is not a "
                        f"preset; provide {', '.join(missing)}")
        for key in ("mf", "md"):
            sec = self.sections["electrodes"]
            if sec[key] not in ELECTRODES and sec[f"workfunction_{key}_ev"] is None:
                raise ConfigError(
                    f"electrodes.{key} '{sec[key]}' is not a preset; provide "
                    f"workfunction_{key}_ev")

    # -- domain-object builders -------------------------------------------

    def _material(self, section: str) -> Material:
        sec = self.sections[section]
        preset = MATERIALS.get(sec["material"])
        if preset is not None and all(sec[k] is None
                                      for k in ("chi_ev", "eps_r", "m_ox")):
            return preset
        base = preset or Material(sec["material"], 1.0, 1.0, 1.0)
        return Material(
            name=sec["material"],
            chi=sec["chi_ev"] if sec["chi_ev"] is not None else base.chi,
            eps_r=sec["eps_r"] if sec["eps_r"] is not None else base.eps_r,
            m_ox=sec["m_ox"] if sec["m_ox"] is not None else base.m_ox,
        )

    def _electrode(self, key: str) -> Electrode:
        sec = self.sections["electrodes"]
        wf = sec[f"workfunction_{key}_ev"]
        preset = ELECTRODES.get(sec[key])
        if wf is None:
            return preset
        return Electrode(sec[key], wf)

    def stack(self, t_d_override_nm: float | None = None) -> StackSpec:
        geo = self.sections["geometry"]
        t_d = (t_d_override_nm if t_d_override_nm is not None
               else geo["t_d_nm"]) * _NM
        return StackSpec(
            ferroelectric=self._material("ferroelectric"),
            dielectric=self._material("dielectric"),
            t_f=geo["t_f_nm"] * _NM,
            t_d=t_d,
            electrode_mf=self._electrode("mf"),
            electrode_md=self._electrode("md"),
            temperature=self.sections["experiment"]["temperature_k"],
        )

    def grid(self) -> GridSpec:
        geo = self.sections["geometry"]
        return GridSpec(n_x=geo["n_x"], n_y=geo["n_y"], d=geo["d_nm"] * _NM,
                        w=geo["w_nm"] * _NM, k_over_w=geo["k_over_w"])

    def nominal_anisotropy(self) -> tuple[float, float, float]:
        fe = self.sections["ferroelectric"]
        return fe["alpha"], fe["beta"], fe["gamma"]

    def variation(self) -> VariationSpec:
        fe = self.sections["ferroelectric"]
        return VariationSpec(sigma_alpha=fe["sigma_alpha"],
                             sigma_beta=fe["sigma_beta"],
                             sigma_gamma=fe["sigma_gamma"],
                             seed=self.sections["experiment"]["seed"])

    def dynamics(self) -> DynamicsConfig:
        dyn = self.sections["dynamics"]
        return DynamicsConfig(rho=dyn["rho_ohm_m"], rtol=dyn["rtol"])

    def mesh(self) -> LaplaceMesh:
        es = self.sections["electrostatics"]
        return LaplaceMesh(lateral_cells=es["lateral_cells"],
                           nz_dielectric=es["nz_dielectric"],
                           nz_ferroelectric=es["nz_ferroelectric"],
                           rtol=es["solver_rtol"])

    def closure_kernel(self) -> tuple[float, float] | None:
        """Explicit (self_fraction, decay_length [m]) kernel, or None when
        both are left at the 0.0 sentinel (= calibrate to the stack)."""
        es = self.sections["electrostatics"]
        s, lam_nm = es["self_fraction"], es["decay_length_nm"]
        if s == 0.0 and lam_nm == 0.0:
            return None
        if s == 0.0 or lam_nm == 0.0:
            raise ConfigError("electrostatics.self_fraction and "
                              "decay_length_nm must be set together "
                              "(0.0 = auto-calibrate both)")
        return s, lam_nm * _NM

    def transport(self) -> TransportConfig:
        tr = self.sections["transport"]
        return TransportConfig(
            m_par=tr["m_par"],
            window_below=tr["window_below_ev"],
            window_above_kt=tr["window_above_kt"],
            epsrel=tr["epsrel"],
            device_area=tr["device_area_cm2"] * 1e-4,
        )

    def device(self, t_d_override_nm: float | None = None):
        from .protocol import Device

        es = self.sections["electrostatics"]
        return Device.build(
            stack=self.stack(t_d_override_nm),
            grid=self.grid(),
            nominal=self.nominal_anisotropy(),
            variation=self.variation(),
            dyn=self.dynamics(),
            transport=self.transport(),
            coupling_method=es["method"],
            mesh=self.mesh(),
            closure_kernel=self.closure_kernel(),
        )

    # -- serialization ----------------------------------------------------

    def to_toml(self, extra: dict | None = None) -> str:
        """Emit the fully resolved config (round-trips through from_file)."""
        lines = []
        if extra:
            for k, v in extra.items():
                lines.append(f"# {k} = {v}")
        for section, keys in self.sections.items():
            lines.append(f"[{section}]")
            for key, val in keys.items():
                if val is None:
                    continue
                lines.append(f"{key} = {_toml_value(val)}")
            lines.append("")
        return "\n".join(lines)

    def write_manifest(self, path: str | Path, command: str) -> None:
        text = self.to_toml(extra={"ftjsim_version": _pkg_version,
                                   "command": command})
        Path(path).write_text(text)


def _toml_value(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, str):
        return f'"{val}"'
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, list):
        return "[" + ", ".join(_toml_value(v) for v in val) + "]"
    return str(val)


def parse_config(path: str | Path) -> RunConfig:
    """Load and fully resolve a TOML config file."""
    return RunConfig.from_file(path)
