"""Physical constants (SI, CODATA 2018)."""

Q_E = 1.602176634e-19      # elementary charge [C]
HBAR = 1.054571817e-34     # reduced Planck constant [J s]
EPS0 = 8.8541878128e-12    # vacuum permittivity [F/m]
KB = 1.380649e-23          # Boltzmann constant [J/K]
M0 = 9.1093837015e-31      # free electron mass [kg]


def kt_ev(temperature: float) -> float:
    """Thermal energy K_B*T in eV."""
    return KB * temperature / Q_E
