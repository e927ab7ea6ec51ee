"""Monte-Carlo simulation of coherent backscattering of near-resonant light
from a cold gas of multilevel alkali atoms.

The package computes ladder (incoherent) and crossed (interference)
contributions to the light backscattered from a Gaussian atom cloud, the
enhancement-factor spectrum versus laser detuning in the four canonical
polarization channels, the angular cone profile, and the spectral response of
the detected light, including thermal-motion dephasing, ensemble orientation,
and finite laser bandwidth.
"""

__version__ = "0.1.0"

from .angular import clebsch_gordan, wigner3j, wigner6j
from .atomic import (
    AtomSpec,
    GroundPopulation,
    ZeemanState,
    classical_dipole,
    line_strengths,
    normalize_differential,
    rb85,
    scattering_amplitude,
    scattering_tensors,
    total_cross_section,
)
from .medium import (
    CloudSpec,
    Escape,
    Ray,
    Scatter,
    column_density,
    density,
    escape_amplitude,
    optical_depth_center,
    sample_free_path,
)
from .polarization import Channel, channel_vectors, transverse_projector
from .transport import (
    Accumulator,
    LaserSpec,
    ScatterEvent,
    ThermalSpec,
    Trajectory,
    accumulate,
    build_trajectory,
    enhancement,
    path_amplitudes,
    sample_laser_frequency,
    sample_velocity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
