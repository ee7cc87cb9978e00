"""Single-atom frequency-comb photon-echo memory in a bad cavity.

The library builds absorption combs (ideal or from Zeeman-split hyperfine
lines of an alkali atom), evaluates the joint atom-cavity transfer function,
propagates Gaussian pulses through it and measures first-echo efficiency.
"""
from .angular import clebsch_gordan, wigner3j, wigner6j
from .atomic import (
    AtomSpec,
    build_atomic_comb,
    get_atom,
    hyperfine_zeeman_matrix,
    level_eigensystem,
    load_atom_data,
)
from .cavity import (
    CavityParams,
    absorption_spectrum,
    propagator,
    purcell_regime,
    susceptibility,
    transfer_function,
)
from .comb import FrequencyComb, comb_table, finesse, ideal_comb, mean_spacing
from .estimator import CavityMemory
from .memory import EchoReport, analyze_echo, detect_echo, echo_window, efficiency
from .pulse import GridError, Pulse, SimGrid, Waveform, gaussian_input, make_grid, propagate
from .simulation import MemoryContext, pulse_width_range
from .sweep import SweepResult, SweepSpec, optimize_2d, optimize_pulse_width, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AtomSpec",
    "CavityMemory",
    "CavityParams",
    "EchoReport",
    "FrequencyComb",
    "GridError",
    "MemoryContext",
    "Pulse",
    "SimGrid",
    "SweepResult",
    "SweepSpec",
    "Waveform",
    "absorption_spectrum",
    "analyze_echo",
    "build_atomic_comb",
    "clebsch_gordan",
    "comb_table",
    "detect_echo",
    "echo_window",
    "efficiency",
    "finesse",
    "gaussian_input",
    "get_atom",
    "hyperfine_zeeman_matrix",
    "ideal_comb",
    "level_eigensystem",
    "load_atom_data",
    "make_grid",
    "mean_spacing",
    "optimize_2d",
    "optimize_pulse_width",
    "propagate",
    "propagator",
    "pulse_width_range",
    "purcell_regime",
    "run_sweep",
    "susceptibility",
    "transfer_function",
    "wigner3j",
    "wigner6j",
]
