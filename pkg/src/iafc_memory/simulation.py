"""One memory configuration: comb + cavity evaluated on a fixed grid."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfcinv

from .cavity import CavityParams, bare_transfer_function, purcell_regime, transfer_function
from .comb import FrequencyComb, mean_spacing
from .memory import EchoReport, analyze_echo, efficiency
from .pulse import (
    DEFAULT_SAMPLES_CAP,
    Pulse,
    SimGrid,
    Waveform,
    gaussian_input,
    make_grid,
    propagate,
)

__all__ = ["MemoryContext", "PULSE_RANGE", "MAX_WINDOW_LEAK", "pulse_width_range"]

# pulse widths searched, in units of the echo spacing
PULSE_RANGE = (0.1, 100.0)
# largest fraction of the input energy allowed to fall inside the echo window
MAX_WINDOW_LEAK = 5e-4


def pulse_width_range(spacing: float) -> tuple[float, float]:
    """Bandwidths searched for a comb of the given echo spacing.

    The nominal range is ``[spacing / 10, 100 spacing]``.  Its lower end is
    raised until the input pulse itself puts at most ``MAX_WINDOW_LEAK`` of
    its energy past the start of the echo window (``pi / spacing`` after its
    centre); narrower pulses would be scored as echo without ever
    interacting with the comb.
    """
    leak_limit = erfcinv(2 * MAX_WINDOW_LEAK) * spacing / np.pi
    return max(PULSE_RANGE[0] * spacing, leak_limit), PULSE_RANGE[1] * spacing


@dataclass(eq=False)
class MemoryContext:
    """Comb and cavity with a grid wide enough for every pulse width in ``widths``.

    The transfer function is evaluated once; :meth:`efficiency` then costs
    one forward and one inverse FFT per pulse width.

    ``widths`` defaults to :func:`pulse_width_range` of the echo spacing.
    ``bare_response`` is the same cavity without the atom; :meth:`baseline`
    uses it to show how much window energy the cavity delay alone supplies.
    """

    comb: FrequencyComb
    cavity: CavityParams
    spacing: float | None = None
    widths: tuple[float, float] | None = None
    samples_cap: int = DEFAULT_SAMPLES_CAP
    pulse_center: float | None = None
    grid: SimGrid = field(init=False)
    response: np.ndarray = field(init=False, repr=False)
    bare_response: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.spacing is None:
            self.spacing = mean_spacing(self.comb)
        if self.widths is None:
            self.widths = pulse_width_range(self.spacing)
        pulses = [self.pulse(w) for w in self.widths]
        self.grid = make_grid(self.comb, self.cavity, pulses, spacing=self.spacing,
                              samples_cap=self.samples_cap)
        self.response = transfer_function(self.comb, self.cavity, self.grid.omega)
        self.bare_response = bare_transfer_function(self.cavity, self.grid.omega)

    def pulse(self, width: float) -> Pulse:
        return Pulse(width, self.pulse_center)

    def simulate(self, width: float) -> tuple[Pulse, Waveform, Waveform]:
        pulse = self.pulse(width)
        wave_in, spectrum = gaussian_input(pulse, self.grid)
        return pulse, wave_in, propagate(spectrum, self.response, self.grid)

    def efficiency(self, width: float) -> float:
        pulse, wave_in, wave_out = self.simulate(width)
        return efficiency(wave_in, wave_out, self.spacing, pulse.center)

    def baseline(self, width: float) -> float:
        """Window energy fraction reflected by the cavity without the atom."""
        pulse = self.pulse(width)
        wave_in, spectrum = gaussian_input(pulse, self.grid)
        bare = propagate(spectrum, self.bare_response, self.grid)
        return efficiency(wave_in, bare, self.spacing, pulse.center)

    def report(self, width: float, parameters: dict | None = None) -> EchoReport:
        pulse, wave_in, wave_out = self.simulate(width)
        return analyze_echo(wave_in, wave_out, self.spacing, pulse,
                            purcell=purcell_regime(self.comb, self.cavity),
                            parameters=parameters, baseline=self.baseline(width))
