"""Scikit-learn style front end for a single-atom cavity memory."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .atomic import build_atomic_comb, get_atom
from .cavity import CavityParams
from .comb import FrequencyComb, ideal_comb, mean_spacing
from .pulse import DEFAULT_SAMPLES_CAP
from .simulation import MemoryContext, pulse_width_range
from .validation import check_choice, check_nonnegative, check_positive, check_waveforms

__all__ = ["CavityMemory"]

TWO_PI = 2 * np.pi


class CavityMemory(TransformerMixin, BaseEstimator):
    """Photon-echo memory made of one comb atom in a single-mode cavity.

    ``fit`` builds the comb and cavity response and, when
    ``pulse_width="optimize"``, searches for the input bandwidth that
    maximises the first-echo efficiency.  ``transform`` maps input field
    envelopes sampled on the fitted grid to output envelopes, and ``score``
    returns the storage efficiency of the fitted pulse.

    All rates are in s^-1 / rad s^-1.  Defaults are the ideal seven-tooth
    comb with 300 MHz spacing at the reported optimum coupling.

    Parameters
    ----------
    comb : {"ideal", "atomic"} or FrequencyComb
    n_teeth, spacing, linewidth, coupling : ideal-comb shape; ``coupling``
        is the effective coupling ``sqrt(sigma) g``.
    atom, field, polarization, carrier_offset, atom_data : atomic comb
        (atom name, tesla, q in {-1, 0, 1}, rad/s, constants file).
    kappa, cavity_detuning, mode_volume : cavity field decay rate,
        ``omega_c - omega_L`` and mode volume (m^3, atomic combs only).
    pulse_width : float or "optimize"
        Gaussian spectral standard deviation of the input (rad/s).
    pulse_center : float, optional
        Input pulse centre (s); defaults to 2 ns or later if needed.
    echo_spacing : float, optional
        Comb spacing defining the echo window; defaults to the mean spacing.
    samples_cap : int
        Largest FFT grid allowed.
    """

    def __init__(self, comb="ideal", n_teeth=7, spacing=TWO_PI * 300e6, linewidth=7.5e6,
                 coupling=1.8e9, atom="Rb87", field=0.15, polarization=1, carrier_offset=None,
                 atom_data=None, kappa=11e9, cavity_detuning=0.0, mode_volume=None,
                 pulse_width="optimize", pulse_center=None, echo_spacing=None,
                 samples_cap=DEFAULT_SAMPLES_CAP):
        self.comb = comb
        self.n_teeth = n_teeth
        self.spacing = spacing
        self.linewidth = linewidth
        self.coupling = coupling
        self.atom = atom
        self.field = field
        self.polarization = polarization
        self.carrier_offset = carrier_offset
        self.atom_data = atom_data
        self.kappa = kappa
        self.cavity_detuning = cavity_detuning
        self.mode_volume = mode_volume
        self.pulse_width = pulse_width
        self.pulse_center = pulse_center
        self.echo_spacing = echo_spacing
        self.samples_cap = samples_cap

    # ------------------------------------------------------------------
    def _build(self) -> tuple[FrequencyComb, CavityParams]:
        check_nonnegative("kappa", self.kappa)
        if not np.isfinite(self.cavity_detuning):
            raise ValueError("cavity_detuning must be finite")
        if isinstance(self.comb, FrequencyComb):
            cavity = CavityParams(self.kappa, self.cavity_detuning, self.mode_volume)
            return self.comb, cavity
        check_choice("comb", self.comb, ("ideal", "atomic"))
        if self.comb == "ideal":
            comb = ideal_comb(self.n_teeth, check_positive("spacing", self.spacing),
                              check_positive("linewidth", self.linewidth),
                              check_positive("coupling", self.coupling))
            return comb, CavityParams(self.kappa, self.cavity_detuning, self.mode_volume)

        atom = get_atom(self.atom, self.atom_data)
        check_choice("polarization", self.polarization, (-1, 0, 1))
        if self.mode_volume is None:
            raise ValueError("atomic combs need mode_volume")
        cavity = CavityParams(self.kappa, self.cavity_detuning,
                              check_positive("mode_volume", self.mode_volume), atom.omega0)
        comb = build_atomic_comb(atom, check_nonnegative("field", self.field),
                                 self.polarization, cavity, self.carrier_offset)
        return comb, cavity

    def _snapshot(self) -> dict:
        params = {}
        for key, value in self.get_params().items():
            if isinstance(value, FrequencyComb):
                value = value.label or "custom comb"
            params[key] = value
        return params

    def fit(self, X=None, y=None):
        """Build the memory and choose the input pulse; ``X`` and ``y`` are ignored."""
        from .sweep import optimize_pulse_width

        comb, cavity = self._build()
        spacing = (check_positive("echo_spacing", self.echo_spacing)
                   if self.echo_spacing is not None else mean_spacing(comb))
        if isinstance(self.pulse_width, str):
            check_choice("pulse_width", self.pulse_width, ("optimize",))
            widths = pulse_width_range(spacing)
        elif isinstance(self.pulse_width, numbers.Real):
            width = check_positive("pulse_width", self.pulse_width)
            widths = (width, width)
        else:
            raise ValueError(f"pulse_width must be a number or 'optimize', got {self.pulse_width!r}")

        context = MemoryContext(comb, cavity, spacing=spacing, widths=widths,
                                samples_cap=self.samples_cap, pulse_center=self.pulse_center)
        if isinstance(self.pulse_width, str):
            width, eta = optimize_pulse_width(context)
        else:
            width, eta = widths[0], context.efficiency(widths[0])

        self.comb_ = comb
        self.cavity_ = cavity
        self.spacing_ = spacing
        self.context_ = context
        self.grid_ = context.grid
        self.pulse_width_ = width
        self.efficiency_ = eta
        self.report_ = context.report(width, parameters=self._snapshot())
        return self

    def transform(self, X):
        """Output envelopes for input envelopes ``X`` sampled on ``grid_``."""
        check_is_fitted(self, "context_")
        X, single = check_waveforms(X, self.grid_.n_samples)
        out = np.fft.ifft(np.fft.fft(X, axis=1) * self.context_.response, axis=1)
        return out[0] if single else out

    def score(self, X=None, y=None) -> float:
        """First-echo storage efficiency of the fitted pulse."""
        check_is_fitted(self, "efficiency_")
        return self.efficiency_

    def echo(self):
        """``(pulse, input waveform, output waveform)`` for the fitted pulse."""
        check_is_fitted(self, "context_")
        return self.context_.simulate(self.pulse_width_)
