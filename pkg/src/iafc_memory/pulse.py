"""Input pulses, simulation grids and frequency-domain propagation.

Fourier convention (frame rotating at the carrier)::

    a(omega) = int a(t) exp(-i omega t) dt
    a(t)     = (1 / 2 pi) int a(omega) exp(+i omega t) d omega

With this sign the transfer function is causal, so echoes come out after the
input pulse and ``exp(-i omega tau)`` is a delay by ``tau``.  Discretely
``a(omega_k) = dt * fft(a)`` and ``a(t) = ifft(a(omega)) / dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cavity import CavityParams
from .comb import FrequencyComb, mean_spacing

__all__ = [
    "GridError",
    "Pulse",
    "SimGrid",
    "Waveform",
    "make_grid",
    "gaussian_input",
    "propagate",
    "waveform_table",
    "write_waveform_binary",
    "read_waveform_binary",
    "DEFAULT_SAMPLES_CAP",
]

DEFAULT_SAMPLES_CAP = 2**26
DEFAULT_PULSE_CENTER = 2e-9
# minimum grid span in echo periods; Nyquist margin over the fastest rate (>= 5)
SPAN_PERIODS = 6
NYQUIST_FACTOR = 10
_BINARY_MAGIC = b"IAFCWAV1"


class GridError(ValueError):
    """The requested simulation cannot be sampled within the configured limits."""


@dataclass(frozen=True)
class Pulse:
    """Gaussian single-photon-level input pulse.

    ``width`` is the standard deviation of the amplitude spectrum (rad/s);
    the temporal amplitude then has standard deviation ``1 / width``.
    ``center`` defaults to 2 ns, pushed later when the pulse would not fit.
    """

    width: float
    center: float | None = None

    def __post_init__(self):
        if not (self.width > 0 and np.isfinite(self.width)):
            raise ValueError(f"pulse width must be positive, got {self.width}")
        if self.center is None:
            object.__setattr__(self, "center", max(DEFAULT_PULSE_CENTER, 6.0 / self.width))

    @property
    def duration(self) -> float:
        return 1.0 / self.width


@dataclass(frozen=True)
class SimGrid:
    n_samples: int
    span: float

    def __post_init__(self):
        n = self.n_samples
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_samples must be a power of two, got {n}")
        if not self.span > 0:
            raise ValueError("grid span must be positive")

    @property
    def dt(self) -> float:
        return self.span / self.n_samples

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    @property
    def omega(self) -> np.ndarray:
        """Angular frequencies in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_samples, self.dt)

    @property
    def d_omega(self) -> float:
        return 2 * np.pi / self.span


@dataclass(frozen=True, eq=False)
class Waveform:
    grid: SimGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_samples,):
            raise ValueError("waveform length does not match its grid")
        object.__setattr__(self, "samples", samples)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def energy(self) -> float:
        return float(np.sum(self.intensity) * self.grid.dt)

    def spectrum(self) -> np.ndarray:
        return np.fft.fft(self.samples) * self.grid.dt


def _next_pow2(x: float) -> int:
    return 1 << max(1, math.ceil(math.log2(max(x, 2.0))))


def required_samples(span: float, max_rate: float) -> int:
    dt_max = math.pi / (NYQUIST_FACTOR * max_rate)
    return _next_pow2(span / dt_max)


def make_grid(comb: FrequencyComb, cavity: CavityParams, pulse,
              spacing: float | None = None, samples_cap: int = DEFAULT_SAMPLES_CAP,
              periods: float = 2 * SPAN_PERIODS) -> SimGrid:
    """Choose a power-of-two grid that resolves the comb, cavity and pulse.

    The span covers ``periods`` echo periods ``2 pi / spacing`` (never fewer
    than six) plus the whole input pulse and the first-echo window; the step
    satisfies ``pi / dt >= NYQUIST_FACTOR * max(|delta|, kappa + |Delta_c|, pulse width)``.
    ``pulse`` may be a sequence of pulses, in which case the grid fits all.
    """
    if spacing is None:
        spacing = mean_spacing(comb)
    if not spacing > 0:
        raise ValueError("echo spacing must be positive")
    pulses = [pulse] if isinstance(pulse, Pulse) else list(pulse)

    period = 2 * np.pi / spacing
    span = max(max(periods, SPAN_PERIODS) * period,
               max(p.center + 1.5 * period + 5 * p.duration for p in pulses))
    max_rate = max(np.max(np.abs(comb.detunings)) + comb.gamma,
                   cavity.kappa + abs(cavity.detuning),
                   max(p.width for p in pulses))
    n = required_samples(span, max_rate)
    if n > samples_cap:
        raise GridError(
            f"grid needs {n} samples (span {span:.3g} s, step <= "
            f"{math.pi / (NYQUIST_FACTOR * max_rate):.3g} s) but the cap is {samples_cap}; "
            "raise --samples-cap, reduce the pulse bandwidth or the comb extent"
        )
    return SimGrid(n, span)


def gaussian_input(pulse: Pulse, grid: SimGrid) -> tuple[Waveform, np.ndarray]:
    """Unit-energy Gaussian envelope on ``grid`` and its spectrum (FFT order)."""
    t0, tau = pulse.center, pulse.duration
    if t0 < 5 * tau or t0 + 5 * tau > grid.span:
        raise GridError(
            f"pulse centred at {t0:.3g} s with duration {tau:.3g} s is clipped by "
            f"a grid of span {grid.span:.3g} s"
        )
    samples = np.exp(-0.5 * ((grid.t - t0) / tau) ** 2).astype(complex)
    samples /= np.sqrt(np.sum(np.abs(samples) ** 2) * grid.dt)
    wave = Waveform(grid, samples)
    return wave, wave.spectrum()


def propagate(spectrum, response, grid: SimGrid) -> Waveform:
    """Multiply an input spectrum by a response sampled on ``grid.omega`` and return to time."""
    spectrum = np.asarray(spectrum)
    response = np.asarray(response)
    if spectrum.shape != (grid.n_samples,) or response.shape != (grid.n_samples,):
        raise ValueError("spectrum and response must be sampled on the same grid")
    return Waveform(grid, np.fft.ifft(spectrum * response) / grid.dt)


def waveform_table(wave: Waveform) -> np.ndarray:
    """Columns ``t_s, Re, Im, intensity``."""
    return np.column_stack([wave.t, wave.samples.real, wave.samples.imag, wave.intensity])


def write_waveform_binary(path, wave: Waveform) -> None:
    """Little-endian layout: 8-byte magic ``IAFCWAV1``, uint64 sample count,
    float64 time step, then interleaved float64 (re, im) pairs."""
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(np.array([wave.grid.n_samples], dtype="<u8").tobytes())
        fh.write(np.array([wave.grid.dt], dtype="<f8").tobytes())
        fh.write(wave.samples.astype("<c16").tobytes())


def read_waveform_binary(path) -> Waveform:
    with open(path, "rb") as fh:
        if fh.read(8) != _BINARY_MAGIC:
            raise ValueError(f"{path} is not a waveform file")
        n = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
        dt = float(np.frombuffer(fh.read(8), dtype="<f8")[0])
        samples = np.frombuffer(fh.read(16 * n), dtype="<c16")
    return Waveform(SimGrid(n, n * dt), samples.astype(complex))
