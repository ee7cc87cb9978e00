"""Echo detection and storage efficiency."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .pulse import Waveform

__all__ = ["EchoReport", "echo_window", "efficiency", "detect_echo", "analyze_echo"]


@dataclass(frozen=True)
class EchoReport:
    efficiency: float
    echo_time: float | None
    window: tuple[float, float]
    input_energy: float
    output_window_energy: float
    spacing: float
    pulse_width: float
    pulse_center: float
    purcell_regime: bool | None = None
    baseline_efficiency: float | None = None  # same window, cavity without the atom
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0 + 1e-9:
            raise ValueError(f"efficiency {self.efficiency} outside [0, 1]")
        if not self.window[0] < self.window[1]:
            raise ValueError("echo window must have t1 < t2")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["window"] = list(self.window)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return repr(value)


def echo_window(spacing: float, t0: float) -> tuple[float, float]:
    """First-echo window ``[t0 + pi / spacing, t0 + 3 pi / spacing]``."""
    if not spacing > 0:
        raise ValueError("comb spacing must be positive")
    return t0 + np.pi / spacing, t0 + 3 * np.pi / spacing


def _window_integral(t: np.ndarray, y: np.ndarray, t1: float, t2: float) -> float:
    inside = (t > t1) & (t < t2)
    ts = np.concatenate([[t1], t[inside], [t2]])
    ys = np.concatenate([[np.interp(t1, t, y)], y[inside], [np.interp(t2, t, y)]])
    return float(trapezoid(ys, ts))


def efficiency(in_wave: Waveform, out_wave: Waveform, spacing: float, t0: float) -> float:
    """Fraction of the input energy emitted inside the first-echo window."""
    if in_wave.grid != out_wave.grid:
        raise ValueError("input and output waveforms must share a grid")
    t = in_wave.t
    t1, t2 = echo_window(spacing, t0)
    if t1 < t[0] or t2 > t[-1]:
        raise ValueError(
            f"echo window [{t1:.3g}, {t2:.3g}] s exceeds the grid [0, {t[-1]:.3g}] s"
        )
    numerator = _window_integral(t, out_wave.intensity, t1, t2)
    return numerator / float(trapezoid(in_wave.intensity, t))


def detect_echo(out_wave: Waveform, t0: float, guard: float) -> float | None:
    """Delay past ``t0`` of the strongest output maximum beyond ``t0 + guard``.

    Returns None when no local maximum reaches 1% of the reflected peak
    (the strongest output within ``guard`` of ``t0``).
    """
    t, intensity = out_wave.t, out_wave.intensity
    near = np.abs(t - t0) <= guard
    reflected = intensity[near].max() if np.any(near) else 0.0

    interior = intensity[1:-1]
    is_peak = (interior > intensity[:-2]) & (interior >= intensity[2:])
    peaks = np.flatnonzero(is_peak) + 1
    peaks = peaks[t[peaks] > t0 + guard]
    if peaks.size == 0:
        return None
    k = peaks[np.argmax(intensity[peaks])]
    if intensity[k] < 0.01 * reflected or intensity[k] <= 0:
        return None

    # parabolic refinement of the sampled peak
    y0, y1, y2 = intensity[k - 1], intensity[k], intensity[k + 1]
    curvature = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / curvature if curvature < 0 else 0.0
    return float(t[k] + shift * out_wave.grid.dt - t0)


def analyze_echo(in_wave: Waveform, out_wave: Waveform, spacing: float, pulse,
                 guard: float | None = None, purcell: bool | None = None,
                 parameters: dict | None = None, baseline: float | None = None) -> EchoReport:
    """Bundle efficiency, echo delay and window bookkeeping for one run."""
    t0 = pulse.center
    window = echo_window(spacing, t0)
    eta = efficiency(in_wave, out_wave, spacing, t0)
    t = in_wave.t
    return EchoReport(
        efficiency=min(max(eta, 0.0), 1.0),
        echo_time=detect_echo(out_wave, t0, 4 * pulse.duration if guard is None else guard),
        window=window,
        input_energy=float(trapezoid(in_wave.intensity, t)),
        output_window_energy=_window_integral(t, out_wave.intensity, *window),
        spacing=float(spacing),
        pulse_width=float(pulse.width),
        pulse_center=float(t0),
        purcell_regime=purcell,
        baseline_efficiency=baseline,
        parameters=dict(parameters or {}),
    )
