"""Linear response of a single-mode cavity containing a frequency-comb atom.

Frequencies ``omega`` are offsets from the carrier in the sign convention of
the input-output solution: a tooth at detuning ``delta`` and the cavity at
detuning ``Delta_c`` resonate at ``omega = -delta`` and ``omega = -Delta_c``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .comb import FrequencyComb

__all__ = [
    "CavityParams",
    "ResponseSpectrum",
    "propagator",
    "transfer_function",
    "bare_transfer_function",
    "susceptibility",
    "absorption_spectrum",
    "purcell_regime",
]


@dataclass(frozen=True)
class CavityParams:
    """Single cavity mode.

    ``kappa`` is the field-decay rate entering the input-output relation,
    ``detuning`` is ``omega_c - omega_L``.  ``mode_volume`` (m^3) and
    ``omega_c`` (rad/s) are only needed to turn dipoles into couplings.
    """

    kappa: float
    detuning: float = 0.0
    mode_volume: float | None = None
    omega_c: float | None = None

    def __post_init__(self):
        if not (self.kappa >= 0 and np.isfinite(self.kappa)):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa}")
        if not np.isfinite(self.detuning):
            raise ValueError("cavity detuning must be finite")
        if self.mode_volume is not None and not self.mode_volume > 0:
            raise ValueError(f"mode volume must be positive, got {self.mode_volume}")
        if self.omega_c is not None and not self.omega_c > 0:
            raise ValueError(f"cavity frequency must be positive, got {self.omega_c}")

    @property
    def quality_factor(self) -> float:
        if self.omega_c is None or self.kappa == 0:
            raise ValueError("quality factor needs omega_c and kappa > 0")
        return self.omega_c / self.kappa


@dataclass(frozen=True)
class ResponseSpectrum:
    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        if omega.ndim != 1 or omega.size != np.shape(self.values)[0]:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if omega.size > 1:
            step = np.diff(omega)
            if np.any(step <= 0) or not np.allclose(step, step[0], rtol=1e-9, atol=0):
                raise ValueError("spectrum grid must be strictly increasing and uniform")

    def table(self) -> np.ndarray:
        """Two columns: offset frequency in Hz and the (real) value."""
        return np.column_stack([self.omega / (2 * np.pi), np.real(self.values)])


def propagator(comb: FrequencyComb, omega) -> np.ndarray:
    """Comb propagator ``D(omega) = sum sigma |g|^2 / (i (omega + delta) + gamma / 2)``.

    The sum runs tooth by tooth in a fixed order so that every ``omega``
    sample is computed identically however the grid is partitioned.
    Exactly resonant samples of a lossless comb evaluate to ``inf``.
    """
    omega = np.asarray(omega, dtype=float)
    half_gamma = comb.gamma / 2
    total = np.zeros(omega.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for delta, weight in zip(comb.detunings, comb.weights):
            if weight == 0:
                continue
            denom = 1j * (omega + delta) + half_gamma
            term = weight / denom
            if half_gamma == 0:
                term = np.where(denom == 0, np.inf, term)
            total += term
    return total


def transfer_function(comb: FrequencyComb, cavity: CavityParams, omega) -> np.ndarray:
    """Reflection ``H(omega) = a_out / a_in`` of the joint atom-cavity system."""
    omega = np.asarray(omega, dtype=float)
    if cavity.kappa == 0:
        return np.ones(omega.shape, dtype=complex)
    D = propagator(comb, omega)
    with np.errstate(invalid="ignore"):
        H = 1.0 - cavity.kappa / (1j * (omega + cavity.detuning) + D + cavity.kappa / 2)
    # a lossless tooth exactly on a grid point blocks the cavity completely
    return np.where(np.isfinite(D), H, 1.0 + 0j)


def bare_transfer_function(cavity: CavityParams, omega) -> np.ndarray:
    """Reflection of the same cavity without the atom."""
    omega = np.asarray(omega, dtype=float)
    if cavity.kappa == 0:
        return np.ones(omega.shape, dtype=complex)
    return 1.0 - cavity.kappa / (1j * (omega + cavity.detuning) + cavity.kappa / 2)


def susceptibility(comb: FrequencyComb, cavity: CavityParams, omega) -> np.ndarray:
    """Joint atom-cavity susceptibility ``chi = (2 / omega_c) i D(omega)``.

    Polarisation per intracavity field in the low-excitation limit.  Without
    a cavity frequency the prefactor is dropped (unit scale).
    """
    scale = 2.0 / cavity.omega_c if cavity.omega_c else 1.0
    return scale * 1j * propagator(comb, omega)


def absorption_spectrum(comb: FrequencyComb, cavity: CavityParams, grid) -> ResponseSpectrum:
    """Absorption ``Im chi`` against probe detuning, normalised to unit peak.

    ``grid`` holds probe-frequency offsets ``nu`` from the carrier, so teeth
    appear at their own detunings; ``chi`` is evaluated at ``omega = -nu``.
    """
    nu = np.asarray(grid, dtype=float)
    absorption = np.imag(susceptibility(comb, cavity, -nu))
    peak = np.max(np.abs(absorption))
    if peak > 0:
        absorption = absorption / peak
    return ResponseSpectrum(nu, absorption)


def purcell_regime(comb: FrequencyComb, cavity: CavityParams) -> bool:
    """Bad-cavity ordering ``kappa > N g'^2 / kappa > gamma``."""
    if cavity.kappa == 0:
        return False
    rate = comb.total_coupling / cavity.kappa
    return bool(cavity.kappa > rate > comb.gamma)
