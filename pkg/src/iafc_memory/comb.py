"""Frequency-comb description shared by ideal and atomic combs.

All frequencies are angular (rad/s) and measured from the carrier of the
input light.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "CombTooth",
    "FrequencyComb",
    "ideal_comb",
    "mean_spacing",
    "finesse",
    "comb_table",
]


class CombTooth(NamedTuple):
    detuning: float
    coupling: float
    population: float
    ground: int = 0


@dataclass(frozen=True, eq=False)
class FrequencyComb:
    """Absorption comb seen by the cavity field.

    Parameters
    ----------
    detunings, couplings, populations : array_like
        Per-tooth transition detuning from the carrier, atom-cavity coupling
        ``g_nm`` and population of the ground level the tooth starts from.
    gamma : float
        Homogeneous linewidth (full width, rad/s) shared by every tooth.
        ``gamma == 0`` is accepted for lossless checks.
    grounds : array_like of int, optional
        Ground-level index of every tooth.  Teeth from the same ground level
        share its population.  Defaults to one ground level per tooth.
    """

    detunings: np.ndarray
    couplings: np.ndarray
    populations: np.ndarray
    gamma: float
    grounds: np.ndarray | None = None
    label: str = ""
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        det = np.asarray(self.detunings, dtype=float).ravel()
        cpl = np.asarray(self.couplings, dtype=complex).ravel()
        if not np.any(cpl.imag):
            cpl = cpl.real
        pop = np.asarray(self.populations, dtype=float).ravel()
        grounds = (
            np.arange(det.size) if self.grounds is None
            else np.asarray(self.grounds, dtype=int).ravel()
        )
        if det.size == 0:
            raise ValueError("a frequency comb needs at least one tooth")
        if not (det.size == cpl.size == pop.size == grounds.size):
            raise ValueError("tooth arrays must have equal length")
        if not np.all(np.isfinite(det)) or not np.all(np.isfinite(cpl)):
            raise ValueError("tooth detunings and couplings must be finite")
        if np.any(pop < 0) or np.any(pop > 1):
            raise ValueError("populations must lie in [0, 1]")
        if not (self.gamma >= 0 and np.isfinite(self.gamma)):
            raise ValueError(f"linewidth must be finite and >= 0, got {self.gamma}")
        _, first = np.unique(grounds, return_index=True)
        if abs(pop[first].sum() - 1.0) > 1e-9:
            raise ValueError("ground populations must sum to 1")

        for name, value in (("detunings", det), ("couplings", cpl),
                            ("populations", pop), ("grounds", grounds)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "gamma", float(self.gamma))
        weights = pop * np.abs(cpl) ** 2
        weights.setflags(write=False)
        object.__setattr__(self, "_weights", weights)

    @property
    def weights(self) -> np.ndarray:
        """``sigma_mm |g_nm|^2`` for every tooth (rad^2/s^2)."""
        return self._weights

    @property
    def total_coupling(self) -> float:
        """Sum of tooth weights; equals ``N g'^2`` for an ideal comb."""
        return float(self._weights.sum())

    @property
    def teeth(self) -> list[CombTooth]:
        return [
            CombTooth(float(d), c.item(), float(p), int(m))
            for d, c, p, m in zip(self.detunings, self.couplings, self.populations, self.grounds)
        ]

    def __len__(self) -> int:
        return self.detunings.size

    def with_linewidth(self, gamma: float) -> "FrequencyComb":
        return FrequencyComb(self.detunings, self.couplings, self.populations, gamma,
                             self.grounds, self.label)

    def subset(self, mask) -> "FrequencyComb":
        """Teeth selected by ``mask``; populations are not renormalised."""
        mask = np.asarray(mask)
        comb = object.__new__(FrequencyComb)
        for name in ("detunings", "couplings", "populations", "grounds"):
            object.__setattr__(comb, name, getattr(self, name)[mask])
        object.__setattr__(comb, "gamma", self.gamma)
        object.__setattr__(comb, "label", self.label)
        object.__setattr__(comb, "_weights", self._weights[mask])
        return comb


def ideal_comb(n_teeth: int, spacing: float, gamma: float, coupling: float,
               label: str | None = None) -> FrequencyComb:
    """Uniform comb of ``n_teeth`` identical teeth centred on the carrier.

    Teeth sit at ``(k - (n_teeth - 1) / 2) * spacing``.  Each tooth carries
    population ``1 / n_teeth`` and coupling ``coupling * sqrt(n_teeth)`` so
    that the effective coupling ``sqrt(sigma) * g`` equals ``coupling``.
    """
    if int(n_teeth) != n_teeth or n_teeth < 1:
        raise ValueError(f"n_teeth must be a positive integer, got {n_teeth}")
    n_teeth = int(n_teeth)
    for name, value in (("spacing", spacing), ("gamma", gamma), ("coupling", coupling)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    offsets = np.arange(n_teeth) - (n_teeth - 1) / 2
    return FrequencyComb(
        detunings=offsets * spacing,
        couplings=np.full(n_teeth, coupling * np.sqrt(n_teeth)),
        populations=np.full(n_teeth, 1.0 / n_teeth),
        gamma=gamma,
        label=label or f"ideal N={n_teeth}",
    )


def _clusters(comb: FrequencyComb) -> np.ndarray:
    # teeth closer than gamma/2 are merged into one weighted line
    order = np.argsort(comb.detunings, kind="stable")
    det = comb.detunings[order]
    w = comb.weights[order]
    if not np.any(w > 0):
        w = np.ones_like(det)
    breaks = np.flatnonzero(np.diff(det) >= comb.gamma / 2) + 1
    centres = []
    for members in np.split(np.arange(det.size), breaks):
        weight = w[members]
        if weight.sum() > 0:
            centres.append(np.dot(det[members], weight) / weight.sum())
        else:
            centres.append(det[members].mean())
    return np.asarray(centres)


def mean_spacing(comb: FrequencyComb) -> float:
    """Average gap between adjacent (merged) teeth, in rad/s."""
    centres = _clusters(comb)
    if centres.size < 2:
        raise ValueError("mean spacing needs at least two distinct teeth")
    return float((centres[-1] - centres[0]) / (centres.size - 1))


def finesse(comb: FrequencyComb) -> float:
    """Ratio of mean tooth spacing to tooth linewidth."""
    if comb.gamma == 0:
        return float("inf")
    return mean_spacing(comb) / comb.gamma


def comb_table(comb: FrequencyComb) -> np.ndarray:
    """Columns ``detuning_Hz, g_Hz, sigma`` (ordinary frequencies), one row per tooth."""
    two_pi = 2 * np.pi
    return np.column_stack([
        comb.detunings / two_pi,
        np.abs(comb.couplings) / two_pi,
        comb.populations,
    ])
