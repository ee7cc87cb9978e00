"""Hyperfine-Zeeman structure of alkali fine-structure levels and atomic combs.

Energies are in Hz (``H / h``); the product basis is ``|m_I, m_J>`` with
``m_I`` as the outer (slow) index and both projections ascending.

The electric-quadrupole term is the usual

    B_hf * [3 (I.J)^2 + 3/2 (I.J) - I(I+1) J(J+1)] / [2I(2I-1) J(2J-1)],

dropped when ``J = 1/2`` or ``I <= 1/2``.  Zeeman coupling is
``(mu_B / h) B (g_J J_z + g_I I_z)`` with ``g_I`` carrying its own sign.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy import constants

from .angular import clebsch_gordan, twice
from .cavity import CavityParams
from .comb import FrequencyComb

__all__ = [
    "Isotope",
    "FineLevel",
    "AtomSpec",
    "ZeemanEigensystem",
    "load_atom_data",
    "get_atom",
    "hyperfine_zeeman_matrix",
    "eigensystem",
    "dipole_operator",
    "dipole_matrix",
    "transition_dipole",
    "build_atomic_comb",
    "ATOM_DATA_ENV",
    "DIPOLE_CUTOFF",
]

ATOM_DATA_ENV = "IAFC_ATOM_DATA"
DIPOLE_CUTOFF = 1e-6
MU_B_HZ_PER_T = constants.physical_constants["Bohr magneton in Hz/T"][0]


@dataclass(frozen=True)
class Isotope:
    name: str
    nuclear_spin: Fraction
    g_I: float

    def __post_init__(self):
        twice(self.nuclear_spin)
        if self.nuclear_spin < 0:
            raise ValueError("nuclear spin must be >= 0")


@dataclass(frozen=True)
class FineLevel:
    label: str
    J: Fraction
    A_hf: float  # Hz
    B_hf: float  # Hz
    g_J: float

    def __post_init__(self):
        if twice(self.J) < 0:
            raise ValueError("J must be >= 0")


@dataclass(frozen=True)
class AtomSpec:
    isotope: Isotope
    ground: FineLevel
    excited: FineLevel
    reduced_dipole: float  # C m
    wavelength: float  # m
    gamma: float  # rad/s, excited-state decay rate

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.reduced_dipole > 0:
            raise ValueError("reduced dipole must be positive")
        for level in (self.ground, self.excited):
            if level.B_hf != 0 and (level.J == Fraction(1, 2) or self.isotope.nuclear_spin <= Fraction(1, 2)):
                raise ValueError(f"{level.label}: quadrupole constant must vanish for J=1/2 or I<=1/2")

    @property
    def name(self) -> str:
        return self.isotope.name

    @property
    def omega0(self) -> float:
        """Fine-structure transition frequency (rad/s)."""
        return 2 * np.pi * constants.c / self.wavelength


@dataclass(frozen=True, eq=False)
class ZeemanEigensystem:
    energies: np.ndarray  # Hz, ascending
    states: np.ndarray  # columns are eigenvectors in the product basis
    basis_labels: list  # (m_I, m_J) per basis row


# ---------------------------------------------------------------- data file

def _default_data_path():
    env = os.environ.get(ATOM_DATA_ENV)
    if env:
        return Path(env)
    return resources.files("iafc_memory").joinpath("data/atoms.yaml")


def _exact(text) -> Fraction:
    return Fraction(str(text))


@lru_cache(maxsize=8)
def _load(path: str) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    isotopes = {r["atom"]: Isotope(r["atom"], _exact(r["I"]), float(r["gI"]))
                for r in raw["isotopes"]}
    levels = {
        (r["atom"], r["level"]): FineLevel(
            r["level"], _exact(r["J"]), float(r["A_hf_MHz"]) * 1e6,
            float(r["B_hf_MHz"]) * 1e6, float(r["gJ"]),
        )
        for r in raw["levels"]
    }
    atoms = {}
    for r in raw["transitions"]:
        atoms[r["atom"]] = AtomSpec(
            isotope=isotopes[r["atom"]],
            ground=levels[(r["atom"], r["lower"])],
            excited=levels[(r["atom"], r["upper"])],
            reduced_dipole=float(r["reduced_dipole_Cm"]),
            wavelength=float(r["lambda_nm"]) * 1e-9,
            gamma=2 * np.pi * float(r["gamma_MHz"]) * 1e6,
        )
    return atoms


def load_atom_data(path=None) -> dict[str, AtomSpec]:
    """Read the atomic-constants file (default: ``$IAFC_ATOM_DATA`` or the bundled table)."""
    return dict(_load(str(path if path is not None else _default_data_path())))


def get_atom(name: str, path=None) -> AtomSpec:
    atoms = load_atom_data(path)
    aliases = {"Rb": "Rb87", "Cs": "Cs133"}
    key = aliases.get(name, name)
    if key not in atoms:
        raise KeyError(f"unknown atom {name!r}; available: {sorted(atoms)}")
    return atoms[key]


# ----------------------------------------------------------- hamiltonian

def _spin_matrices(j: Fraction):
    m = np.arange(-float(j), float(j) + 0.5, 1.0)
    jz = np.diag(m)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
    jp = np.diag(np.sqrt(float(j) * (float(j) + 1) - m[:-1] * (m[:-1] + 1)), k=-1)
    return jz, jp, m


def hyperfine_zeeman_matrix(level: FineLevel, iso: Isotope, field: float) -> np.ndarray:
    """``H / h`` (Hz) of a fine level in a magnetic field ``field`` (tesla)."""
    if field < 0:
        raise ValueError(f"magnetic field must be >= 0, got {field}")
    I, J = iso.nuclear_spin, level.J
    iz, ip, _ = _spin_matrices(I)
    jz, jp, _ = _spin_matrices(J)
    one_i, one_j = np.eye(iz.shape[0]), np.eye(jz.shape[0])

    i_dot_j = np.kron(iz, jz) + 0.5 * (np.kron(ip, jp.T) + np.kron(ip.T, jp))
    H = level.A_hf * i_dot_j
    if level.B_hf != 0 and J > Fraction(1, 2) and I > Fraction(1, 2):
        fi, fj = float(I), float(J)
        quad = (3 * i_dot_j @ i_dot_j + 1.5 * i_dot_j
                - fi * (fi + 1) * fj * (fj + 1) * np.eye(H.shape[0]))
        H = H + level.B_hf * quad / (2 * fi * (2 * fi - 1) * fj * (2 * fj - 1))
    H = H + MU_B_HZ_PER_T * field * (level.g_J * np.kron(one_i, jz) + iso.g_I * np.kron(iz, one_j))
    return 0.5 * (H + H.T)


def basis_labels(iso: Isotope, level: FineLevel) -> list[tuple[Fraction, Fraction]]:
    def ms(j):
        return [Fraction(k, 2) for k in range(-twice(j), twice(j) + 1, 2)]
    return [(mi, mj) for mi in ms(iso.nuclear_spin) for mj in ms(level.J)]


def eigensystem(H, labels=None) -> ZeemanEigensystem:
    """Diagonalise a Hermitian matrix with a fixed eigenvector phase.

    The largest-magnitude component of every eigenvector is made real and
    positive (first such component on ties).
    """
    H = np.asarray(H)
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    energies, states = np.linalg.eigh(H)
    states = states.astype(complex)
    for k in range(states.shape[1]):
        col = states[:, k]
        mags = np.abs(col)
        lead = np.flatnonzero(mags >= mags.max() * (1 - 1e-12))[0]
        states[:, k] = col * (np.conj(col[lead]) / mags[lead])
    return ZeemanEigensystem(energies, states, list(labels) if labels is not None else [])


def level_eigensystem(atom: AtomSpec, level: FineLevel, field: float) -> ZeemanEigensystem:
    H = hyperfine_zeeman_matrix(level, atom.isotope, field)
    return eigensystem(H, basis_labels(atom.isotope, level))


# --------------------------------------------------------------- dipoles

def dipole_operator(atom: AtomSpec, q: int) -> np.ndarray:
    """Spherical dipole component ``d_q`` from ground to excited product states (C m)."""
    if q not in (-1, 0, 1):
        raise ValueError(f"polarization index must be -1, 0 or +1, got {q}")
    iso, g, e = atom.isotope, atom.ground, atom.excited
    ground_basis = basis_labels(iso, g)
    excited_basis = basis_labels(iso, e)
    op = np.zeros((len(excited_basis), len(ground_basis)))
    for col, (mi, mjg) in enumerate(ground_basis):
        for row, (mi_e, mje) in enumerate(excited_basis):
            if mi_e == mi and mje == mjg + q:
                op[row, col] = clebsch_gordan(g.J, mjg, 1, q, e.J, mje)
    return atom.reduced_dipole * op


def dipole_matrix(ground: ZeemanEigensystem, excited: ZeemanEigensystem, q: int,
                  atom: AtomSpec) -> np.ndarray:
    """``d[n, m] = <e_n | d_q | g_m>`` between eigenstates."""
    return excited.states.conj().T @ dipole_operator(atom, q) @ ground.states


def transition_dipole(ground_state, excited_state, q: int, atom: AtomSpec) -> complex:
    """Dipole matrix element between one ground and one excited state vector."""
    ground_state = np.asarray(ground_state)
    excited_state = np.asarray(excited_state)
    return complex(excited_state.conj() @ dipole_operator(atom, q) @ ground_state)


# ------------------------------------------------------------------ comb

def single_photon_field(omega_c: float, mode_volume: float) -> float:
    """Vacuum field per photon ``sqrt(hbar omega_c / (2 eps0 V))`` (V/m)."""
    return np.sqrt(constants.hbar * omega_c / (2 * constants.epsilon_0 * mode_volume))


def build_atomic_comb(atom: AtomSpec, field: float, q: int, cavity: CavityParams,
                      carrier_offset: float | None = None) -> FrequencyComb:
    """Comb of Zeeman-resolved hyperfine lines coupled to the cavity mode.

    Parameters
    ----------
    atom : AtomSpec
    field : float
        Magnetic field (T).
    q : {-1, 0, +1}
        Spherical polarization component of the cavity mode.
    cavity : CavityParams
        Must carry ``mode_volume``; ``omega_c`` defaults to the transition frequency.
    carrier_offset : float, optional
        Carrier minus fine-structure transition frequency (rad/s).  By default
        the carrier sits at the coupling-weighted centre of the comb.

    Every ground sublevel holds population ``1 / N_g``.  Lines whose
    ``|d|^2`` falls below ``1e-6`` of the strongest line are dropped.
    """
    if cavity.mode_volume is None:
        raise ValueError("atomic combs need a cavity mode volume")
    ground = level_eigensystem(atom, atom.ground, field)
    excited = level_eigensystem(atom, atom.excited, field)
    d = dipole_matrix(ground, excited, q, atom)

    strength = np.abs(d) ** 2
    keep = strength >= DIPOLE_CUTOFF * strength.max()
    if not np.any(keep) or strength.max() == 0:
        raise ValueError("no dipole-allowed lines for this polarization")
    n_idx, m_idx = np.nonzero(keep)
    n_ground = ground.energies.size

    line = 2 * np.pi * (excited.energies[n_idx] - ground.energies[m_idx])
    if carrier_offset is None:
        w = strength[n_idx, m_idx]
        carrier_offset = float(np.dot(line, w) / w.sum())

    omega_c = cavity.omega_c or atom.omega0
    couplings = d[n_idx, m_idx] * single_photon_field(omega_c, cavity.mode_volume) / constants.hbar
    return FrequencyComb(
        detunings=line - carrier_offset,
        couplings=couplings,
        populations=np.full(n_idx.size, 1.0 / n_ground),
        gamma=atom.gamma,
        grounds=m_idx,
        label=f"{atom.name} {atom.ground.label}-{atom.excited.label} B={field:g} T q={q:+d}",
    )
