import numpy as np
import pytest

from iafc_memory.cavity import (
    CavityParams,
    ResponseSpectrum,
    absorption_spectrum,
    propagator,
    purcell_regime,
    susceptibility,
    transfer_function,
)
from iafc_memory.comb import FrequencyComb, ideal_comb

DELTA = 2 * np.pi * 300e6
OMEGA = np.linspace(-3e10, 3e10, 200_001)


@pytest.fixture
def comb():
    return ideal_comb(7, DELTA, 7.5e6, 1.8e9)


def test_single_tooth_peak_value():
    tooth = FrequencyComb([2e9], [3e8], [1.0], 4e6)
    assert propagator(tooth, [-2e9])[0] == pytest.approx(2 * 3e8 ** 2 / 4e6)


def test_propagator_is_additive(comb):
    halves = [comb.subset(np.arange(7) < 3), comb.subset(np.arange(7) >= 3)]
    total = propagator(halves[0], OMEGA) + propagator(halves[1], OMEGA)
    assert np.allclose(propagator(comb, OMEGA), total, rtol=1e-13, atol=0)


def test_propagator_far_field_decay(comb):
    # D -> -i N g'^2 / omega far from the comb
    w = np.array([1e13, -1e13])
    assert np.allclose(propagator(comb, w), -1j * comb.total_coupling / w, rtol=1e-6)


def test_lossless_comb_is_all_pass(comb):
    lossless = comb.with_linewidth(0.0)
    H = transfer_function(lossless, CavityParams(7e9), OMEGA)
    assert np.max(np.abs(np.abs(H) - 1)) < 1e-12


@pytest.mark.parametrize("kappa,detuning", [(7e9, 0.0), (11e9, 2e9), (2e9, -1e9)])
def test_passive(comb, kappa, detuning):
    H = transfer_function(comb, CavityParams(kappa, detuning), OMEGA)
    assert np.all(np.abs(H) <= 1 + 1e-12)


def test_empty_cavity_reflection():
    empty = FrequencyComb([0.0], [0.0], [1.0], 1e6)
    cav = CavityParams(5e9, 1e9)
    H = transfer_function(empty, cav, OMEGA)
    assert np.allclose(H, 1 - 5e9 / (1j * (OMEGA + 1e9) + 2.5e9), rtol=1e-13)
    assert transfer_function(empty, CavityParams(5e9), [0.0])[0] == pytest.approx(-1)


def test_no_cavity_coupling_passes_everything(comb):
    assert np.all(transfer_function(comb, CavityParams(0.0), OMEGA) == 1)


def test_far_from_everything_h_is_one(comb):
    assert transfer_function(comb, CavityParams(7e9), [1e15])[0] == pytest.approx(1, abs=1e-5)


def test_partition_invariance(comb):
    cav = CavityParams(7e9, 1e9)
    whole = transfer_function(comb, cav, OMEGA)
    parts = np.concatenate([transfer_function(comb, cav, part) for part in np.array_split(OMEGA, 7)])
    assert np.array_equal(whole, parts)


def test_susceptibility_scale(comb):
    cav = CavityParams(7e9, omega_c=2 * np.pi * 7e14)
    w = np.linspace(-1e9, 1e9, 11)
    assert np.allclose(susceptibility(comb, cav, w),
                       2 / cav.omega_c * 1j * propagator(comb, w), rtol=1e-14)
    assert np.allclose(susceptibility(comb, CavityParams(7e9), w), 1j * propagator(comb, w))


def test_absorption_peaks_at_teeth(comb):
    nu = np.linspace(-1.2e10, 1.2e10, 480_001)  # step 5e4 << gamma / 2
    spec = absorption_spectrum(comb, CavityParams(7e9), nu)
    a = spec.values
    assert a.max() == pytest.approx(1.0)
    interior = (a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]) & (a[1:-1] > 0.1)
    peaks = nu[1:-1][interior]
    assert peaks.size == 7
    for tooth, peak in zip(np.sort(comb.detunings), np.sort(peaks)):
        assert abs(peak - tooth) <= comb.gamma / 2
    # symmetric comb -> symmetric spectrum
    assert np.allclose(a, a[::-1], atol=1e-9)


def test_absorption_merges_unresolved_teeth():
    gamma = 1e8
    comb = FrequencyComb([0.0, 0.2 * gamma], [1e9, 1e9], [0.5, 0.5], gamma)
    nu = np.linspace(-1e9, 1e9, 20_001)
    a = absorption_spectrum(comb, CavityParams(7e9), nu).values
    interior = (a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:])
    assert interior.sum() == 1
    assert abs(nu[1:-1][interior][0] - 0.1 * gamma) <= gamma / 2


def test_response_spectrum_grid_checks():
    with pytest.raises(ValueError):
        ResponseSpectrum(np.array([0.0, 2.0, 3.0]), np.zeros(3))
    with pytest.raises(ValueError):
        ResponseSpectrum(np.array([0.0, 1.0]), np.zeros(3))
    table = ResponseSpectrum(np.array([0.0, 2 * np.pi]), np.array([1.0, 2.0])).table()
    assert np.allclose(table, [[0, 1], [1, 2]])


def test_purcell_regime(comb):
    assert purcell_regime(comb, CavityParams(11e9))
    assert not purcell_regime(comb, CavityParams(1e9))
    assert not purcell_regime(comb, CavityParams(0.0))


@pytest.mark.parametrize("kwargs", [dict(kappa=-1.0), dict(kappa=np.inf), dict(kappa=1.0, detuning=np.nan),
                                    dict(kappa=1.0, mode_volume=0.0), dict(kappa=1.0, omega_c=-1.0)])
def test_invalid_cavity(kwargs):
    with pytest.raises(ValueError):
        CavityParams(**kwargs)


def test_quality_factor():
    assert CavityParams(1e9, omega_c=1e15).quality_factor == pytest.approx(1e6)
    with pytest.raises(ValueError):
        CavityParams(1e9).quality_factor
