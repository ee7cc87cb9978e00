import math

import numpy as np
import pytest

from iafc_memory.cavity import CavityParams
from iafc_memory.comb import FrequencyComb, ideal_comb
from iafc_memory.estimator import CavityMemory
from iafc_memory.simulation import MemoryContext
from iafc_memory.sweep import (
    SweepSpec,
    golden_section_max,
    optimize_2d,
    optimize_pulse_width,
    run_sweep,
)

DELTA = 2 * np.pi * 300e6


def test_golden_section_on_parabola():
    x, fx = golden_section_max(lambda x: -(x - 1.3) ** 2, -4.0, 5.0, 1e-8)
    assert x == pytest.approx(1.3, abs=1e-7)
    assert fx == pytest.approx(0.0, abs=1e-12)


def test_optimizer_beats_coarse_grid():
    ctx = MemoryContext(ideal_comb(7, DELTA, 7.5e6, 1.5e9), CavityParams(7e9))
    width, eta = optimize_pulse_width(ctx)
    grid = [ctx.efficiency(w) for w in np.geomspace(*ctx.widths, 11)]
    assert eta >= max(grid)
    assert ctx.widths[0] <= width <= ctx.widths[1]
    assert ctx.efficiency(width) == eta


def test_single_tooth_is_worse():
    full = CavityMemory(kappa=7e9, coupling=1.5e9).fit()
    tooth = FrequencyComb([0.0], [1.5e9], [1.0], 7.5e6)
    single = CavityMemory(comb=tooth, kappa=7e9, echo_spacing=DELTA).fit()
    assert single.efficiency_ < full.efficiency_
    # the optimum moves to the narrow-band end of the search range
    assert single.pulse_width_ <= full.pulse_width_
    assert single.pulse_width_ == pytest.approx(single.context_.widths[0], rel=0.02)


def test_one_point_sweep_is_direct_evaluation():
    est = CavityMemory(kappa=7e9, coupling=1.5e9)
    result = run_sweep(SweepSpec("kappa", values=[9e9], estimator=est))
    direct = CavityMemory(kappa=9e9, coupling=1.5e9).fit()
    assert result.efficiency[0] == direct.efficiency_
    assert result.pulse_widths[0] == direct.pulse_width_


def test_parallel_sweep_is_bit_identical():
    spec = SweepSpec("coupling", 0.8e9, 2.4e9, 5, estimator=CavityMemory(kappa=11e9))
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert np.array_equal(serial.efficiency, parallel.efficiency)
    assert np.array_equal(serial.pulse_widths, parallel.pulse_widths)
    assert serial.argmax == int(np.nanargmax(serial.efficiency))


def test_coupling_sweep_unimodal():
    result = run_sweep(SweepSpec("g'", 0.3e9, 4e9, 12, estimator=CavityMemory(kappa=11e9)))
    eta = result.efficiency
    strict_max = [(eta[i] > eta[i - 1]) and (eta[i] > eta[i + 1]) for i in range(1, eta.size - 1)]
    assert sum(strict_max) <= 1
    assert 0 < result.argmax < eta.size - 1


def test_infeasible_points_are_flagged_not_fatal():
    est = CavityMemory(kappa=7e9, coupling=1.5e9, samples_cap=2**16)
    result = run_sweep(SweepSpec("pulse_width", values=[1.4e9, 1e12], estimator=est))
    assert not result.failed[0] and result.failed[1]
    assert math.isnan(result.efficiency[1])
    assert result.argmax == 0


def test_finesse_sets_linewidth():
    from iafc_memory.sweep import _configured

    est = _configured(CavityMemory(), "finesse", 40.0, True)
    assert est.linewidth == pytest.approx(DELTA / (2 * np.pi * 40))
    assert est.linewidth == pytest.approx(7.5e6)


def test_log_sweep_values():
    spec = SweepSpec("kappa", 1e9, 1e11, 3, scale="log")
    assert np.allclose(spec.values, [1e9, 1e10, 1e11])


@pytest.mark.parametrize("kwargs", [
    dict(parameter="kappa"),
    dict(parameter="kappa", start=2.0, stop=1.0, points=3),
    dict(parameter="kappa", start=1.0, stop=2.0, points=1),
    dict(parameter="kappa", start=0.0, stop=2.0, points=3, scale="log"),
    dict(parameter="kappa", start=1.0, stop=2.0, points=3, scale="cubic"),
    dict(parameter="kappa", values=[]),
])
def test_invalid_sweep_specs(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_degenerate_2d_range_returns_the_point():
    best = optimize_2d(CavityMemory(), (1.5e9, 1.5e9, 1), (7e9, 7e9, 1))
    direct = CavityMemory(coupling=1.5e9, kappa=7e9).fit()
    assert (best.coupling, best.kappa) == (1.5e9, 7e9)
    assert best.efficiency == direct.efficiency_
    assert not best.on_boundary


def test_2d_optimum_dominates_corners_and_flags_edges():
    best = optimize_2d(CavityMemory(), (1.0e9, 2.0e9, 3), (6e9, 10e9, 3))
    corners = best.grid_efficiency[np.ix_([0, -1], [0, -1])]
    assert best.efficiency >= np.nanmax(corners)
    assert best.efficiency >= np.nanmax(best.grid_efficiency)
    # efficiency keeps rising with kappa here, so the optimum sits on the kappa edge
    assert best.on_boundary


def test_2d_coupling_only_refinement():
    best = optimize_2d(CavityMemory(), (0.8e9, 2.4e9, 5), (7e9, 7e9, 1))
    assert best.kappa == 7e9
    assert 0.8e9 < best.coupling < 2.4e9
    assert best.efficiency >= np.nanmax(best.grid_efficiency)
