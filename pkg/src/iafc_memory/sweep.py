"""Pulse-width optimisation, one-parameter sweeps and the (g', kappa) search."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import minimize
from sklearn.base import clone

from .estimator import CavityMemory
from .simulation import MemoryContext

__all__ = [
    "golden_section_max",
    "optimize_pulse_width",
    "SweepSpec",
    "SweepResult",
    "run_sweep",
    "Optimum2D",
    "optimize_2d",
    "PARAMETER_ALIASES",
]

INV_PHI = (math.sqrt(5) - 1) / 2

# sweep targets accepted besides raw estimator parameter names
PARAMETER_ALIASES = {
    "g_eff": "coupling",
    "g'": "coupling",
    "delta_c": "cavity_detuning",
    "detuning": "cavity_detuning",
    "B": "field",
    "b_field": "field",
}


def golden_section_max(f, a: float, b: float, xtol: float):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))`` of the best point seen."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimize_pulse_width(context: MemoryContext, coarse: int = 21, rtol: float = 0.01):
    """Input bandwidth maximising the efficiency of ``context``.

    A log-spaced scan over ``context.widths`` (``coarse`` points; the default
    21 contains the 11-point grid) locates the best bracket, then a
    golden-section search in ``log(width)`` refines it to ``rtol`` relative.
    Returns ``(width, efficiency)``.
    """
    lo, hi = context.widths
    if lo == hi:
        return lo, context.efficiency(lo)
    widths = np.geomspace(lo, hi, coarse)
    values = [context.efficiency(w) for w in widths]
    k = int(np.argmax(values))
    best_w, best_eta = float(widths[k]), values[k]

    a, b = math.log(widths[max(k - 1, 0)]), math.log(widths[min(k + 1, coarse - 1)])
    x, eta = golden_section_max(lambda x: context.efficiency(math.exp(x)), a, b,
                                math.log1p(rtol))
    if eta > best_eta:
        best_w, best_eta = math.exp(x), eta
    return best_w, best_eta


# ----------------------------------------------------------------- sweeps

def _resolve(parameter: str) -> str:
    return PARAMETER_ALIASES.get(parameter, parameter)


def _configured(estimator: CavityMemory, parameter: str, value: float,
                optimize_pulse: bool) -> CavityMemory:
    est = clone(estimator)
    name = _resolve(parameter)
    if name == "finesse":
        # spacing quoted in Hz against a linewidth quoted in s^-1, so that
        # 300 MHz / 7.5e6 s^-1 is finesse 40
        est.set_params(linewidth=est.spacing / (2 * np.pi * value))
    else:
        est.set_params(**{name: value})
    if optimize_pulse and name != "pulse_width":
        est.set_params(pulse_width="optimize")
    return est


def _evaluate_point(estimator: CavityMemory, parameter: str, optimize_pulse: bool, value: float):
    try:
        est = _configured(estimator, parameter, value, optimize_pulse).fit()
    except ValueError:
        return math.nan, math.nan
    return est.efficiency_, est.pulse_width_


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class SweepSpec:
    """One-parameter sweep around a fixed estimator context.

    ``parameter`` is an estimator parameter name (``coupling``, ``kappa``,
    ``cavity_detuning``, ``field``, ``pulse_width`` ...) or ``finesse``.
    ``finesse`` keeps the ideal-comb spacing and sets
    ``linewidth = spacing / (2 pi F)``: the spacing counts as an ordinary
    frequency and the linewidth as a rate, as in the quoted parameter sets.
    Give either ``start``/``stop``/``points`` or explicit ``values``.
    """

    parameter: str
    start: float | None = None
    stop: float | None = None
    points: int = 2
    scale: str = "linear"
    estimator: CavityMemory = field(default_factory=CavityMemory)
    optimize_pulse: bool = True
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.values is not None:
            self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
            if self.values.size == 0:
                raise ValueError("a sweep needs at least one value")
            return
        if self.start is None or self.stop is None:
            raise ValueError("give start/stop/points or explicit values")
        if self.points < 2 or not self.start < self.stop:
            raise ValueError("a range sweep needs points >= 2 and start < stop")
        if self.scale == "linear":
            self.values = np.linspace(self.start, self.stop, self.points)
        elif self.scale == "log":
            if self.start <= 0:
                raise ValueError("log sweeps need a positive start")
            self.values = np.geomspace(self.start, self.stop, self.points)
        else:
            raise ValueError(f"scale must be 'linear' or 'log', got {self.scale!r}")


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    efficiency: np.ndarray
    pulse_widths: np.ndarray
    failed: np.ndarray
    context: dict = field(default_factory=dict)

    @property
    def argmax(self) -> int:
        if np.all(self.failed):
            raise ValueError("every sweep point failed")
        return int(np.nanargmax(self.efficiency))

    def table(self) -> np.ndarray:
        return np.column_stack([self.values, self.efficiency, self.pulse_widths])


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Efficiency at every sweep value; points that cannot be simulated are NaN and flagged."""
    fn = partial(_evaluate_point, spec.estimator, spec.parameter, spec.optimize_pulse)
    results = _map(fn, [float(v) for v in spec.values], workers)
    eta = np.array([r[0] for r in results])
    widths = np.array([r[1] for r in results])
    return SweepResult(
        parameter=spec.parameter,
        values=np.array(spec.values, dtype=float),
        efficiency=eta,
        pulse_widths=widths,
        failed=np.isnan(eta),
        context=spec.estimator.get_params(),
    )


# ------------------------------------------------------------ 2-d search

@dataclass
class Optimum2D:
    coupling: float
    kappa: float
    efficiency: float
    pulse_width: float
    on_boundary: bool
    grid_coupling: np.ndarray
    grid_kappa: np.ndarray
    grid_efficiency: np.ndarray  # shape (len(grid_coupling), len(grid_kappa))


def _point_2d(estimator: CavityMemory, pair):
    g, k = pair
    try:
        est = clone(estimator).set_params(coupling=g, kappa=k, pulse_width="optimize").fit()
    except ValueError:
        return math.nan, math.nan
    return est.efficiency_, est.pulse_width_


def _axis(bounds) -> np.ndarray:
    lo, hi, n = bounds
    if lo == hi or n == 1:
        return np.array([float(lo)])
    if lo > hi or n < 2:
        raise ValueError(f"invalid range {bounds}")
    return np.linspace(lo, hi, int(n))


def optimize_2d(estimator: CavityMemory, coupling_range, kappa_range, workers: int = 1,
                refine: bool = True) -> Optimum2D:
    """Maximise efficiency over effective coupling and cavity decay rate.

    Each range is ``(low, high, points)``.  Every point uses its own optimised
    pulse width.  A grid search is followed by a bounded Nelder-Mead
    refinement from the best grid point; ``on_boundary`` flags an optimum
    that sits within 1% of the edge of a non-degenerate range.
    """
    gs, ks = _axis(coupling_range), _axis(kappa_range)
    pairs = [(g, k) for g in gs for k in ks]
    results = _map(partial(_point_2d, estimator), pairs, workers)
    grid_eta = np.array([r[0] for r in results]).reshape(gs.size, ks.size)
    if np.all(np.isnan(grid_eta)):
        raise ValueError("no grid point could be simulated")
    i, j = np.unravel_index(np.nanargmax(grid_eta), grid_eta.shape)
    best = (gs[i], ks[j], grid_eta[i, j], results[i * ks.size + j][1])

    spans = np.array([gs[-1] - gs[0], ks[-1] - ks[0]])
    free = spans > 0
    if refine and np.any(free):
        lows = np.array([gs[0], ks[0]])

        def unpack(u):
            x = lows.copy()
            x[free] += np.clip(u, 0.0, 1.0) * spans[free]
            return x

        def objective(u):
            eta, _ = _point_2d(estimator, unpack(u))
            return 1.0 if math.isnan(eta) else -eta

        u0 = (np.array([best[0], best[1]]) - lows)[free] / spans[free]
        res = minimize(objective, u0, method="Nelder-Mead",
                       bounds=[(0.0, 1.0)] * int(free.sum()),
                       options={"xatol": 1e-3, "fatol": 1e-7,
                                "initial_simplex": _simplex(u0)})
        if -res.fun > best[2]:
            g, k = unpack(res.x)
            eta, width = _point_2d(estimator, (g, k))
            best = (g, k, eta, width)

    g, k = best[0], best[1]
    edge = 1e-2  # Nelder-Mead stalls just short of a bound
    on_boundary = bool(
        (free[0] and min(g - gs[0], gs[-1] - g) <= edge * spans[0])
        or (free[1] and min(k - ks[0], ks[-1] - k) <= edge * spans[1])
    )
    return Optimum2D(g, k, best[2], best[3], on_boundary, gs, ks, grid_eta)


def _simplex(u0: np.ndarray, step: float = 0.05) -> np.ndarray:
    points = [u0]
    for axis in range(u0.size):
        p = u0.copy()
        p[axis] = p[axis] + step if p[axis] + step <= 1 else p[axis] - step
        points.append(p)
    return np.array(points)
