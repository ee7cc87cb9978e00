"""Command-line front end: ``iafc-memory {comb,echo,absorption,sweep,optimize}``.

Each run writes plot-ready tab-separated tables (and JSON reports) into the
output directory together with ``run_manifest.json``.  Data files carry the
config hash in their header and no timestamp, so rerunning a config gives
byte-identical data; only the manifest records when the run happened.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import absorption_spectrum
from .comb import comb_table, finesse, mean_spacing
from .config import ConfigError, RunConfig, config_hash, config_to_dict, load_config, MODES
from .estimator import CavityMemory
from .pulse import GridError, write_waveform_binary
from .sweep import SweepSpec, optimize_2d, run_sweep

__all__ = ["main", "run", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL"]

log = logging.getLogger("iafc_memory")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
MANIFEST = "run_manifest.json"
LOCK = ".iafc-memory.lock"
TOOL = "iafc-memory"


class OutputLocked(RuntimeError):
    pass


class _Writer:
    """Creates output files with the shared comment header and remembers them."""

    def __init__(self, out_dir: Path, cfg: RunConfig, digest: str):
        self.out_dir = out_dir
        self.cfg = cfg
        self.digest = digest
        self.files: list[Path] = []

    def _track(self, name: str) -> Path:
        path = self.out_dir / name
        self.files.append(path)
        return path

    def table(self, name: str, data: np.ndarray, columns, notes=()):
        lines = [f"# {TOOL} {__version__} mode={self.cfg.mode}",
                 f"# config_sha256: {self.digest}"]
        lines += [f"# {note}" for note in notes]
        lines.append("# columns: " + "\t".join(columns))
        body = "\n".join("\t".join(f"{x:.17g}" for x in row) for row in np.atleast_2d(data))
        self._track(name).write_text("\n".join(lines) + "\n" + body + "\n")

    def json(self, name: str, payload: dict):
        payload = {"config_sha256": self.digest, **payload}
        self._track(name).write_text(json.dumps(payload, indent=2, sort_keys=True,
                                                default=_jsonable) + "\n")

    def binary(self, name: str, wave):
        write_waveform_binary(self._track(name), wave)

    def discard(self):
        for path in self.files:
            path.unlink(missing_ok=True)
        self.files = []


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    return repr(value)


# ------------------------------------------------------------------ modes

def _estimator(cfg: RunConfig) -> CavityMemory:
    return CavityMemory(**cfg.estimator_params())


def _run_comb(cfg: RunConfig, out: _Writer):
    comb, _ = _estimator(cfg)._build()
    grounds = comb.grounds
    sigma_total = float(np.sum(comb.populations[np.unique(grounds, return_index=True)[1]]))
    notes = [f"label: {comb.label}", f"teeth: {len(comb.detunings)}",
             f"linewidth_rad_s: {comb.gamma!r}", f"sum_sigma_over_ground_levels: {sigma_total!r}"]
    try:
        notes += [f"mean_spacing_rad_s: {mean_spacing(comb)!r}", f"finesse: {finesse(comb)!r}"]
    except ValueError:
        pass
    table = np.column_stack([comb_table(comb), grounds])
    out.table("comb.tsv", table, ["detuning_Hz", "coupling_Hz", "sigma", "ground"], notes)


def _run_echo(cfg: RunConfig, out: _Writer):
    est = _estimator(cfg).fit()
    _, wave_in, wave_out = est.echo()
    report = est.report_
    data = np.column_stack([wave_in.t, wave_in.samples.real, wave_in.samples.imag,
                            wave_out.samples.real, wave_out.samples.imag, wave_out.intensity])
    notes = [f"dt_s: {wave_in.grid.dt!r}", f"pulse_width_rad_s: {report.pulse_width!r}",
             f"pulse_center_s: {report.pulse_center!r}", f"echo_spacing_rad_s: {report.spacing!r}",
             f"efficiency: {report.efficiency!r}"]
    out.table("waveforms.tsv", data,
              ["t_s", "in_re", "in_im", "out_re", "out_im", "out_intensity"], notes)
    out.binary("output.bin", wave_out)
    out.json("echo_report.json", {"report": report.to_dict()})
    return {"efficiency": report.efficiency, "echo_time": report.echo_time}


def _run_absorption(cfg: RunConfig, out: _Writer):
    comb, cavity = _estimator(cfg)._build()
    start, stop = cfg.absorption["start"], cfg.absorption["stop"]
    if start is None or stop is None:
        margin = max(10 * comb.gamma, 0.1 * np.ptp(comb.detunings))
        start = comb.detunings.min() - margin if start is None else start
        stop = comb.detunings.max() + margin if stop is None else stop
    if not stop > start or cfg.absorption["points"] < 2:
        raise ConfigError("absorption.stop: needs start < stop and at least two points")
    nu = np.linspace(start, stop, cfg.absorption["points"])
    spectrum = absorption_spectrum(comb, cavity, nu)
    out.table("absorption.tsv", spectrum.table(), ["probe_detuning_Hz", "absorption"],
              [f"label: {comb.label}", "absorption normalised to unit peak"])


def _run_sweep(cfg: RunConfig, out: _Writer, workers: int):
    s = cfg.sweep
    spec = SweepSpec(parameter=s["parameter"], start=s["start"], stop=s["stop"],
                     points=s["points"], scale=s["scale"], estimator=_estimator(cfg),
                     optimize_pulse=s["optimize_pulse"], values=s["values"])
    result = run_sweep(spec, workers=workers)
    context = json.dumps({k: v for k, v in result.context.items()}, sort_keys=True,
                         default=_jsonable)
    table = np.column_stack([result.table(), result.failed.astype(float)])
    out.table("sweep.tsv", table, [s["parameter"], "efficiency", "pulse_width_rad_s", "failed"],
              [f"swept: {s['parameter']} (internal SI / rad s^-1 units)",
               f"fixed: {context}",
               f"argmax_index: {result.argmax if not result.failed.all() else 'none'}"])
    return {"failed_points": int(result.failed.sum())}


def _run_optimize(cfg: RunConfig, out: _Writer, workers: int):
    o = cfg.optimize
    best = optimize_2d(_estimator(cfg), o["coupling"], o["kappa"], workers=workers,
                       refine=o["refine"])
    g, k = np.meshgrid(best.grid_coupling, best.grid_kappa, indexing="ij")
    out.table("optimize_grid.tsv",
              np.column_stack([g.ravel(), k.ravel(), best.grid_efficiency.ravel()]),
              ["coupling_rad_s", "kappa_rad_s", "efficiency"])
    payload = {"coupling": best.coupling, "kappa": best.kappa, "efficiency": best.efficiency,
               "pulse_width": best.pulse_width, "on_boundary": best.on_boundary}
    out.json("optimum.json", {"optimum": payload})
    return payload


# ------------------------------------------------------------------- driver

def _acquire(out_dir: Path) -> Path:
    lock = out_dir / LOCK
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OutputLocked(f"output directory {out_dir} is in use (remove {lock} if stale)")
    with os.fdopen(fd, "w") as fh:
        fh.write(str(os.getpid()))
    return lock


def run(cfg: RunConfig, out_dir=None, workers: int = 1) -> dict:
    """Execute one configured run and write its artefacts; returns the manifest.

    Raises :class:`ConfigError` or a numerical error (``ValueError``,
    :class:`GridError`) after removing any partial data files; the manifest
    is then written with ``status: failed``.
    """
    out_dir = Path(out_dir or cfg.output_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_hash(cfg)
    lock = _acquire(out_dir)
    writer = _Writer(out_dir, cfg, digest)
    manifest = {
        "tool": TOOL,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "mode": cfg.mode,
        "config_sha256": digest,
        "config": config_to_dict(replace(cfg, output_dir=None)),
        "resolved_parameters": _estimator(cfg).get_params(),
        "workers": workers,
    }
    try:
        if cfg.mode == "comb":
            summary = _run_comb(cfg, writer)
        elif cfg.mode == "echo":
            summary = _run_echo(cfg, writer)
        elif cfg.mode == "absorption":
            summary = _run_absorption(cfg, writer)
        elif cfg.mode == "sweep":
            summary = _run_sweep(cfg, writer, workers)
        else:
            summary = _run_optimize(cfg, writer, workers)
        manifest.update(status="complete", summary=summary,
                        outputs=[p.name for p in writer.files])
    except BaseException as exc:
        writer.discard()
        manifest.update(status="failed", error=f"{type(exc).__name__}: {exc}", outputs=[])
        raise
    finally:
        (out_dir / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                                   default=_jsonable) + "\n")
        lock.unlink(missing_ok=True)
    return manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL, description="Single-atom frequency-comb cavity memory simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    helps = {
        "comb": "write the comb tooth table",
        "echo": "simulate one pulse and report the echo",
        "absorption": "write the normalised absorption spectrum",
        "sweep": "efficiency along one parameter",
        "optimize": "maximise efficiency over coupling and kappa",
    }
    for mode in MODES:
        p = sub.add_parser(mode, help=helps[mode])
        p.add_argument("--config", required=True, type=Path, help="YAML run configuration")
        p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument("--samples-cap", type=int, help="largest FFT grid allowed")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers: must be at least 1")
        cfg = load_config(args.config, mode=args.mode)
        if args.samples_cap is not None:
            if args.samples_cap < 2:
                raise ConfigError("--samples-cap: must be at least 2")
            cfg.grid["samples_cap"] = args.samples_cap
        manifest = run(cfg, args.out, workers=args.workers)
    except (ConfigError, OutputLocked) as exc:
        print(f"{TOOL}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridError, ValueError, ArithmeticError) as exc:
        print(f"{TOOL}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("wrote %s", ", ".join(manifest["outputs"]))
    if manifest.get("summary"):
        print(json.dumps(manifest["summary"], sort_keys=True, default=_jsonable))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
