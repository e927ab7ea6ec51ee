"""Command-line runner.

Parses a flat ``key = value`` configuration (dotted section names), merges
environment (``CBS_*``) and command-line overrides, executes one scan, and
emits CSV tables, an SVG plot, and a JSON metadata sidecar.

Exit codes: 0 success, 2 configuration error, 3 engine error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .medium import CloudSpec
from .polarization import Channel, input_group
from .spectra import (
    DEFAULT_BANDWIDTHS,
    DEFAULT_GRID_GAMMA,
    DEFAULT_GRID_MHZ,
    SCAN_TYPES,
    ScanConfig,
    cone_profile,
    config_dict,
    convolve_instrument,
    make_atom,
    plot_bandwidth,
    plot_cone,
    plot_response,
    plot_scan,
    response_spectrum,
    scan_bandwidth,
    scan_detuning,
    scan_oriented,
    write_cone_csv,
    write_metadata,
    write_response_csv,
    write_scan_csv,
)

ENV_PREFIX = "CBS_"

GRID_SCANS = ("detuning", "oriented", "bandwidth")
POINT_SCANS = ("response", "cone")

#: Recognized configuration keys and the scan types they apply to
#: (None = applies to every scan type).
KNOWN_KEYS = {
    "scan.type": None,
    "scan.channels": None,
    "scan.seed": None,
    "scan.trajectories": None,
    "scan.max_order": None,
    "scan.workers": None,
    "scan.roulette": None,
    "grid.unit": GRID_SCANS,
    "grid.start": GRID_SCANS,
    "grid.stop": GRID_SCANS,
    "grid.step": GRID_SCANS,
    "laser.detuning": POINT_SCANS,
    "laser.bandwidth": ("detuning", "oriented", "response", "cone"),
    "laser.bandwidths": ("bandwidth",),
    "laser.helicity": None,
    "laser.linear_angle": None,
    "thermal.kv0": None,
    "atom.mode": None,
    "population": None,
    "attenuation": None,
    "cloud.n0": None,
    "cloud.radius": None,
    "cloud.radii": None,
    "cone.theta_max": ("cone",),
    "cone.theta_step": ("cone",),
    "cone.instrument_fwhm": ("cone",),
    "response.bins": ("response",),
    "output.prefix": None,
}

DEFAULT_CHANNELS = {
    "detuning": ("hh", "hperp", "ll", "lperp"),
    "bandwidth": ("hh", "hperp", "ll", "lperp"),
    "oriented": ("hh", "hperp"),
    "response": ("hh",),
    "cone": ("hh",),
}


class ConfigError(ValueError):
    """Configuration cannot be parsed or violates an invariant."""


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run: scan type, engine configuration template,
    thermal sweep, grid display unit, and output naming."""

    scan: str
    base: ScanConfig
    kv0_values: tuple
    grid_unit: str
    output_prefix: str
    entries: dict

    def total_trajectories(self) -> int:
        groups = len(input_group(self.base.channels))
        per_call = self.base.trajectories
        if self.scan in ("detuning", "oriented"):
            calls = len(self.kv0_values) * len(self.base.detunings_gamma) * groups
        elif self.scan == "bandwidth":
            calls = len(self.base.bandwidths) * len(self.base.detunings_gamma) * groups
        else:
            calls = groups
        return calls * per_call


def read_config_file(path) -> dict:
    """Flat ``key = value`` text; ``#`` starts a comment.  Returns the raw
    string mapping; malformed lines are reported with their line numbers.

    A bare name with no directory part (``doppler_scan`` or
    ``doppler_scan.cfg``) falls back to the packaged configuration of that
    name."""
    p = Path(path)
    if not p.is_file():
        shipped = shipped_configs()
        name = p.name if p.name.endswith(".cfg") else p.name + ".cfg"
        if str(p) == p.name and name in shipped:
            p = shipped[name]
        else:
            raise ConfigError(f"config file not found: {path}")
    entries = {}
    problems = []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            problems.append(f"line {lineno}: expected 'key = value', got {body!r}")
            continue
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            problems.append(f"line {lineno}: empty key or value")
        elif key in entries:
            problems.append(f"line {lineno}: duplicate key {key!r}")
        else:
            entries[key] = value
    if problems:
        raise ConfigError("config parse errors:\n  - " + "\n  - ".join(problems))
    return entries


def _split(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def _to_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None


def _build_grid(start: float, stop: float, step: float) -> tuple:
    if step <= 0:
        raise ValueError("grid.step must be > 0")
    if stop <= start:
        raise ValueError("grid.stop must be greater than grid.start")
    n = int(round((stop - start) / step))
    values = start + step * np.arange(n + 1)
    values = values[values <= stop + 0.5 * step]
    return tuple(float(round(v, 9)) for v in values)


def build_run_config(entries: dict) -> RunConfig:
    """Validate raw key-value entries into a RunConfig.

    Every problem — unknown keys, malformed values, inapplicable keys for
    the scan type, and engine-level invariant violations — is collected and
    reported in a single error.
    """
    problems = [f"unknown key {k!r}" for k in entries if k not in KNOWN_KEYS]

    def get(key, conv, default=None):
        if key not in entries:
            return default
        try:
            return conv(entries[key])
        except ValueError as err:
            problems.append(f"{key}: {err}")
            return default

    scan = get("scan.type", str, "detuning")
    if scan not in SCAN_TYPES:
        problems.append(f"scan.type must be one of {SCAN_TYPES}, got {scan!r}")
        scan = "detuning"

    for key in entries:
        allowed = KNOWN_KEYS.get(key)
        if allowed is not None and scan not in allowed:
            problems.append(f"{key} does not apply to scan type {scan!r}")

    seed = get("scan.seed", _to_int)
    if "scan.seed" not in entries:
        problems.append("scan.seed is required (runs never default to wall-clock seeds)")
        seed = 0

    trajectories = get("scan.trajectories", _to_int, 1_000_000)
    max_order = get("scan.max_order", _to_int, 30)
    workers = get("scan.workers", _to_int, 1)
    roulette = get("scan.roulette", _to_float, 1e-4)
    atom_mode = get("atom.mode", str, "rb85")
    population = get("population", str, "stretched" if scan == "oriented" else "isotropic")
    attenuation = get("attenuation", str, "isotropic")
    helicity = get("laser.helicity", _to_int, 1)
    linear_angle = get("laser.linear_angle", _to_float, 0.0)
    bandwidth = get("laser.bandwidth", _to_float, 0.0)
    bandwidths = tuple(
        get("laser.bandwidths", lambda t: [_to_float(x) for x in _split(t)], list(DEFAULT_BANDWIDTHS))
    )
    kv0_values = tuple(
        get("thermal.kv0", lambda t: [_to_float(x) for x in _split(t)], [0.0])
    )
    if not kv0_values:
        problems.append("thermal.kv0 must hold at least one value")
        kv0_values = (0.0,)
    if len(kv0_values) > 1 and scan not in ("detuning", "oriented"):
        problems.append(f"thermal.kv0 sweeps apply only to detuning/oriented scans, not {scan!r}")
        kv0_values = kv0_values[:1]

    channels = tuple(get("scan.channels", _split, list(DEFAULT_CHANNELS[scan])))
    for name in channels:
        try:
            Channel(name)
        except ValueError:
            problems.append(f"scan.channels: unknown channel {name!r}")
    channels = tuple(c for c in channels if c in Channel._value2member_map_) or ("hh",)

    # detuning grid
    grid_unit = get("grid.unit", str, "gamma")
    if grid_unit not in ("gamma", "MHz"):
        problems.append(f"grid.unit must be 'gamma' or 'MHz', got {grid_unit!r}")
        grid_unit = "gamma"
    gamma_MHz = make_atom(atom_mode).gamma_MHz if atom_mode in ("rb85", "single_line", "classical") else 5.9
    if scan in GRID_SCANS:
        given = [k for k in ("grid.start", "grid.stop", "grid.step") if k in entries]
        if given and len(given) < 3:
            problems.append("grid.start, grid.stop and grid.step must be given together")
        if len(given) == 3:
            try:
                grid = _build_grid(
                    _to_float(entries["grid.start"]),
                    _to_float(entries["grid.stop"]),
                    _to_float(entries["grid.step"]),
                )
            except ValueError as err:
                problems.append(str(err))
                grid = (0.0,)
        else:
            grid = DEFAULT_GRID_MHZ if grid_unit == "MHz" else DEFAULT_GRID_GAMMA
        if grid_unit == "MHz":
            grid = tuple(v / gamma_MHz for v in grid)
    else:
        grid = (get("laser.detuning", _to_float, 0.0),)

    # cloud geometry
    n0 = get("cloud.n0", _to_float, 1.6e10)
    if "cloud.radius" in entries and "cloud.radii" in entries:
        problems.append("give either cloud.radius or cloud.radii, not both")
    radii = (1.0, 1.0, 1.0)
    if "cloud.radius" in entries:
        r = get("cloud.radius", _to_float, 1.0)
        radii = (r, r, r)
    elif "cloud.radii" in entries:
        parts = get("cloud.radii", lambda t: [_to_float(x) for x in _split(t)], [1.0, 1.0, 1.0])
        if len(parts) != 3:
            problems.append("cloud.radii needs exactly three comma-separated values")
        else:
            radii = tuple(parts)
    try:
        cloud = CloudSpec(n0_cm3=n0, radii_mm=radii)
    except ValueError as err:
        problems.append(f"cloud: {err}")
        cloud = CloudSpec()

    # cone angular grid
    theta_grid = ()
    instrument_fwhm = 0.0
    if scan == "cone":
        theta_max = get("cone.theta_max", _to_float, 3.0e-3)
        theta_step = get("cone.theta_step", _to_float, 1.0e-5)
        instrument_fwhm = get("cone.instrument_fwhm", _to_float, 1.0e-4)
        if theta_step <= 0 or theta_max <= 0:
            problems.append("cone.theta_max and cone.theta_step must be > 0")
        else:
            n = int(round(theta_max / theta_step))
            theta_grid = tuple(round(i * theta_step, 12) for i in range(n + 1))
            if instrument_fwhm > 0 and 0.5 * theta_step <= instrument_fwhm < 8.0 * theta_step * (1.0 - 1e-9):
                problems.append(
                    "cone.instrument_fwhm must be resolved by >= 8 theta steps "
                    f"(fwhm {instrument_fwhm:g}, step {theta_step:g})"
                )
    if scan == "response" and bandwidth <= 0.0:
        problems.append("response scans require laser.bandwidth > 0")
    if scan == "oriented":
        if population != "stretched":
            problems.append("oriented scans require population = stretched")
        if any(not Channel(c).helical for c in channels if c in Channel._value2member_map_):
            problems.append("oriented scans analyze helicity channels only (hh, hperp)")

    response_bins = get("response.bins", _to_int, 40)
    prefix = get("output.prefix", str, scan)

    base = None
    if not problems:
        try:
            base = ScanConfig(
                detunings_gamma=grid,
                channels=channels,
                seed=seed,
                trajectories=trajectories,
                kv0=kv0_values[0],
                bandwidth=bandwidth,
                bandwidths=bandwidths,
                population=population,
                attenuation=attenuation,
                atom_mode=atom_mode,
                helicity=helicity,
                linear_angle_deg=linear_angle,
                max_order=max_order,
                roulette_threshold=roulette,
                workers=workers,
                cloud=cloud,
                theta_grid=theta_grid,
                instrument_fwhm_rad=instrument_fwhm,
                response_bins=response_bins,
            )
        except ValueError as err:
            text = str(err)
            marker = ":\n  - "
            if marker in text:
                problems.extend(text.split(marker, 1)[1].split("\n  - "))
            else:
                problems.append(text)
    if problems:
        raise ConfigError("invalid configuration:\n  - " + "\n  - ".join(problems))
    return RunConfig(
        scan=scan,
        base=base,
        kv0_values=kv0_values,
        grid_unit=grid_unit,
        output_prefix=prefix,
        entries=dict(entries),
    )


def parse_config(path) -> RunConfig:
    """Read and fully validate a configuration file."""
    return build_run_config(read_config_file(path))


def shipped_configs() -> dict:
    """Paths of the configuration files distributed with the package."""
    from importlib.resources import files

    root = files("cbsim") / "configs"
    return {
        entry.name: Path(str(entry))
        for entry in root.iterdir()
        if entry.name.endswith(".cfg")
    }


def _tag(value: float) -> str:
    return ("%g" % value).replace(".", "p").replace("-", "m")


def run(config: RunConfig, output_dir) -> dict:
    """Execute the scan and write CSV tables, an SVG plot, and a JSON
    metadata sidecar into ``output_dir``.  Returns the artifact paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    prefix = config.output_prefix
    csvs = []
    plots = []

    def emit_scan_set(results, name):
        for ch, result in results.items():
            path = out / f"{name}_{ch.value}.csv"
            write_scan_csv(path, result)
            csvs.append(path)

    if config.scan in ("detuning", "oriented"):
        runner = scan_detuning if config.scan == "detuning" else scan_oriented
        multi = len(config.kv0_values) > 1
        for kv0 in config.kv0_values:
            results = runner(replace(config.base, kv0=kv0))
            name = f"{prefix}_kv{_tag(kv0)}" if multi else prefix
            emit_scan_set(results, name)
            plot_path = out / f"{name}.svg"
            plot_scan(plot_path, results, x_unit=config.grid_unit)
            plots.append(plot_path)
    elif config.scan == "bandwidth":
        sweeps = scan_bandwidth(config.base)
        for bw, results in sweeps.items():
            emit_scan_set(results, f"{prefix}_bw{_tag(bw)}")
        plot_path = out / f"{prefix}.svg"
        plot_bandwidth(plot_path, sweeps, x_unit=config.grid_unit)
        plots.append(plot_path)
    elif config.scan == "response":
        spectra = response_spectrum(config.base)
        for ch, sp in spectra.items():
            path = out / f"{prefix}_{ch.value}.csv"
            write_response_csv(path, sp)
            csvs.append(path)
        plot_path = out / f"{prefix}.svg"
        plot_response(plot_path, spectra)
        plots.append(plot_path)
    elif config.scan == "cone":
        profiles = cone_profile(config.base)
        fwhm = config.base.instrument_fwhm_rad
        if fwhm > 0.0:
            profiles = {ch: convolve_instrument(p, fwhm) for ch, p in profiles.items()}
        for ch, prof in profiles.items():
            path = out / f"{prefix}_{ch.value}.csv"
            write_cone_csv(path, prof)
            csvs.append(path)
        plot_path = out / f"{prefix}.svg"
        plot_cone(plot_path, profiles)
        plots.append(plot_path)
    else:  # pragma: no cover - guarded by validation
        raise ConfigError(f"unknown scan type {config.scan!r}")

    meta_path = out / f"{prefix}_meta.json"
    write_metadata(
        meta_path,
        {
            "scan": config.scan,
            "version": __version__,
            "seed": config.base.seed,
            "grid_unit": config.grid_unit,
            "kv0_values": list(config.kv0_values),
            "total_trajectories": config.total_trajectories(),
            "wall_time_s": round(time.perf_counter() - t0, 3),
            "entries": config.entries,
            "resolved": config_dict(config.base),
            "outputs": sorted(p.name for p in csvs + plots),
        },
    )
    return {"csv": csvs, "plots": plots, "metadata": meta_path}


def _flag_or_env(value, name: str):
    if value is not None:
        return value
    return os.environ.get(ENV_PREFIX + name)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cbsim",
        description=(
            "Monte-Carlo coherent backscattering from a cold multilevel atomic "
            "gas: enhancement spectra, cone profiles, and response spectra."
        ),
    )
    parser.add_argument("--config", help="path to a key = value configuration file")
    parser.add_argument("--scan", choices=SCAN_TYPES, help="scan type override")
    parser.add_argument(
        "--channel",
        choices=[c.value for c in Channel],
        help="restrict the run to a single detection channel",
    )
    parser.add_argument("--seed", type=int, help="random seed (required somewhere)")
    parser.add_argument("--trajectories", type=int, help="trajectories per grid point")
    parser.add_argument("--max-order", type=int, help="scattering order cap")
    parser.add_argument("--workers", type=int, help="worker thread count")
    parser.add_argument("--output", help="output directory (default: current)")
    args = parser.parse_args(argv)

    try:
        config_path = _flag_or_env(args.config, "CONFIG")
        entries = read_config_file(config_path) if config_path else {}
        overrides = {
            "scan.type": _flag_or_env(args.scan, "SCAN"),
            "scan.channels": _flag_or_env(args.channel, "CHANNEL"),
            "scan.seed": _flag_or_env(args.seed, "SEED"),
            "scan.trajectories": _flag_or_env(args.trajectories, "TRAJECTORIES"),
            "scan.max_order": _flag_or_env(args.max_order, "MAX_ORDER"),
            "scan.workers": _flag_or_env(args.workers, "WORKERS"),
        }
        for key, value in overrides.items():
            if value is not None:
                entries[key] = str(value)
        config = build_run_config(entries)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    output_dir = _flag_or_env(args.output, "OUTPUT") or "."
    try:
        artifacts = run(config, output_dir)
    except (RuntimeError, ValueError) as err:
        print(f"engine error: {err}", file=sys.stderr)
        return 3
    for path in artifacts["csv"] + artifacts["plots"] + [artifacts["metadata"]]:
        print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
