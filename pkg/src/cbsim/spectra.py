"""Scan drivers and spectral outputs built on the trajectory engine.

Produces enhancement-versus-detuning scans in the four polarization
channels, backscattering cone profiles with optional instrument
convolution, and emission-frequency response spectra, together with the
CSV / JSON / SVG writers used by the command-line runner.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .atomic import AtomSpec, GroundPopulation, classical_dipole, rb85, single_line
from .engine import simulate_point
from .medium import CloudSpec
from .polarization import Channel, input_group
from .transport import LaserSpec, ThermalSpec, enhancement

ATOM_MODES = ("rb85", "single_line", "classical")
POPULATIONS = ("isotropic", "stretched")
ATTENUATIONS = ("isotropic", "matched")
SCAN_TYPES = ("detuning", "oriented", "bandwidth", "response", "cone")

#: Default laser-linewidth sweep (units of gamma) for bandwidth scans.
DEFAULT_BANDWIDTHS = (0.25, 1.0 / 6.0, 0.0)

#: Default detuning grids: +-6 MHz in 0.5 MHz steps, +-6 gamma in 0.25 steps.
DEFAULT_GRID_MHZ = tuple(round(0.5 * i, 6) for i in range(-12, 13))
DEFAULT_GRID_GAMMA = tuple(round(0.25 * i, 6) for i in range(-24, 25))

_ATOM_FACTORIES = {"rb85": rb85, "single_line": single_line, "classical": classical_dipole}

THETA_MAX_RAD = 5.0e-3


def make_atom(mode: str) -> AtomSpec:
    """Atom model for a scan: full multiline structure, a single line, or
    a degenerate classical dipole."""
    try:
        return _ATOM_FACTORIES[mode]()
    except KeyError:
        raise ValueError(f"unknown atom mode {mode!r}; expected one of {ATOM_MODES}") from None


@dataclass(frozen=True)
class ScanConfig:
    """One scan request.

    Detunings, thermal spread kv0, and laser bandwidth are all in units of
    the natural linewidth.  ``bandwidths`` is the linewidth sweep used by
    bandwidth scans; ``theta_grid`` (radians, starting at 0) and
    ``instrument_fwhm_rad`` apply to cone profiles only.
    """

    detunings_gamma: tuple
    channels: tuple
    seed: int
    trajectories: int = 1_000_000
    kv0: float = 0.0
    bandwidth: float = 0.0
    bandwidths: tuple = DEFAULT_BANDWIDTHS
    population: str = "isotropic"
    attenuation: str = "isotropic"
    atom_mode: str = "rb85"
    helicity: int = 1
    linear_angle_deg: float = 0.0
    max_order: int = 30
    roulette_threshold: float = 1e-4
    workers: int = 1
    cloud: CloudSpec = field(default_factory=CloudSpec)
    theta_grid: tuple = ()
    instrument_fwhm_rad: float = 0.0
    response_bins: int = 40

    def __post_init__(self):
        object.__setattr__(self, "detunings_gamma", tuple(float(d) for d in self.detunings_gamma))
        object.__setattr__(self, "channels", tuple(Channel(c) for c in self.channels))
        object.__setattr__(self, "bandwidths", tuple(float(b) for b in self.bandwidths))
        object.__setattr__(self, "theta_grid", tuple(float(t) for t in self.theta_grid))
        problems = config_problems(self)
        if problems:
            joined = "\n  - ".join(problems)
            raise ValueError(f"invalid scan configuration:\n  - {joined}")


def config_problems(config: ScanConfig) -> list:
    """Every constraint violation in ``config``, one message each."""
    p = []
    grid = config.detunings_gamma
    if not grid:
        p.append("detuning grid is empty")
    elif any(not math.isfinite(d) for d in grid):
        p.append("detuning grid contains non-finite values")
    elif any(b <= a for a, b in zip(grid, grid[1:])):
        p.append("detuning grid must be strictly increasing")
    if not config.channels:
        p.append("no detection channels selected")
    if not isinstance(config.seed, int) or config.seed < 0:
        p.append("seed must be a non-negative integer")
    if config.trajectories < 1:
        p.append("trajectories per grid point must be >= 1")
    if not (math.isfinite(config.kv0) and config.kv0 >= 0.0):
        p.append("kv0 must be finite and >= 0")
    if not (math.isfinite(config.bandwidth) and config.bandwidth >= 0.0):
        p.append("bandwidth must be finite and >= 0")
    if any(not (math.isfinite(b) and b >= 0.0) for b in config.bandwidths):
        p.append("bandwidth sweep entries must be finite and >= 0")
    if config.population not in POPULATIONS:
        p.append(f"population must be one of {POPULATIONS}")
    if config.attenuation not in ATTENUATIONS:
        p.append(f"attenuation must be one of {ATTENUATIONS}")
    if config.atom_mode not in ATOM_MODES:
        p.append(f"atom mode must be one of {ATOM_MODES}")
    if config.helicity not in (-1, 1):
        p.append("helicity must be +1 or -1")
    if not math.isfinite(config.linear_angle_deg):
        p.append("linear polarization angle must be finite")
    if config.max_order < 1:
        p.append("max scattering order must be >= 1")
    if not (math.isfinite(config.roulette_threshold) and config.roulette_threshold >= 0.0):
        p.append("roulette threshold must be finite and >= 0")
    if config.workers < 1:
        p.append("workers must be >= 1")
    if config.response_bins < 1:
        p.append("response bin count must be >= 1")
    if config.theta_grid:
        t = config.theta_grid
        if t[0] != 0.0:
            p.append("theta grid must start at 0")
        elif any(b <= a for a, b in zip(t, t[1:])):
            p.append("theta grid must be strictly increasing")
        elif t[-1] > THETA_MAX_RAD * (1.0 + 1e-9):
            p.append(f"theta grid must stay within {THETA_MAX_RAD * 1e3:g} mrad")
    if not (math.isfinite(config.instrument_fwhm_rad) and config.instrument_fwhm_rad >= 0.0):
        p.append("instrument FWHM must be finite and >= 0")
    return p


def config_dict(config: ScanConfig) -> dict:
    """Plain-type echo of a scan configuration for metadata sidecars."""
    d = asdict(config)
    d["channels"] = [c.value for c in config.channels]
    for key in ("detunings_gamma", "bandwidths", "theta_grid"):
        d[key] = list(d[key])
    d["cloud"] = {
        "n0_cm3": config.cloud.n0_cm3,
        "radii_mm": list(config.cloud.radii_mm),
        "center_mm": list(config.cloud.center_mm),
    }
    return d


@dataclass(frozen=True)
class ScanResult:
    """Per-channel scan output.

    All intensity fields are per-trajectory averages; ``enhancement`` is
    1 + crossed/ladder at exact backscattering with its jackknife standard
    error.  ``ladder_orders`` / ``crossed_orders`` hold the
    per-scattering-order breakdown at each grid point.
    """

    channel: Channel
    detuning_gamma: tuple
    detuning_MHz: tuple
    ladder: tuple
    crossed: tuple
    enhancement: tuple
    stderr: tuple
    n1_fraction: tuple
    ladder_orders: tuple
    crossed_orders: tuple
    metadata: dict


@dataclass(frozen=True)
class ConeProfile:
    """Angular profile of the backscattering enhancement at one detuning.

    ``ladder`` is the (angle-independent) per-trajectory ladder intensity;
    ``crossed`` and ``enhancement`` are resolved over ``theta_rad``.
    ``enhancement_convolved`` is filled by :func:`convolve_instrument`.
    """

    channel: Channel
    detuning_gamma: float
    theta_rad: tuple
    ladder: float
    crossed: tuple
    enhancement: tuple
    enhancement_convolved: tuple | None
    stderr_peak: float
    metadata: dict


@dataclass(frozen=True)
class ResponseSpectrum:
    """Emission-frequency response of the backscattered light.

    ``total_response`` and ``interference_response`` are spectral densities
    (per unit gamma, per incident trajectory) over ``bin_centers``; the
    total density integrates to the total detected intensity and the
    interference density to the crossed intensity, so their area ratio is
    (X - 1)/X for enhancement X.  ``input_lorentzian`` is the laser line
    shape scaled to the same area as the total response.
    """

    channel: Channel
    carrier_gamma: float
    bandwidth_gamma: float
    bin_edges: tuple
    bin_centers: tuple
    total_response: tuple
    interference_response: tuple
    input_lorentzian: tuple
    total_intensity: float
    interference_intensity: float
    out_of_grid: float
    enhancement: float
    stderr: float
    metadata: dict


def lorentzian_density(x, center: float, fwhm: float):
    """Unit-area Lorentzian of the given FWHM evaluated at ``x``."""
    u = 2.0 * (np.asarray(x, dtype=float) - center) / fwhm
    return (2.0 / (math.pi * fwhm)) / (1.0 + u * u)


def _population(config: ScanConfig, atom: AtomSpec) -> GroundPopulation:
    if config.population == "stretched":
        return GroundPopulation.stretched(atom.ground_F)
    return GroundPopulation.isotropic(atom.ground_F)


def _polarizations(config: ScanConfig) -> dict:
    return {
        "helical": ("helicity", config.helicity),
        "linear": ("linear", config.linear_angle_deg),
    }


def _metadata(config: ScanConfig, label: str, atom: AtomSpec) -> dict:
    return {
        "scan": label,
        "version": __version__,
        "seed": config.seed,
        "trajectories_per_point": config.trajectories,
        "grid_points": len(config.detunings_gamma),
        "channels": [c.value for c in config.channels],
        "gamma_MHz": atom.gamma_MHz,
        "config": config_dict(config),
    }


def _require_signal(totals, channel: Channel, index: int, delta: float) -> None:
    if not (totals.ladder > 0.0):
        raise RuntimeError(
            f"no ladder intensity in channel {channel.value} at grid point {index} "
            f"(detuning {delta:g} gamma): the configuration produces no detectable signal"
        )


def _point_row(acc, channel: Channel, index: int, delta: float) -> dict:
    t = acc.totals()
    _require_signal(t, channel, index, delta)
    x, se = enhancement(acc)
    n = t.count
    return {
        "ladder": float(t.ladder) / n,
        "crossed": float(t.crossed[0]) / n,
        "enhancement": x,
        "stderr": se,
        "n1_fraction": acc.n1_fraction(),
        "ladder_orders": tuple(float(v) / n for v in t.ladder_order),
        "crossed_orders": tuple(float(v) / n for v in t.crossed_order),
    }


def _scan(config: ScanConfig, label: str) -> dict:
    atom = make_atom(config.atom_mode)
    pop = _population(config, atom)
    att = pop if config.attenuation == "matched" else None
    groups = input_group(config.channels)
    pols = _polarizations(config)
    rows = {c: [] for c in config.channels}
    for index, delta in enumerate(config.detunings_gamma):
        for kind, chans in groups.items():
            laser = LaserSpec(
                detuning=delta, bandwidth=config.bandwidth, polarization=pols[kind]
            )
            accs = simulate_point(
                config.cloud,
                atom,
                laser,
                ThermalSpec(config.kv0),
                chans,
                seed=config.seed,
                point=index,
                n_trajectories=config.trajectories,
                population=pop,
                max_order=config.max_order,
                roulette_threshold=config.roulette_threshold,
                attenuation_population=att,
                workers=config.workers,
            )
            for ch in chans:
                rows[ch].append(_point_row(accs[ch], ch, index, delta))
    meta = _metadata(config, label, atom)
    out = {}
    for ch in config.channels:
        rs = rows[ch]
        out[ch] = ScanResult(
            channel=ch,
            detuning_gamma=config.detunings_gamma,
            detuning_MHz=tuple(d * atom.gamma_MHz for d in config.detunings_gamma),
            ladder=tuple(r["ladder"] for r in rs),
            crossed=tuple(r["crossed"] for r in rs),
            enhancement=tuple(r["enhancement"] for r in rs),
            stderr=tuple(r["stderr"] for r in rs),
            n1_fraction=tuple(r["n1_fraction"] for r in rs),
            ladder_orders=tuple(r["ladder_orders"] for r in rs),
            crossed_orders=tuple(r["crossed_orders"] for r in rs),
            metadata=meta,
        )
    return out


def scan_detuning(config: ScanConfig) -> dict:
    """Enhancement spectrum over the detuning grid.

    Returns ``{channel: ScanResult}`` with points in grid order.  Every grid
    point is an independent job keyed by (seed, point index), so reruns with
    the same configuration and seed reproduce results exactly.
    """
    return _scan(config, "detuning")


def scan_oriented(config: ScanConfig) -> dict:
    """Enhancement spectrum for a fully spin-polarized (stretched) ensemble.

    Restricted to the helicity channels, where orienting the ensemble turns
    the detuned wings into near-perfect interference.
    """
    bad = [c.value for c in config.channels if not c.helical]
    if bad:
        raise ValueError(f"oriented scans analyze helicity channels only; got {bad}")
    if config.population != "stretched":
        raise ValueError("oriented scans require population='stretched'")
    return _scan(config, "oriented")


def scan_bandwidth(config: ScanConfig) -> dict:
    """Detuning scans repeated for each laser linewidth in ``config.bandwidths``.

    Returns ``{bandwidth: {channel: ScanResult}}``.  Each linewidth reuses
    the same seed and grid-point indices, so the zero-bandwidth entry is
    identical to :func:`scan_detuning` of the same configuration.
    """
    if not config.bandwidths:
        raise ValueError("bandwidth scan needs a non-empty bandwidth sweep")
    return {
        bw: _scan(replace(config, bandwidth=bw), "bandwidth")
        for bw in config.bandwidths
    }


def response_spectrum(config: ScanConfig) -> dict:
    """Emission-frequency spectrum of the backscattered light at one carrier.

    Requires a broadened laser (``bandwidth > 0``) and a single-point
    detuning grid (the carrier).  Bins cover carrier +- 10 bandwidths;
    light scattered outside the grid is tracked in ``out_of_grid``.
    """
    if config.bandwidth <= 0.0:
        raise ValueError("response spectra require a broadened laser (bandwidth > 0)")
    if len(config.detunings_gamma) != 1:
        raise ValueError("response spectra use a single carrier detuning")
    carrier = config.detunings_gamma[0]
    bw = config.bandwidth
    atom = make_atom(config.atom_mode)
    pop = _population(config, atom)
    att = pop if config.attenuation == "matched" else None
    groups = input_group(config.channels)
    pols = _polarizations(config)
    nb = config.response_bins
    edges = np.linspace(carrier - 10.0 * bw, carrier + 10.0 * bw, nb + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    meta = _metadata(config, "response", atom)
    out = {}
    for kind, chans in groups.items():
        laser = LaserSpec(detuning=carrier, bandwidth=bw, polarization=pols[kind])
        accs = simulate_point(
            config.cloud,
            atom,
            laser,
            ThermalSpec(config.kv0),
            chans,
            seed=config.seed,
            point=0,
            n_trajectories=config.trajectories,
            population=pop,
            max_order=config.max_order,
            roulette_threshold=config.roulette_threshold,
            attenuation_population=att,
            response_edges=edges,
            workers=config.workers,
        )
        for ch in chans:
            acc = accs[ch]
            t = acc.totals()
            _require_signal(t, ch, 0, carrier)
            x, se = enhancement(acc)
            n = t.count
            total = np.asarray(t.resp_total)
            inter = np.asarray(t.resp_inter)
            total_intensity = float(total.sum()) / n
            out[ch] = ResponseSpectrum(
                channel=ch,
                carrier_gamma=carrier,
                bandwidth_gamma=bw,
                bin_edges=tuple(edges),
                bin_centers=tuple(centers),
                total_response=tuple(total[:nb] / (n * widths)),
                interference_response=tuple(inter[:nb] / (n * widths)),
                input_lorentzian=tuple(
                    total_intensity * lorentzian_density(centers, carrier, bw)
                ),
                total_intensity=total_intensity,
                interference_intensity=float(inter.sum()) / n,
                out_of_grid=float(total[nb] + total[nb + 1]) / n,
                enhancement=x,
                stderr=se,
                metadata=meta,
            )
    return {ch: out[ch] for ch in config.channels}


def cone_profile(config: ScanConfig) -> dict:
    """Backscattering cone: enhancement versus detection angle.

    Requires a single-point detuning grid and a theta grid starting at 0.
    The ladder intensity is angle-independent over the microradian cone;
    only the interference term carries the angular dependence.
    """
    if not config.theta_grid:
        raise ValueError("cone profiles need a theta grid starting at 0")
    if len(config.detunings_gamma) != 1:
        raise ValueError("cone profiles use a single detuning")
    delta = config.detunings_gamma[0]
    atom = make_atom(config.atom_mode)
    pop = _population(config, atom)
    att = pop if config.attenuation == "matched" else None
    groups = input_group(config.channels)
    pols = _polarizations(config)
    meta = _metadata(config, "cone", atom)
    out = {}
    for kind, chans in groups.items():
        laser = LaserSpec(
            detuning=delta, bandwidth=config.bandwidth, polarization=pols[kind]
        )
        accs = simulate_point(
            config.cloud,
            atom,
            laser,
            ThermalSpec(config.kv0),
            chans,
            seed=config.seed,
            point=0,
            n_trajectories=config.trajectories,
            population=pop,
            max_order=config.max_order,
            roulette_threshold=config.roulette_threshold,
            attenuation_population=att,
            theta_grid=config.theta_grid,
            workers=config.workers,
        )
        for ch in chans:
            acc = accs[ch]
            t = acc.totals()
            _require_signal(t, ch, 0, delta)
            x, se = enhancement(acc)
            n = t.count
            ladder = float(t.ladder) / n
            crossed = np.asarray(t.crossed) / n
            out[ch] = ConeProfile(
                channel=ch,
                detuning_gamma=delta,
                theta_rad=config.theta_grid,
                ladder=ladder,
                crossed=tuple(crossed),
                enhancement=tuple(1.0 + crossed / ladder),
                enhancement_convolved=None,
                stderr_peak=se,
                metadata=meta,
            )
    return {ch: out[ch] for ch in config.channels}


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    return w


def convolve_instrument(profile: ConeProfile, fwhm_rad: float) -> ConeProfile:
    """Smear a cone profile with an instrument line of the given FWHM.

    Convolves X(theta) - 1 with a unit-area Lorentzian on the stored theta
    grid (trapezoid rule).  The profile is extended symmetrically through
    theta = 0 and the discrete kernel is normalized column by column, so
    the theta integral of X - 1 is preserved to rounding.  The grid must
    resolve the FWHM by at least 8 points; a FWHM below half the smallest
    grid step leaves the profile unchanged.
    """
    if not (math.isfinite(fwhm_rad) and fwhm_rad >= 0.0):
        raise ValueError("instrument FWHM must be finite and >= 0")
    th = np.asarray(profile.theta_rad, dtype=float)
    if th.size < 2:
        raise ValueError("cone profile needs at least two theta points to convolve")
    steps = np.diff(th)
    if fwhm_rad < 0.5 * steps.min():
        return replace(profile, enhancement_convolved=profile.enhancement)
    if fwhm_rad < 8.0 * steps.max() * (1.0 - 1e-9):
        raise ValueError(
            f"theta grid too coarse for FWHM {fwhm_rad:g} rad: "
            f"need >= 8 grid steps per FWHM (largest step {steps.max():g} rad)"
        )
    f = np.asarray(profile.enhancement, dtype=float) - 1.0
    w = _trapezoid_weights(th)
    kernel = lorentzian_density(th[:, None] - th[None, :], 0.0, fwhm_rad)
    kernel += lorentzian_density(th[:, None] + th[None, :], 0.0, fwhm_rad)
    kernel /= w @ kernel
    smeared = kernel @ (w * f)
    return replace(profile, enhancement_convolved=tuple(1.0 + smeared))


# ---------------------------------------------------------------------------
# CSV / JSON / SVG emission


def _fmt(value) -> str:
    return f"{float(value):.12g}"


def _write_lines(path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_scan_csv(path, result: ScanResult) -> None:
    """One row per grid point with both MHz and linewidth detuning columns."""
    rows = (
        (
            result.detuning_MHz[i],
            result.detuning_gamma[i],
            result.ladder[i],
            result.crossed[i],
            result.enhancement[i],
            result.stderr[i],
            result.n1_fraction[i],
        )
        for i in range(len(result.detuning_gamma))
    )
    _write_lines(
        path,
        "detuning_MHz,detuning_gamma,ladder,crossed,enhancement,stderr,n1_fraction",
        rows,
    )


def write_cone_csv(path, profile: ConeProfile) -> None:
    """Cone profile rows; the convolved column repeats the raw values when no
    instrument convolution was applied."""
    conv = profile.enhancement_convolved or profile.enhancement
    rows = (
        (1e6 * profile.theta_rad[i], profile.enhancement[i], conv[i])
        for i in range(len(profile.theta_rad))
    )
    _write_lines(path, "theta_urad,enhancement,enhancement_convolved", rows)


def write_response_csv(path, spectrum: ResponseSpectrum) -> None:
    """Spectral densities per output-frequency bin (offsets from the
    reference transition, units of gamma)."""
    rows = (
        (
            spectrum.bin_centers[i],
            spectrum.total_response[i],
            spectrum.interference_response[i],
            spectrum.input_lorentzian[i],
        )
        for i in range(len(spectrum.bin_centers))
    )
    _write_lines(
        path,
        "omega_offset_gamma,total_response,interference_response,input_lorentzian",
        rows,
    )


def write_metadata(path, meta: dict) -> None:
    import json

    Path(path).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "cbsim"
    return plt


def _save(fig, plt, path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_scan(path, results: dict, x_unit: str = "MHz") -> None:
    """Enhancement versus detuning for every channel, 3-sigma error bars."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for ch, r in results.items():
        x = r.detuning_MHz if x_unit == "MHz" else r.detuning_gamma
        ax.errorbar(
            x,
            r.enhancement,
            yerr=[3.0 * s for s in r.stderr],
            marker="o",
            markersize=3,
            linewidth=1,
            capsize=2,
            label=ch.value,
        )
    ax.axhline(1.0, color="0.75", linewidth=0.8)
    ax.axhline(2.0, color="0.75", linewidth=0.8)
    ax.set_xlabel(f"detuning ({x_unit})")
    ax.set_ylabel("enhancement")
    ax.legend()
    _save(fig, plt, path)


def plot_bandwidth(path, sweeps: dict, x_unit: str = "gamma") -> None:
    """Overlaid detuning scans for each laser linewidth in a bandwidth sweep."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for bw, results in sweeps.items():
        for ch, r in results.items():
            x = r.detuning_MHz if x_unit == "MHz" else r.detuning_gamma
            ax.errorbar(
                x,
                r.enhancement,
                yerr=[3.0 * s for s in r.stderr],
                marker="o",
                markersize=3,
                linewidth=1,
                capsize=2,
                label=f"{ch.value}, linewidth {bw:g}",
            )
    ax.axhline(1.0, color="0.75", linewidth=0.8)
    ax.set_xlabel(f"detuning ({x_unit})")
    ax.set_ylabel("enhancement")
    ax.legend()
    _save(fig, plt, path)


def plot_cone(path, profiles: dict) -> None:
    """Cone profiles (and their instrument-convolved copies, dashed)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for ch, prof in profiles.items():
        theta_mrad = [1e3 * t for t in prof.theta_rad]
        ax.plot(theta_mrad, prof.enhancement, linewidth=1, label=ch.value)
        if prof.enhancement_convolved is not None:
            ax.plot(
                theta_mrad,
                prof.enhancement_convolved,
                linewidth=1,
                linestyle="--",
                label=f"{ch.value} (convolved)",
            )
    ax.set_xlabel("angle from backscattering (mrad)")
    ax.set_ylabel("enhancement")
    ax.legend()
    _save(fig, plt, path)


def plot_response(path, spectra: dict) -> None:
    """Total and interference spectral densities with the laser line overlay."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for ch, sp in spectra.items():
        ax.plot(sp.bin_centers, sp.total_response, linewidth=1.2, label=f"{ch.value} total")
        ax.plot(
            sp.bin_centers,
            sp.interference_response,
            linewidth=1,
            linestyle="--",
            label=f"{ch.value} interference",
        )
        ax.plot(
            sp.bin_centers,
            sp.input_lorentzian,
            linewidth=0.9,
            linestyle=":",
            label=f"{ch.value} laser line",
        )
    ax.set_xlabel("output frequency offset (gamma)")
    ax.set_ylabel("spectral density")
    ax.legend()
    _save(fig, plt, path)
