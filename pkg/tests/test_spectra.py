"""Scan drivers: configuration validation, result bookkeeping, determinism,
response/cone reductions, instrument convolution, and file emission."""

import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbsim.atomic import rb85
from cbsim.engine import simulate_point
from cbsim.medium import CloudSpec
from cbsim.polarization import Channel
from cbsim.spectra import (
    DEFAULT_BANDWIDTHS,
    DEFAULT_GRID_GAMMA,
    DEFAULT_GRID_MHZ,
    ConeProfile,
    ScanConfig,
    cone_profile,
    config_problems,
    convolve_instrument,
    lorentzian_density,
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
from cbsim.transport import LaserSpec, ThermalSpec, enhancement


def small_config(**overrides):
    base = dict(
        detunings_gamma=(-1.0, 0.0, 1.5),
        channels=(Channel.HH, Channel.LL),
        seed=11,
        trajectories=20_000,
        max_order=10,
    )
    base.update(overrides)
    return ScanConfig(**base)


# ---------------------------------------------------------------------------
# configuration validation


def test_config_validation_lists_every_problem():
    with pytest.raises(ValueError) as err:
        ScanConfig(
            detunings_gamma=(1.0, 0.5),
            channels=(),
            seed=-3,
            trajectories=0,
            population="sideways",
            workers=0,
        )
    msg = str(err.value)
    for fragment in (
        "strictly increasing",
        "no detection channels",
        "seed must be",
        "trajectories per grid point",
        "population must be",
        "workers must be",
    ):
        assert fragment in msg


def test_config_single_violations():
    with pytest.raises(ValueError, match="grid is empty"):
        small_config(detunings_gamma=())
    with pytest.raises(ValueError, match="helicity"):
        small_config(helicity=2)
    with pytest.raises(ValueError, match="theta grid must start at 0"):
        small_config(theta_grid=(1e-4, 2e-4))
    with pytest.raises(ValueError, match="5 mrad"):
        small_config(theta_grid=(0.0, 6e-3))
    with pytest.raises(ValueError, match="atom mode"):
        small_config(atom_mode="helium")
    assert config_problems(small_config()) == []


def test_config_coerces_channel_names():
    cfg = small_config(channels=("hh", "lperp"))
    assert cfg.channels == (Channel.HH, Channel.LPERP)


def test_default_grids():
    assert len(DEFAULT_GRID_MHZ) == 25
    assert DEFAULT_GRID_MHZ[0] == -6.0 and DEFAULT_GRID_MHZ[-1] == 6.0
    assert len(DEFAULT_GRID_GAMMA) == 49
    assert DEFAULT_GRID_GAMMA[0] == -6.0 and DEFAULT_GRID_GAMMA[-1] == 6.0
    assert DEFAULT_BANDWIDTHS == (0.25, 1.0 / 6.0, 0.0)
    with pytest.raises(ValueError, match="atom mode"):
        make_atom("muonium")


# ---------------------------------------------------------------------------
# detuning scans


def test_scan_detuning_structure():
    cfg = small_config()
    results = scan_detuning(cfg)
    assert set(results) == {Channel.HH, Channel.LL}
    for ch, r in results.items():
        assert r.channel is ch
        assert r.detuning_gamma == cfg.detunings_gamma
        assert r.detuning_MHz == tuple(d * 5.9 for d in cfg.detunings_gamma)
        for i in range(len(cfg.detunings_gamma)):
            assert r.ladder[i] > 0.0
            assert r.stderr[i] > 0.0
            assert 0.0 <= r.n1_fraction[i] <= 1.0
            assert r.enhancement[i] == pytest.approx(1.0 + r.crossed[i] / r.ladder[i], rel=1e-12)
            assert sum(r.ladder_orders[i]) == pytest.approx(r.ladder[i], rel=1e-12)
            assert sum(r.crossed_orders[i]) == pytest.approx(r.crossed[i], rel=1e-9, abs=1e-30)
            assert len(r.ladder_orders[i]) == cfg.max_order
        assert r.metadata["seed"] == 11
        assert r.metadata["scan"] == "detuning"
        assert r.metadata["config"]["channels"] == ["hh", "ll"]
        assert r.metadata["version"]


def test_scan_matches_direct_engine_point():
    cfg = small_config(detunings_gamma=(0.7,), channels=(Channel.HH,), seed=21, trajectories=30_000, max_order=8)
    r = scan_detuning(cfg)[Channel.HH]
    accs = simulate_point(
        cfg.cloud,
        rb85(),
        LaserSpec(detuning=0.7, polarization=("helicity", 1)),
        ThermalSpec(0.0),
        [Channel.HH],
        seed=21,
        point=0,
        n_trajectories=30_000,
        max_order=8,
    )
    acc = accs[Channel.HH]
    t = acc.totals()
    x, se = enhancement(acc)
    assert r.enhancement[0] == x
    assert r.stderr[0] == se
    assert r.ladder[0] == t.ladder / t.count
    assert r.crossed[0] == float(t.crossed[0]) / t.count
    assert r.n1_fraction[0] == acc.n1_fraction()


def test_scan_deterministic_and_seed_consistent():
    cfg = small_config(detunings_gamma=(0.0,), trajectories=40_000)
    a = scan_detuning(cfg)
    b = scan_detuning(cfg)
    for ch in cfg.channels:
        assert a[ch].enhancement == b[ch].enhancement
        assert a[ch].ladder == b[ch].ladder
        assert a[ch].stderr == b[ch].stderr
    c = scan_detuning(replace(cfg, seed=99))
    for ch in cfg.channels:
        dx = abs(a[ch].enhancement[0] - c[ch].enhancement[0])
        sigma = math.hypot(a[ch].stderr[0], c[ch].stderr[0])
        assert dx <= 3.0 * sigma


def test_scan_zero_ladder_raises():
    # A spin-stretched ensemble cannot reach the helicity-preserving analyzer
    # through single scattering, so an order cap of 1 leaves no signal at all.
    cfg = small_config(
        detunings_gamma=(0.0,),
        channels=(Channel.HH,),
        population="stretched",
        trajectories=200,
        max_order=1,
    )
    with pytest.raises(RuntimeError, match="no ladder intensity in channel hh"):
        scan_detuning(cfg)


def test_oriented_scan_preconditions_and_run():
    with pytest.raises(ValueError, match="helicity channels only"):
        scan_oriented(small_config(channels=(Channel.LL,), population="stretched"))
    with pytest.raises(ValueError, match="population='stretched'"):
        scan_oriented(small_config(channels=(Channel.HH,)))
    cfg = small_config(
        detunings_gamma=(0.0,),
        channels=(Channel.HH,),
        population="stretched",
        trajectories=20_000,
        max_order=6,
    )
    r = scan_oriented(cfg)[Channel.HH]
    assert r.metadata["scan"] == "oriented"
    # single scattering is forbidden in this channel for a stretched ensemble
    assert r.n1_fraction[0] == 0.0
    assert r.ladder[0] > 0.0


def test_bandwidth_sweep_zero_entry_matches_detuning_scan():
    cfg = small_config(detunings_gamma=(-0.5, 1.0), bandwidths=(0.2, 0.0))
    sweeps = scan_bandwidth(cfg)
    assert set(sweeps) == {0.2, 0.0}
    base = scan_detuning(replace(cfg, bandwidth=0.0))
    for ch in cfg.channels:
        assert sweeps[0.0][ch].enhancement == base[ch].enhancement
        assert sweeps[0.0][ch].ladder == base[ch].ladder
        assert sweeps[0.0][ch].crossed == base[ch].crossed
        assert sweeps[0.0][ch].stderr == base[ch].stderr
        assert sweeps[0.2][ch].enhancement != base[ch].enhancement
    with pytest.raises(ValueError, match="non-empty bandwidth sweep"):
        scan_bandwidth(small_config(bandwidths=()))


def test_channel_algebra_total_ladder_across_bases():
    # At resonance with an isotropic ensemble the summed ladder intensity over
    # an orthonormal analyzer pair must not depend on the input polarization.
    sums = {}
    errs = {}
    for kind, pol, chans in (
        ("hel", ("helicity", 1), [Channel.HH, Channel.HPERP]),
        ("lin", ("linear", 0.0), [Channel.LL, Channel.LPERP]),
    ):
        accs = simulate_point(
            CloudSpec(),
            rb85(),
            LaserSpec(detuning=0.0, polarization=pol),
            ThermalSpec(0.0),
            chans,
            seed=31,
            n_trajectories=60_000,
            max_order=20,
        )
        total = 0.0
        var = 0.0
        for c in chans:
            t = accs[c].totals()
            n = t.count
            mean = t.ladder / n
            var += max(t.ladder_sq / n - mean * mean, 0.0) / n
            total += mean
        sums[kind] = total
        errs[kind] = math.sqrt(var)
    diff = abs(sums["hel"] - sums["lin"])
    assert diff <= 3.0 * math.hypot(errs["hel"], errs["lin"])


# ---------------------------------------------------------------------------
# response spectra


def response_config(**overrides):
    base = dict(
        detunings_gamma=(1.5,),
        channels=(Channel.HH,),
        seed=4,
        trajectories=40_000,
        bandwidth=1.0 / 6.0,
        kv0=0.0215,
        max_order=12,
    )
    base.update(overrides)
    return ScanConfig(**base)


def test_response_requires_broadened_single_carrier():
    with pytest.raises(ValueError, match="bandwidth > 0"):
        response_spectrum(response_config(bandwidth=0.0))
    with pytest.raises(ValueError, match="single carrier"):
        response_spectrum(response_config(detunings_gamma=(0.0, 1.5)))


def test_response_structure_and_identities():
    cfg = response_config()
    sp = response_spectrum(cfg)[Channel.HH]
    nb = cfg.response_bins
    edges = np.array(sp.bin_edges)
    assert len(edges) == nb + 1
    assert edges[0] == pytest.approx(1.5 - 10.0 / 6.0)
    assert edges[-1] == pytest.approx(1.5 + 10.0 / 6.0)
    total = np.array(sp.total_response)
    widths = np.diff(edges)
    # total density is pointwise non-negative and integrates (with the
    # out-of-grid remainder) to the total detected intensity
    assert np.all(total >= 0.0)
    integral = float(np.sum(total * widths)) + sp.out_of_grid
    assert integral == pytest.approx(sp.total_intensity, rel=1e-12)
    # interference / total intensity ratio reproduces (X - 1)/X
    ratio = sp.interference_intensity / sp.total_intensity
    assert ratio == pytest.approx((sp.enhancement - 1.0) / sp.enhancement, rel=1e-9)
    # laser-line overlay: same area as the total response, peaked at carrier
    lor = np.array(sp.input_lorentzian)
    assert np.all(lor > 0.0)
    centers = np.array(sp.bin_centers)
    assert abs(centers[int(np.argmax(lor))] - 1.5) <= widths[0]
    assert sp.stderr > 0.0


def test_response_densities_reproducible():
    cfg = response_config(trajectories=15_000)
    a = response_spectrum(cfg)[Channel.HH]
    b = response_spectrum(cfg)[Channel.HH]
    assert a.total_response == b.total_response
    assert a.interference_response == b.interference_response


# ---------------------------------------------------------------------------
# cone profiles and instrument convolution


def cone_config(**overrides):
    base = dict(
        detunings_gamma=(0.0,),
        channels=(Channel.HH,),
        seed=6,
        trajectories=100_000,
        max_order=12,
        theta_grid=tuple(np.round(np.linspace(0.0, 1.5e-3, 151), 12)),
    )
    base.update(overrides)
    return ScanConfig(**base)


def test_cone_preconditions():
    with pytest.raises(ValueError, match="theta grid"):
        cone_profile(small_config(detunings_gamma=(0.0,)))
    with pytest.raises(ValueError, match="single detuning"):
        cone_profile(cone_config(detunings_gamma=(0.0, 1.0)))


def test_cone_profile_structure():
    prof = cone_profile(cone_config())[Channel.HH]
    X = np.array(prof.enhancement)
    assert prof.theta_rad[0] == 0.0
    assert isinstance(prof.ladder, float) and prof.ladder > 0.0
    assert X[0] == pytest.approx(1.0 + prof.crossed[0] / prof.ladder, rel=1e-12)
    # the raw profile peaks at exact backscattering and decays toward 1
    assert int(np.argmax(X)) == 0
    assert abs(X[-1] - 1.0) < 0.25 * (X[0] - 1.0)
    assert prof.enhancement_convolved is None
    assert prof.stderr_peak > 0.0


def synthetic_cone(theta, values):
    return ConeProfile(
        channel=Channel.HH,
        detuning_gamma=0.0,
        theta_rad=tuple(theta),
        ladder=1.0,
        crossed=tuple(v - 1.0 for v in values),
        enhancement=tuple(values),
        enhancement_convolved=None,
        stderr_peak=1e-3,
        metadata={},
    )


def trapezoid_integral(theta, f):
    return float(np.trapezoid(f, theta))


def test_convolution_identity_and_coarse_grid_error():
    theta = np.linspace(0.0, 3.0e-3, 301)  # 10 urad steps
    prof = synthetic_cone(theta, 1.0 + 0.1 / (1.0 + (theta / 3.0e-4) ** 2))
    assert convolve_instrument(prof, 0.0).enhancement_convolved == prof.enhancement
    assert convolve_instrument(prof, 4.0e-6).enhancement_convolved == prof.enhancement
    with pytest.raises(ValueError, match="too coarse"):
        convolve_instrument(prof, 5.0e-5)  # 5 points per FWHM
    with pytest.raises(ValueError, match=">= 0"):
        convolve_instrument(prof, -1.0)


def test_convolution_matches_lorentzian_width_addition():
    # A Lorentzian cone convolved with a Lorentzian kernel is a Lorentzian
    # whose half-width is the sum of the two; the peak scales accordingly.
    theta = np.linspace(0.0, 4.0e-3, 401)
    amp, w = 0.1, 3.0e-4
    fwhm = 8.0e-5
    prof = synthetic_cone(theta, 1.0 + amp / (1.0 + (theta / w) ** 2))
    conv = convolve_instrument(prof, fwhm)
    Xc = np.array(conv.enhancement_convolved)
    w_out = w + 0.5 * fwhm
    expected = 1.0 + amp * w / w_out / (1.0 + (theta / w_out) ** 2)
    assert np.max(np.abs(Xc - expected)) < 0.02 * amp
    # the integral of X - 1 is preserved to rounding
    before = trapezoid_integral(theta, np.array(prof.enhancement) - 1.0)
    after = trapezoid_integral(theta, Xc - 1.0)
    assert after == pytest.approx(before, rel=1e-12)
    # and the peak moved down
    assert Xc[0] < prof.enhancement[0]


@settings(deadline=None, max_examples=25)
@given(
    n=st.integers(min_value=32, max_value=120),
    step=st.floats(min_value=5e-6, max_value=4e-5),
    fwhm_steps=st.floats(min_value=8.5, max_value=30.0),
    data=st.data(),
)
def test_convolution_preserves_integral_property(n, step, fwhm_steps, data):
    theta = np.arange(n) * step
    values = data.draw(
        st.lists(
            st.floats(min_value=0.5, max_value=2.0, allow_nan=False),
            min_size=n,
            max_size=n,
        )
    )
    prof = synthetic_cone(theta, values)
    conv = convolve_instrument(prof, fwhm_steps * step)
    Xc = np.array(conv.enhancement_convolved)
    assert np.all(np.isfinite(Xc))
    before = trapezoid_integral(theta, np.array(values) - 1.0)
    after = trapezoid_integral(theta, Xc - 1.0)
    assert after == pytest.approx(before, rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------------------
# file emission


def test_scan_csv_format(tmp_path):
    cfg = small_config(trajectories=5_000, max_order=6)
    r = scan_detuning(cfg)[Channel.HH]
    path = tmp_path / "scan.csv"
    write_scan_csv(path, r)
    lines = path.read_text().splitlines()
    assert lines[0] == "detuning_MHz,detuning_gamma,ladder,crossed,enhancement,stderr,n1_fraction"
    assert len(lines) == 1 + len(cfg.detunings_gamma)
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(-5.9)
    assert float(first[1]) == -1.0
    # 12-significant-digit fixed formatting round-trips exactly as printed
    for cell in first:
        assert f"{float(cell):.12g}" == cell


def test_cone_csv_convolved_fallback(tmp_path):
    theta = np.linspace(0.0, 1.0e-3, 6)
    prof = synthetic_cone(theta, 1.0 + 0.1 / (1.0 + (theta / 3.0e-4) ** 2))
    path = tmp_path / "cone.csv"
    write_cone_csv(path, prof)
    lines = path.read_text().splitlines()
    assert lines[0] == "theta_urad,enhancement,enhancement_convolved"
    cells = lines[1].split(",")
    assert float(cells[0]) == 0.0
    assert cells[1] == cells[2]  # no convolution applied -> column repeats raw
    assert float(lines[-1].split(",")[0]) == pytest.approx(1000.0)


def test_response_csv_format(tmp_path):
    sp = response_spectrum(response_config(trajectories=10_000))[Channel.HH]
    path = tmp_path / "resp.csv"
    write_response_csv(path, sp)
    lines = path.read_text().splitlines()
    assert lines[0] == "omega_offset_gamma,total_response,interference_response,input_lorentzian"
    assert len(lines) == 1 + len(sp.bin_centers)


def test_metadata_json(tmp_path):
    cfg = small_config(trajectories=5_000, max_order=4)
    r = scan_detuning(cfg)[Channel.HH]
    path = tmp_path / "meta.json"
    write_metadata(path, r.metadata)
    meta = json.loads(path.read_text())
    assert meta["seed"] == 11
    assert meta["config"]["trajectories"] == 5_000
    assert meta["config"]["cloud"]["n0_cm3"] == pytest.approx(1.6e10)


def test_plots_emit_svg(tmp_path):
    cfg = small_config(trajectories=5_000, max_order=6)
    results = scan_detuning(cfg)
    sweeps = {0.0: results}
    theta = np.linspace(0.0, 1.0e-3, 11)
    prof = synthetic_cone(theta, 1.0 + 0.1 / (1.0 + (theta / 3.0e-4) ** 2))
    sp = response_spectrum(response_config(trajectories=10_000))[Channel.HH]
    paths = {
        "scan": tmp_path / "scan.svg",
        "band": tmp_path / "band.svg",
        "cone": tmp_path / "cone.svg",
        "resp": tmp_path / "resp.svg",
    }
    plot_scan(paths["scan"], results)
    plot_bandwidth(paths["band"], sweeps)
    plot_cone(paths["cone"], {Channel.HH: prof})
    plot_response(paths["resp"], {Channel.HH: sp})
    for p in paths.values():
        head = p.read_text()[:200]
        assert "<?xml" in head or "<svg" in head


def test_lorentzian_density_unit_area():
    x = np.linspace(-60.0, 60.0, 20_001)
    y = lorentzian_density(x, 0.3, 0.8)
    assert float(np.trapezoid(y, x)) == pytest.approx(1.0, abs=1e-2)
    assert x[int(np.argmax(y))] == pytest.approx(0.3, abs=0.01)
