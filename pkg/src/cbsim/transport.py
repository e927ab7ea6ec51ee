"""Monte-Carlo transport of polarized light through the atom cloud.

This module is the readable reference implementation of the sampling and
estimation scheme; a compiled engine reproduces it for production runs and is
cross-checked against it in the tests.

Scheme
------
Each trajectory consumes one fixed-layout row of uniform draws (see
`rngtables`).  The entry point is sampled from the transverse column-density
profile of the cloud; the first interaction is forced (weight
(1-e^-T)/T with T the beam-line optical depth).  At each scattering event the
atom's velocity, initial sublevel (from the ground population) and final
sublevel (uniform over the <= 5 allowed values, with multiplicity weight) are
drawn; a new propagation direction is drawn isotropically (weight 4pi) and the
free path to the next event is sampled from the closed-form column density at
the photon's current lab frequency.  Long low-value chains are terminated by
Russian roulette with exact reweighting.

At every order the detected contribution is evaluated by local estimation:
the direct amplitude is the chain of rest-frame scattering tensors
interleaved with transverse projectors, multiplied by the amplitude
attenuation of every leg at that leg's own lab frequency; the reverse
amplitude traverses the same atoms in the opposite order with identical
(Mi -> Mf) assignments and its own Doppler frequency chain.  The ladder
estimator at order >= 2 is the reciprocity-symmetrized w(|A_dir|^2 +
|A_rev|^2)/2, and the interference estimator w·Re(A_dir A_rev*) times the
azimuthally averaged off-axis phase factor J0(k·theta·|transverse offset of
first and last atom|), which guarantees crossed <= ladder sample by sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import (
    bessel_j0,
    box_muller,
    erf_between,
    invert_column,
    iso_direction,
    truncated_cauchy,
)
from .atomic import (
    AtomSpec,
    GroundPopulation,
    attenuation_line_weights,
    normalize_differential,
    single_tensor,
)
from .medium import CloudSpec, _coeffs
from .polarization import Channel, analyzer_vector, helicity_vector
from .rngtables import (
    CHUNK_TRAJECTORIES,
    E_LASER,
    E_PATH0,
    E_POS1,
    E_POS2,
    EVENT_WIDTH,
    D_COS,
    D_PHI,
    S_MF,
    S_MI,
    S_PATH,
    S_ROULETTE,
    V_BM1A,
    V_BM1B,
    V_BM2A,
    V_BM2B,
    event_base,
    row_width,
)

FOUR_PI = 4.0 * math.pi

## Fallback survival probability when the roulette metric is exactly zero
## (both in-flight chain vectors annihilated); any positive value is unbiased.
ZERO_METRIC_SURVIVAL = 0.05


# ---------------------------------------------------------------------------
# Run-parameter dataclasses


@dataclass(frozen=True)
class LaserSpec:
    """Incident light: carrier detuning and bandwidth in units of gamma,
    polarization ('linear', angle_deg) or ('helicity', +-1), beam along +z."""

    detuning: float = 0.0
    bandwidth: float = 0.0
    intensity: float = 1.0
    polarization: tuple = ("helicity", 1)
    direction: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.bandwidth < 0.0:
            raise ValueError("bandwidth must be >= 0")
        if self.intensity <= 0.0:
            raise ValueError("intensity must be > 0")
        kind, value = self.polarization
        if kind == "helicity":
            if int(value) not in (-1, 1):
                raise ValueError("helicity must be +1 or -1")
        elif kind != "linear":
            raise ValueError("polarization kind must be 'linear' or 'helicity'")
        if tuple(self.direction) != (0.0, 0.0, 1.0):
            raise ValueError("only propagation along +z is supported")


@dataclass(frozen=True)
class ThermalSpec:
    """Maxwell ensemble of atom velocities; kv0 is the most probable Doppler
    shift k*v0 in units of gamma, v0 = sqrt(2 kB T / m)."""

    kv0: float = 0.0

    def __post_init__(self):
        if self.kv0 < 0.0:
            raise ValueError("kv0 must be >= 0")


@dataclass(frozen=True)
class ScatterEvent:
    """One scattering: geometry, sublevels, frequency chain and cumulative
    estimator bookkeeping.

    `kv` is the atom's Doppler-shift vector k*v in units of gamma; `freq_in` /
    `freq_out` are lab frequencies (units of gamma, relative to the reference
    line) on the arriving and sampled outgoing legs; `weight` is the
    cumulative detection weight of the path prefix ending here; and
    `sampled_depth` is the total optical depth consumed by the sampling up to
    this atom (its exponential converts sampled attenuation back out of the
    physical amplitudes).
    """

    position: tuple
    kv: tuple
    Mi: int
    Mf: int
    dir_in: tuple
    dir_out: tuple
    freq_in: float
    freq_out: float
    weight: float
    sampled_depth: float


@dataclass(frozen=True)
class Trajectory:
    """Ordered scattering events with the entry weight and laser draw."""

    events: tuple
    weight: float
    laser_freq: float
    tag: int = 0

    @property
    def order(self) -> int:
        return len(self.events)


# ---------------------------------------------------------------------------
# Elementary sampling operations


def sample_velocity(thermal: ThermalSpec, u) -> np.ndarray:
    """Doppler-shift vector k*v (units of gamma) from four uniform draws.

    Per-component standard deviation kv0/sqrt(2); the fourth normal deviate
    of the two Box-Muller pairs is discarded (fixed draw layout).
    """
    u0, u1, u2, u3 = u
    if thermal.kv0 == 0.0:
        return np.zeros(3)
    g1, g2 = box_muller(1.0 - u0, u1)
    g3, _g4 = box_muller(1.0 - u2, u3)
    s = thermal.kv0 / math.sqrt(2.0)
    return np.array([s * g1, s * g2, s * g3])


def sample_laser_frequency(laser: LaserSpec, u: float) -> float:
    """Lab frequency of one trajectory's photon (units of gamma).

    Lorentzian (Cauchy) line of FWHM `bandwidth` centered on the carrier,
    truncated at +-50 bandwidths by inverse-CDF sampling; zero bandwidth
    returns the carrier exactly.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    gl = laser.bandwidth
    return float(laser.detuning + truncated_cauchy(u, 0.5 * gl, 50.0 * gl))


def laser_input_vector(laser: LaserSpec) -> np.ndarray:
    """Incident polarization vector (complex, transverse to +z)."""
    kind, value = laser.polarization
    if kind == "linear":
        a = math.radians(float(value))
        return np.array([math.cos(a), math.sin(a), 0.0], dtype=complex)
    return helicity_vector(int(value), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))


def channel_analyzer(channel, laser: LaserSpec) -> np.ndarray:
    """Analyzer vector for a detection channel, given the laser polarization."""
    ch = Channel(channel)
    kind, value = laser.polarization
    if ch.helical != (kind == "helicity"):
        raise ValueError(f"channel {ch.value} incompatible with {kind} input")
    if kind == "helicity":
        return analyzer_vector(ch, helicity=int(value))
    return analyzer_vector(ch, linear_angle_deg=float(value))


# ---------------------------------------------------------------------------
# Internal helpers shared by trajectory building and amplitude evaluation


def _sigma_of(atom, att_weights, offsets, omega):
    """Attenuation cross section (cm^2) at lab frequency omega."""
    s = 0.0
    for w, o in zip(att_weights, offsets):
        d = omega - o
        s += w / (1.0 + 4.0 * d * d)
    return atom.sigma0_cm2 * s


def _project_transverse(u, v):
    """(1 - u u^T) v for a real unit vector u and complex vector v."""
    return v - u * (u[0] * v[0] + u[1] * v[1] + u[2] * v[2])


def _column_back(cloud, position):
    """Column density (cm^-2) from `position` to infinity along -z."""
    alpha, s0, amp = _coeffs(cloud, position, (0.0, 0.0, -1.0))
    return erf_between(alpha, s0, amp, 0.0, math.inf)


def _column_segment(cloud, a, b):
    """Column density (cm^-2) between positions a and b, and their distance."""
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    dz = b[2] - a[2]
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    direction = (dx / dist, dy / dist, dz / dist)
    alpha, s0, amp = _coeffs(cloud, a, direction)
    return erf_between(alpha, s0, amp, 0.0, dist), dist


def _reverse_walk(atom, events, n, omega0, e_in):
    """Reverse-order chain for the first n events.

    Returns (chain vector M_rev e_in, rest frequency at the first atom,
    lab frequencies of the reverse internal legs, ordered by segment index).
    The reverse path enters at atom n-1 along +z, visits atoms in descending
    order through the same segments, and exits from atom 0; every atom keeps
    its (Mi -> Mf) assignment but sees its own Doppler-shifted frequency.
    """
    ev = events[n - 1]
    rest = omega0 - ev.kv[2]
    w = single_tensor(atom, rest, ev.Mi, ev.Mf) @ e_in
    leg_labs = [0.0] * (n - 1)
    for j in range(n - 2, -1, -1):
        seg = np.asarray(events[j].dir_out)  # from atom j toward atom j+1
        up = events[j + 1]
        lab = rest + (up.kv[0] * (-seg[0]) + up.kv[1] * (-seg[1]) + up.kv[2] * (-seg[2]))
        leg_labs[j] = lab
        here = events[j]
        rest = lab + (here.kv[0] * seg[0] + here.kv[1] * seg[1] + here.kv[2] * seg[2])
        w = _project_transverse(seg, w)
        w = single_tensor(atom, rest, here.Mi, here.Mf) @ w
    return w, rest, leg_labs


# ---------------------------------------------------------------------------
# Trajectory construction


def build_trajectory(
    cloud: CloudSpec,
    atom: AtomSpec,
    laser: LaserSpec,
    thermal: ThermalSpec,
    population: GroundPopulation,
    draws,
    *,
    max_order: int = 30,
    roulette_threshold: float = 1e-4,
    attenuation_population: GroundPopulation | None = None,
    tag: int = 0,
) -> Trajectory:
    """Sample one multiple-scattering trajectory from a row of uniforms.

    The row layout is defined in `rngtables`; slots for draws that end up
    unused (after escape, roulette death, or the order cap) are simply left
    unconsumed, so equal configurations consume identical draws.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.shape[-1] < row_width(max_order):
        raise ValueError("draw row shorter than required for max_order")
    if population.F != atom.ground_F:
        raise ValueError("population F does not match atom ground_F")

    F = atom.ground_F
    e_in = laser_input_vector(laser)
    cumw = np.cumsum(population.as_array())
    c_n = normalize_differential(atom, population)
    att_w = attenuation_line_weights(atom, attenuation_population)
    offs = atom.line_offsets_gamma()

    omega0 = sample_laser_frequency(laser, draws[E_LASER])
    sigma_laser = _sigma_of(atom, att_w, offs, omega0)

    # Transverse entry point from the column-density profile of the cloud.
    g1, g2 = box_muller(1.0 - draws[E_POS1], draws[E_POS2])
    cx, cy, cz = cloud.center_mm
    rx, ry, rz = cloud.radii_mm
    origin = (cx + rx * g1, cy + ry * g2, cz - 12.0 * rz)
    alpha, s0c, amp = _coeffs(cloud, origin, (0.0, 0.0, 1.0))
    beam_column = erf_between(alpha, s0c, amp, 0.0, math.inf)
    depth_total = sigma_laser * beam_column

    # Forced first interaction along the beam.
    q = -math.expm1(-depth_total)
    tau1 = -math.log1p(-draws[E_PATH0] * q)
    s1 = invert_column(alpha, s0c, amp, 0.0, tau1, sigma_laser)
    s1 = max(s1, 1e-12)
    entry_weight = q / depth_total

    position = np.array([origin[0], origin[1], origin[2] + s1])
    dir_in = np.array([0.0, 0.0, 1.0])
    freq_in = omega0
    base_weight = entry_weight
    sampled_depth = tau1

    events: list[ScatterEvent] = []
    v_dir = np.zeros(3, dtype=complex)
    log_qmax = -math.inf

    for i in range(max_order):
        b = event_base(i)
        u = draws[b : b + EVENT_WIDTH]

        kv = sample_velocity(thermal, (u[V_BM1A], u[V_BM1B], u[V_BM2A], u[V_BM2B]))
        idx = int(np.searchsorted(cumw, u[S_MI], side="right"))
        Mi = min(idx, 2 * F) - F
        lo = max(-F, Mi - 2)
        m = min(F, Mi + 2) - lo + 1
        Mf = lo + min(int(u[S_MF] * m), m - 1)

        rest = freq_in - (kv[0] * dir_in[0] + kv[1] * dir_in[1] + kv[2] * dir_in[2])
        tensor = single_tensor(atom, rest, Mi, Mf)
        if i == 0:
            v_dir = tensor @ e_in
        else:
            v_dir = tensor @ _project_transverse(dir_in, v_dir)
        weight = base_weight * c_n * m

        # Sampled outgoing leg (recorded even when the walk stops here).
        ux, uy, uz = iso_direction(u[D_COS], u[D_PHI])
        direction = np.array([ux, uy, uz])
        freq_out = rest + (kv[0] * ux + kv[1] * uy + kv[2] * uz)

        events.append(
            ScatterEvent(
                position=tuple(position),
                kv=tuple(kv),
                Mi=Mi,
                Mf=Mf,
                dir_in=tuple(dir_in),
                dir_out=(ux, uy, uz),
                freq_in=freq_in,
                freq_out=freq_out,
                weight=weight,
                sampled_depth=sampled_depth,
            )
        )
        if i + 1 == max_order:
            break

        # Russian roulette on the in-flight importance of both chains
        # (non-positive threshold disables termination entirely).
        if roulette_threshold <= 0.0:
            survive = 1.0
        else:
            v_rev, _rest0, _labs = _reverse_walk(atom, events, i + 1, omega0, e_in)
            norm2 = 0.5 * (
                float(np.sum(np.abs(v_dir) ** 2)) + float(np.sum(np.abs(v_rev) ** 2))
            )
            if norm2 == 0.0:
                survive = ZERO_METRIC_SURVIVAL
            else:
                log_q = math.log(weight) + sampled_depth + math.log(norm2)
                log_qmax = max(log_qmax, log_q)
                survive = min(1.0, math.exp(log_q - log_qmax) / roulette_threshold)
        if u[S_ROULETTE] >= survive:
            break

        # Free path to the next atom at the current lab frequency.
        sigma_seg = _sigma_of(atom, att_w, offs, freq_out)
        alpha, s0c, amp = _coeffs(cloud, position, direction)
        ahead = erf_between(alpha, s0c, amp, 0.0, math.inf)
        target = -math.log1p(-u[S_PATH])
        if target >= sigma_seg * ahead:
            break  # escape
        s = invert_column(alpha, s0c, amp, 0.0, target, sigma_seg)
        s = max(s, 1e-12)

        base_weight = base_weight * (FOUR_PI * c_n / sigma_seg) * m / survive
        sampled_depth = sampled_depth + target
        position = position + s * direction
        dir_in = direction
        freq_in = freq_out

    return Trajectory(
        events=tuple(events), weight=entry_weight, laser_freq=omega0, tag=tag
    )


# ---------------------------------------------------------------------------
# Path amplitudes


def path_amplitudes(
    trajectory: Trajectory,
    channel,
    cloud: CloudSpec,
    atom: AtomSpec,
    laser: LaserSpec,
    *,
    theta: float = 0.0,
    order: int | None = None,
    attenuation_population: GroundPopulation | None = None,
):
    """Direct and reverse detected amplitudes for a trajectory prefix.

    Both amplitudes carry their full attenuation (entry, internal legs at
    each path's own lab frequencies, exit toward the detector) and the exact
    external plane-wave phases for a detector tilted by `theta` (radians, in
    the x-z plane) from exact backscattering.  Order-1 prefixes return
    A_reverse = 0: single scattering has no distinct reverse partner.
    """
    ev = trajectory.events
    n = len(ev) if order is None else int(order)
    if not 1 <= n <= len(ev):
        raise ValueError("order outside trajectory range")
    e_in = laser_input_vector(laser)
    e_a = channel_analyzer(channel, laser)
    att_w = attenuation_line_weights(atom, attenuation_population)
    offs = atom.line_offsets_gamma()
    omega0 = trajectory.laser_freq

    # Direct chain and its frequency ladder.
    v = np.zeros(3, dtype=complex)
    rest = 0.0
    for j in range(n):
        e = ev[j]
        d = np.asarray(e.dir_in)
        rest = e.freq_in - (e.kv[0] * d[0] + e.kv[1] * d[1] + e.kv[2] * d[2])
        tensor = single_tensor(atom, rest, e.Mi, e.Mf)
        if j == 0:
            v = tensor @ e_in
        else:
            v = tensor @ _project_transverse(d, v)
    a_dir = complex(np.conj(e_a) @ v)

    first = ev[0]
    last = ev[n - 1]
    freq_det_dir = rest - last.kv[2]  # emitted along -z

    tau_dir = _sigma_of(atom, att_w, offs, omega0) * _column_back(cloud, first.position)
    for j in range(1, n):
        col, _dist = _column_segment(cloud, ev[j - 1].position, ev[j].position)
        tau_dir += _sigma_of(atom, att_w, offs, ev[j].freq_in) * col
    tau_dir += _sigma_of(atom, att_w, offs, freq_det_dir) * _column_back(
        cloud, last.position
    )

    k = atom.k_per_mm
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    # Detector direction (sin t, 0, -cos t); incident wave along +z.
    p0 = first.position
    pn = last.position
    phase_dir = k * (p0[2] - (sin_t * pn[0] - cos_t * pn[2]))
    A_dir = complex(math.cos(phase_dir), math.sin(phase_dir)) * math.exp(-0.5 * tau_dir) * a_dir

    if n == 1:
        return A_dir, 0.0 + 0.0j

    w, rest0, leg_labs = _reverse_walk(atom, ev, n, omega0, e_in)
    a_rev = complex(np.conj(e_a) @ w)
    freq_det_rev = rest0 - first.kv[2]

    tau_rev = _sigma_of(atom, att_w, offs, omega0) * _column_back(cloud, pn)
    for j in range(1, n):
        col, _dist = _column_segment(cloud, ev[j - 1].position, ev[j].position)
        tau_rev += _sigma_of(atom, att_w, offs, leg_labs[j - 1]) * col
    tau_rev += _sigma_of(atom, att_w, offs, freq_det_rev) * _column_back(cloud, p0)

    phase_rev = k * (pn[2] - (sin_t * p0[0] - cos_t * p0[2]))
    A_rev = complex(math.cos(phase_rev), math.sin(phase_rev)) * math.exp(-0.5 * tau_rev) * a_rev
    return A_dir, A_rev


def detected_frequency(trajectory: Trajectory, order: int) -> float:
    """Lab frequency (units of gamma) of the light detected at this order.

    Equal for the direct and reverse paths at exact backscattering: every
    atom imparts kv·(outgoing - incoming direction) and the reverse path
    swaps and negates both directions pairwise.
    """
    e = trajectory.events[order - 1]
    d = e.dir_in
    rest = e.freq_in - (e.kv[0] * d[0] + e.kv[1] * d[1] + e.kv[2] * d[2])
    return rest - e.kv[2]


def interference_factor(trajectory: Trajectory, order: int, theta: float, atom: AtomSpec) -> float:
    """Azimuthally averaged direct-reverse phase factor at tilt `theta`."""
    if order < 2 or theta == 0.0:
        return 1.0
    a = trajectory.events[0].position
    b = trajectory.events[order - 1].position
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return bessel_j0(atom.k_per_mm * theta * math.sqrt(dx * dx + dy * dy))


# ---------------------------------------------------------------------------
# Accumulation


class ChunkPartial:
    """Plain sums for one chunk of trajectories (the exact-merge unit)."""

    __slots__ = (
        "count",
        "rejected",
        "events",
        "cap_hits",
        "ladder",
        "crossed",
        "ladder_sq",
        "crossed_sq",
        "cross_lc",
        "ladder_order",
        "crossed_order",
        "resp_total",
        "resp_inter",
    )

    def __init__(self, n_theta: int, max_order: int, n_resp: int):
        self.count = 0
        self.rejected = 0
        self.events = 0
        self.cap_hits = 0
        self.ladder = 0.0
        self.crossed = np.zeros(n_theta)
        self.ladder_sq = 0.0
        self.crossed_sq = 0.0
        self.cross_lc = 0.0
        self.ladder_order = np.zeros(max_order)
        self.crossed_order = np.zeros(max_order)
        self.resp_total = np.zeros(n_resp)
        self.resp_inter = np.zeros(n_resp)

    def iadd(self, other: "ChunkPartial") -> None:
        self.count += other.count
        self.rejected += other.rejected
        self.events += other.events
        self.cap_hits += other.cap_hits
        self.ladder += other.ladder
        self.crossed += other.crossed
        self.ladder_sq += other.ladder_sq
        self.crossed_sq += other.crossed_sq
        self.cross_lc += other.cross_lc
        self.ladder_order += other.ladder_order
        self.crossed_order += other.crossed_order
        self.resp_total += other.resp_total
        self.resp_inter += other.resp_inter

    def copy(self) -> "ChunkPartial":
        out = ChunkPartial(len(self.crossed), len(self.ladder_order), len(self.resp_total))
        out.iadd(self)
        return out


class Accumulator:
    """Ladder/crossed sums with exact, order-independent merging.

    Contributions are kept as per-chunk partial sums keyed by the global
    chunk index; merging unions the dictionaries, and the final reduction
    sums chunks in sorted key order, so totals are bitwise independent of
    how work was split across workers.  Standard errors come from jackknife
    over chunk groups.  Response-bin edges, when present, must be uniformly
    spaced (binning uses constant-step arithmetic).
    """

    def __init__(
        self,
        theta_grid=(0.0,),
        max_order: int = 30,
        response_edges=None,
        meta: dict | None = None,
    ):
        self.theta_grid = tuple(float(t) for t in theta_grid)
        if not self.theta_grid or self.theta_grid[0] != 0.0:
            raise ValueError("theta grid must start at 0")
        self.max_order = int(max_order)
        self.response_edges = (
            None if response_edges is None else tuple(float(x) for x in response_edges)
        )
        self.meta = dict(meta or {})
        self.partials: dict[int, ChunkPartial] = {}

    # -- structure ---------------------------------------------------------

    @property
    def n_resp(self) -> int:
        ## regular bins plus underflow and overflow
        return 0 if self.response_edges is None else len(self.response_edges) + 1

    def _compatible(self, other: "Accumulator") -> bool:
        return (
            self.theta_grid == other.theta_grid
            and self.max_order == other.max_order
            and self.response_edges == other.response_edges
        )

    def partial(self, key: int) -> ChunkPartial:
        part = self.partials.get(key)
        if part is None:
            part = ChunkPartial(len(self.theta_grid), self.max_order, self.n_resp)
            self.partials[key] = part
        return part

    @classmethod
    def merge(cls, a: "Accumulator", b: "Accumulator") -> "Accumulator":
        """Associative, commutative combination of two accumulators."""
        if not a._compatible(b):
            raise ValueError("cannot merge accumulators with different grids")
        out = cls(a.theta_grid, a.max_order, a.response_edges, {**b.meta, **a.meta})
        for src in (a, b):
            for key, part in src.partials.items():
                if key in out.partials:
                    out.partials[key].iadd(part)
                else:
                    out.partials[key] = part.copy()
        return out

    # -- reductions --------------------------------------------------------

    def totals(self) -> ChunkPartial:
        """Sum of all partials, reduced in sorted chunk order."""
        total = ChunkPartial(len(self.theta_grid), self.max_order, self.n_resp)
        for key in sorted(self.partials):
            total.iadd(self.partials[key])
        return total

    @property
    def count(self) -> int:
        return sum(p.count for p in self.partials.values())

    def n1_fraction(self) -> float:
        t = self.totals()
        return t.ladder_order[0] / t.ladder if t.ladder > 0 else math.nan

    def _jackknife_groups(self, n_groups: int = 128):
        keys = sorted(self.partials)
        n = min(n_groups, len(keys))
        groups = [[0.0, 0.0] for _ in range(n)]
        for key in keys:
            part = self.partials[key]
            g = groups[key % n]
            g[0] += part.ladder
            g[1] += part.crossed[0]
        return groups


def accumulate(
    acc: Accumulator,
    trajectory: Trajectory,
    channel,
    cloud: CloudSpec,
    atom: AtomSpec,
    laser: LaserSpec,
    *,
    attenuation_population: GroundPopulation | None = None,
) -> Accumulator:
    """Add one trajectory's detected contributions at every order.

    Ladder gains w(|A_dir|^2+|A_rev|^2)/2 per order >= 2 and w|A_dir|^2 at
    order 1; the crossed sum gains w·Re(A_dir A_rev*) times the off-axis
    factor per theta grid point.  Trajectories producing non-finite
    amplitudes are rejected whole and tallied.
    """
    n = trajectory.order
    part = acc.partial(trajectory.tag // CHUNK_TRAJECTORIES)
    theta = acc.theta_grid
    ladder_terms = np.zeros(n)
    crossed_terms = np.zeros(n)
    j0 = np.ones((n, len(theta)))
    freqs = np.zeros(n)
    for i in range(1, n + 1):
        A_dir, A_rev = path_amplitudes(
            trajectory,
            channel,
            cloud,
            atom,
            laser,
            theta=0.0,
            order=i,
            attenuation_population=attenuation_population,
        )
        e = trajectory.events[i - 1]
        w = e.weight * math.exp(e.sampled_depth)
        if i == 1:
            l_i = w * abs(A_dir) ** 2
            c_i = 0.0
        else:
            l_i = 0.5 * w * (abs(A_dir) ** 2 + abs(A_rev) ** 2)
            c_i = w * (A_dir * A_rev.conjugate()).real
        if not (math.isfinite(l_i) and math.isfinite(c_i)):
            part.count += 1
            part.rejected += 1
            return acc
        ladder_terms[i - 1] = l_i
        crossed_terms[i - 1] = c_i
        for jt, t in enumerate(theta):
            j0[i - 1, jt] = interference_factor(trajectory, i, t, atom)
        freqs[i - 1] = detected_frequency(trajectory, i)

    part.count += 1
    part.events += n
    if n == acc.max_order:
        part.cap_hits += 1
    lt = 0.0
    ct = 0.0
    for i in range(n):
        part.ladder += ladder_terms[i]
        part.ladder_order[i] += ladder_terms[i]
        part.crossed_order[i] += crossed_terms[i]
        for jt in range(len(theta)):
            part.crossed[jt] += crossed_terms[i] * j0[i, jt]
        lt += ladder_terms[i]
        ct += crossed_terms[i]
        if acc.response_edges is not None:
            part.resp_total[_resp_bin(acc.response_edges, freqs[i])] += (
                ladder_terms[i] + crossed_terms[i]
            )
            part.resp_inter[_resp_bin(acc.response_edges, freqs[i])] += crossed_terms[i]
    part.ladder_sq += lt * lt
    part.crossed_sq += ct * ct
    part.cross_lc += lt * ct
    return acc


def _resp_bin(edges, freq: float) -> int:
    """Regular bin index, or the trailing under/overflow slots."""
    nb = len(edges) - 1
    if freq < edges[0]:
        return nb
    if freq >= edges[-1]:
        return nb + 1
    lo = edges[0]
    step = (edges[-1] - edges[0]) / nb
    return min(int((freq - lo) / step), nb - 1)


def enhancement(acc: Accumulator, n_groups: int = 128):
    """(X_EF, stderr) at exact backscattering: X = 1 + C(0)/L.

    The standard error is a jackknife over chunk groups; with fewer than
    eight groups it falls back to a delta-method estimate from
    per-trajectory second moments.
    """
    totals = acc.totals()
    if totals.count == 0 or totals.ladder <= 0.0:
        raise ValueError("empty accumulator (no ladder intensity)")
    x = 1.0 + totals.crossed[0] / totals.ladder
    groups = acc._jackknife_groups(n_groups)
    if len(groups) >= 8:
        l_all = sum(g[0] for g in groups)
        c_all = sum(g[1] for g in groups)
        est = []
        for g in groups:
            l_rest = l_all - g[0]
            c_rest = c_all - g[1]
            if l_rest <= 0.0:
                return x, math.inf
            est.append(1.0 + c_rest / l_rest)
        gn = len(est)
        mean = sum(est) / gn
        var = (gn - 1) / gn * sum((e - mean) ** 2 for e in est)
        return x, math.sqrt(var)
    # Delta method on the per-trajectory moments of one group.
    n = totals.count
    if n < 2:
        return x, math.inf
    ml = totals.ladder / n
    mc = totals.crossed[0] / n
    var_l = totals.ladder_sq / n - ml * ml
    var_c = totals.crossed_sq / n - mc * mc
    cov = totals.cross_lc / n - ml * mc
    r = mc / ml
    var_x = (var_c - 2.0 * r * cov + r * r * var_l) / (n * ml * ml)
    return x, math.sqrt(max(var_x, 0.0))
