"""Compiled Monte-Carlo engine.

Runs the same sampling and estimation scheme as the readable `transport`
module, fused into one jitted kernel per chunk of trajectories and scheduled
across a thread pool (the kernel releases the GIL).  The arithmetic mirrors
the reference expression for expression; a cross-check test holds the two
implementations together at ~1e-12 relative on chunk sums.

All detection channels that share one incident polarization are evaluated in
a single pass: the chain of scattering tensors is channel-independent and
only the final analyzer contraction differs.  Results are stored per chunk
index exactly like the reference accumulator, so totals are bitwise
independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from threading import Lock

import numpy as np

from ._kernels import (
    HAVE_NUMBA,
    bessel_j0,
    box_muller,
    erf_between,
    invert_column,
    iso_direction,
    ray_coeffs,
    truncated_cauchy,
)
from .atomic import (
    AtomSpec,
    GroundPopulation,
    _pole_tensors,
    attenuation_line_weights,
    normalize_differential,
)
from .medium import CloudSpec
from .polarization import Channel
from .rngtables import (
    CHUNK_TRAJECTORIES,
    D_COS,
    D_PHI,
    E_LASER,
    E_PATH0,
    E_POS1,
    E_POS2,
    ENTRY_WIDTH,
    EVENT_WIDTH,
    S_MF,
    S_MI,
    S_PATH,
    S_ROULETTE,
    V_BM1A,
    V_BM1B,
    V_BM2A,
    V_BM2B,
    draw_chunk,
)
from .transport import (
    FOUR_PI,
    ZERO_METRIC_SURVIVAL,
    Accumulator,
    LaserSpec,
    ThermalSpec,
    channel_analyzer,
    laser_input_vector,
)

if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover - exercised only without numba installed

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


INF = math.inf


@njit(cache=True, nogil=True)
def _sigma_at(omega, sigma0, offs, attw):
    """Attenuation cross section (cm^2) at lab frequency omega."""
    s = 0.0
    for l in range(offs.shape[0]):
        d = omega - offs[l]
        s += attw[l] / (1.0 + 4.0 * d * d)
    return sigma0 * s


@njit(cache=True, nogil=True)
def _col_back(x, y, z, cx, cy, cz, rx, ry, rz, n0):
    """Column density (cm^-2) from (x, y, z) to infinity along -z."""
    alpha, s0, amp = ray_coeffs(x, y, z, 0.0, 0.0, -1.0, cx, cy, cz, rx, ry, rz, n0)
    return erf_between(alpha, s0, amp, 0.0, INF)


@njit(cache=True, nogil=True)
def _col_segment(ax, ay, az, bx, by, bz, cx, cy, cz, rx, ry, rz, n0):
    """Column density (cm^-2) between two positions."""
    dx = bx - ax
    dy = by - ay
    dz = bz - az
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    alpha, s0, amp = ray_coeffs(
        ax, ay, az, dx / dist, dy / dist, dz / dist, cx, cy, cz, rx, ry, rz, n0
    )
    return erf_between(alpha, s0, amp, 0.0, dist)


@njit(cache=True, nogil=True)
def _tensor_into(K, offs, mi, mf, rest, T):
    """T[a, b] = sum over poles of K[pole, mi, mf, a, b] / (rest - off + i/2)."""
    for a in range(3):
        for b in range(3):
            T[a, b] = 0.0j
    for l in range(offs.shape[0]):
        c = 1.0 / ((rest - offs[l]) + 0.5j)
        for a in range(3):
            for b in range(3):
                T[a, b] = T[a, b] + c * K[l, mi, mf, a, b]


@njit(cache=True, nogil=True)
def _reverse_vec(K, offs, F, e_in, kvs, dir_outs, mis, mfs, n, omega0, w, T, leg_labs):
    """Reverse-order chain vector for the first n events; returns the rest
    frequency at the first atom and fills the reverse leg lab frequencies."""
    rest = omega0 - kvs[n - 1, 2]
    _tensor_into(K, offs, mis[n - 1] + F, mfs[n - 1] + F, rest, T)
    w[0] = T[0, 0] * e_in[0] + T[0, 1] * e_in[1] + T[0, 2] * e_in[2]
    w[1] = T[1, 0] * e_in[0] + T[1, 1] * e_in[1] + T[1, 2] * e_in[2]
    w[2] = T[2, 0] * e_in[0] + T[2, 1] * e_in[1] + T[2, 2] * e_in[2]
    for j in range(n - 2, -1, -1):
        sx = dir_outs[j, 0]
        sy = dir_outs[j, 1]
        sz = dir_outs[j, 2]
        lab = rest + (kvs[j + 1, 0] * (-sx) + kvs[j + 1, 1] * (-sy) + kvs[j + 1, 2] * (-sz))
        leg_labs[j] = lab
        rest = lab + (kvs[j, 0] * sx + kvs[j, 1] * sy + kvs[j, 2] * sz)
        dot = sx * w[0] + sy * w[1] + sz * w[2]
        w0 = w[0] - sx * dot
        w1 = w[1] - sy * dot
        w2 = w[2] - sz * dot
        _tensor_into(K, offs, mis[j] + F, mfs[j] + F, rest, T)
        w[0] = T[0, 0] * w0 + T[0, 1] * w1 + T[0, 2] * w2
        w[1] = T[1, 0] * w0 + T[1, 1] * w1 + T[1, 2] * w2
        w[2] = T[2, 0] * w0 + T[2, 1] * w1 + T[2, 2] * w2
    return rest


@njit(cache=True, nogil=True)
def _chunk_kernel(
    draws,
    n0,
    rx,
    ry,
    rz,
    cx,
    cy,
    cz,
    sigma0,
    k_mm,
    offs,
    attw,
    K,
    F,
    cumw,
    c_n,
    e_in,
    analyzers,
    detuning,
    bandwidth,
    kv0,
    max_order,
    roulette_threshold,
    thetas,
    resp_edges,
    use_resp,
):
    """Build and estimate every trajectory of one chunk of draws.

    Returns per-channel partial sums matching the reference accumulator's
    chunk partials: counters, ladder and crossed sums with second moments,
    order-resolved sums, and detected-frequency histograms.
    """
    n_traj = draws.shape[0]
    n_ch = analyzers.shape[0]
    n_theta = thetas.shape[0]
    nb = resp_edges.shape[0] - 1 if use_resp else 0
    n_resp = nb + 2 if use_resp else 1

    count = np.zeros(n_ch, dtype=np.int64)
    rejected = np.zeros(n_ch, dtype=np.int64)
    events_n = np.zeros(n_ch, dtype=np.int64)
    cap_hits = np.zeros(n_ch, dtype=np.int64)
    ladder = np.zeros(n_ch)
    crossed = np.zeros((n_ch, n_theta))
    ladder_sq = np.zeros(n_ch)
    crossed_sq = np.zeros(n_ch)
    cross_lc = np.zeros(n_ch)
    ladder_order = np.zeros((n_ch, max_order))
    crossed_order = np.zeros((n_ch, max_order))
    resp_total = np.zeros((n_ch, n_resp))
    resp_inter = np.zeros((n_ch, n_resp))

    # Per-trajectory scratch, reused across the chunk.
    pos = np.zeros((max_order, 3))
    kvs = np.zeros((max_order, 3))
    dir_outs = np.zeros((max_order, 3))
    mis = np.zeros(max_order, dtype=np.int64)
    mfs = np.zeros(max_order, dtype=np.int64)
    freq_ins = np.zeros(max_order)
    rests = np.zeros(max_order)
    weights = np.zeros(max_order)
    depths = np.zeros(max_order)
    v_chain = np.zeros((max_order, 3), dtype=np.complex128)
    w_rev = np.zeros(3, dtype=np.complex128)
    T = np.zeros((3, 3), dtype=np.complex128)
    leg_labs = np.zeros(max_order)
    l_terms = np.zeros((n_ch, max_order))
    c_terms = np.zeros((n_ch, max_order))
    j0_fac = np.zeros((max_order, n_theta))
    f_dets = np.zeros(max_order)
    ok = np.zeros(n_ch, dtype=np.bool_)

    hw = 0.5 * bandwidth
    cut = 50.0 * bandwidth
    sin_t = 0.0
    cos_t = 1.0

    for t in range(n_traj):
        row = draws[t]

        # ---- entry and forced first interaction -------------------------
        omega0 = detuning + truncated_cauchy(row[E_LASER], hw, cut)
        sigma_laser = _sigma_at(omega0, sigma0, offs, attw)
        g1, g2 = box_muller(1.0 - row[E_POS1], row[E_POS2])
        ox = cx + rx * g1
        oy = cy + ry * g2
        oz = cz - 12.0 * rz
        alpha, s0c, amp = ray_coeffs(
            ox, oy, oz, 0.0, 0.0, 1.0, cx, cy, cz, rx, ry, rz, n0
        )
        beam_column = erf_between(alpha, s0c, amp, 0.0, INF)
        depth_total = sigma_laser * beam_column
        q = -math.expm1(-depth_total)
        tau1 = -math.log1p(-row[E_PATH0] * q)
        s1 = invert_column(alpha, s0c, amp, 0.0, tau1, sigma_laser)
        if s1 < 1e-12:
            s1 = 1e-12
        entry_weight = q / depth_total

        px = ox
        py = oy
        pz = oz + s1
        dinx = 0.0
        diny = 0.0
        dinz = 1.0
        freq_in = omega0
        base_weight = entry_weight
        sampled_depth = tau1
        log_qmax = -INF
        order = 0

        # ---- build the scattering chain ---------------------------------
        for i in range(max_order):
            b = ENTRY_WIDTH + EVENT_WIDTH * i
            if kv0 == 0.0:
                kvx = 0.0
                kvy = 0.0
                kvz = 0.0
            else:
                ga, gb = box_muller(1.0 - row[b + V_BM1A], row[b + V_BM1B])
                gc, _gd = box_muller(1.0 - row[b + V_BM2A], row[b + V_BM2B])
                sv = kv0 / math.sqrt(2.0)
                kvx = sv * ga
                kvy = sv * gb
                kvz = sv * gc
            u_mi = row[b + S_MI]
            nlev = 2 * F + 1
            idx = 0
            while idx < nlev and u_mi >= cumw[idx]:
                idx += 1
            if idx > 2 * F:
                idx = 2 * F
            Mi = idx - F
            lo = Mi - 2
            if lo < -F:
                lo = -F
            hi = Mi + 2
            if hi > F:
                hi = F
            m = hi - lo + 1
            kk = int(row[b + S_MF] * m)
            if kk > m - 1:
                kk = m - 1
            Mf = lo + kk

            rest = freq_in - (kvx * dinx + kvy * diny + kvz * dinz)
            _tensor_into(K, offs, Mi + F, Mf + F, rest, T)
            if i == 0:
                for a in range(3):
                    v_chain[0, a] = (
                        T[a, 0] * e_in[0] + T[a, 1] * e_in[1] + T[a, 2] * e_in[2]
                    )
            else:
                dot = (
                    dinx * v_chain[i - 1, 0]
                    + diny * v_chain[i - 1, 1]
                    + dinz * v_chain[i - 1, 2]
                )
                w0 = v_chain[i - 1, 0] - dinx * dot
                w1 = v_chain[i - 1, 1] - diny * dot
                w2 = v_chain[i - 1, 2] - dinz * dot
                for a in range(3):
                    v_chain[i, a] = T[a, 0] * w0 + T[a, 1] * w1 + T[a, 2] * w2
            weight = base_weight * c_n * m

            ux, uy, uz = iso_direction(row[b + D_COS], row[b + D_PHI])
            freq_out = rest + (kvx * ux + kvy * uy + kvz * uz)

            pos[i, 0] = px
            pos[i, 1] = py
            pos[i, 2] = pz
            kvs[i, 0] = kvx
            kvs[i, 1] = kvy
            kvs[i, 2] = kvz
            dir_outs[i, 0] = ux
            dir_outs[i, 1] = uy
            dir_outs[i, 2] = uz
            mis[i] = Mi
            mfs[i] = Mf
            freq_ins[i] = freq_in
            rests[i] = rest
            weights[i] = weight
            depths[i] = sampled_depth
            order = i + 1
            if i + 1 == max_order:
                break

            # Russian roulette on the in-flight importance of both chains.
            if roulette_threshold <= 0.0:
                survive = 1.0
            else:
                _reverse_vec(
                    K, offs, F, e_in, kvs, dir_outs, mis, mfs, i + 1, omega0,
                    w_rev, T, leg_labs,
                )
                sv2 = (
                    v_chain[i, 0].real * v_chain[i, 0].real
                    + v_chain[i, 0].imag * v_chain[i, 0].imag
                    + v_chain[i, 1].real * v_chain[i, 1].real
                    + v_chain[i, 1].imag * v_chain[i, 1].imag
                    + v_chain[i, 2].real * v_chain[i, 2].real
                    + v_chain[i, 2].imag * v_chain[i, 2].imag
                )
                sw2 = (
                    w_rev[0].real * w_rev[0].real
                    + w_rev[0].imag * w_rev[0].imag
                    + w_rev[1].real * w_rev[1].real
                    + w_rev[1].imag * w_rev[1].imag
                    + w_rev[2].real * w_rev[2].real
                    + w_rev[2].imag * w_rev[2].imag
                )
                norm2 = 0.5 * (sv2 + sw2)
                if norm2 == 0.0:
                    survive = ZERO_METRIC_SURVIVAL
                else:
                    log_q = math.log(weight) + sampled_depth + math.log(norm2)
                    if log_q > log_qmax:
                        log_qmax = log_q
                    survive = math.exp(log_q - log_qmax) / roulette_threshold
                    if survive > 1.0:
                        survive = 1.0
            if row[b + S_ROULETTE] >= survive:
                break

            # Free path to the next atom at the current lab frequency.
            sigma_seg = _sigma_at(freq_out, sigma0, offs, attw)
            alpha, s0c, amp = ray_coeffs(
                px, py, pz, ux, uy, uz, cx, cy, cz, rx, ry, rz, n0
            )
            ahead = erf_between(alpha, s0c, amp, 0.0, INF)
            target = -math.log1p(-row[b + S_PATH])
            if target >= sigma_seg * ahead:
                break
            s = invert_column(alpha, s0c, amp, 0.0, target, sigma_seg)
            if s < 1e-12:
                s = 1e-12

            base_weight = base_weight * (FOUR_PI * c_n / sigma_seg) * m / survive
            sampled_depth = sampled_depth + target
            px = px + s * ux
            py = py + s * uy
            pz = pz + s * uz
            dinx = ux
            diny = uy
            dinz = uz
            freq_in = freq_out

        # ---- estimate the detected contribution at every order ----------
        for ch in range(n_ch):
            ok[ch] = True
        tau_partial = sigma_laser * _col_back(
            pos[0, 0], pos[0, 1], pos[0, 2], cx, cy, cz, rx, ry, rz, n0
        )
        for i in range(order):
            f_det = rests[i] - kvs[i, 2]
            f_dets[i] = f_det
            if i > 0:
                col = _col_segment(
                    pos[i - 1, 0], pos[i - 1, 1], pos[i - 1, 2],
                    pos[i, 0], pos[i, 1], pos[i, 2],
                    cx, cy, cz, rx, ry, rz, n0,
                )
                tau_partial = tau_partial + _sigma_at(freq_ins[i], sigma0, offs, attw) * col
            tau_dir = tau_partial + _sigma_at(f_det, sigma0, offs, attw) * _col_back(
                pos[i, 0], pos[i, 1], pos[i, 2], cx, cy, cz, rx, ry, rz, n0
            )
            phase_dir = k_mm * (pos[0, 2] - (sin_t * pos[i, 0] - cos_t * pos[i, 2]))
            att = math.exp(-0.5 * tau_dir)
            pre = math.cos(phase_dir) * att
            pim = math.sin(phase_dir) * att
            w_tr = weights[i] * math.exp(depths[i])

            if i == 0:
                for jt in range(n_theta):
                    j0_fac[0, jt] = 1.0
                for ch in range(n_ch):
                    a_d = (
                        analyzers[ch, 0].conjugate() * v_chain[0, 0]
                        + analyzers[ch, 1].conjugate() * v_chain[0, 1]
                        + analyzers[ch, 2].conjugate() * v_chain[0, 2]
                    )
                    ar = pre * a_d.real - pim * a_d.imag
                    ai = pre * a_d.imag + pim * a_d.real
                    l_i = w_tr * (ar * ar + ai * ai)
                    if not math.isfinite(l_i):
                        ok[ch] = False
                    l_terms[ch, 0] = l_i
                    c_terms[ch, 0] = 0.0
                continue

            rest0 = _reverse_vec(
                K, offs, F, e_in, kvs, dir_outs, mis, mfs, i + 1, omega0,
                w_rev, T, leg_labs,
            )
            f_det_r = rest0 - kvs[0, 2]
            tau_rev = sigma_laser * _col_back(
                pos[i, 0], pos[i, 1], pos[i, 2], cx, cy, cz, rx, ry, rz, n0
            )
            for j in range(1, i + 1):
                col = _col_segment(
                    pos[j - 1, 0], pos[j - 1, 1], pos[j - 1, 2],
                    pos[j, 0], pos[j, 1], pos[j, 2],
                    cx, cy, cz, rx, ry, rz, n0,
                )
                tau_rev = tau_rev + _sigma_at(leg_labs[j - 1], sigma0, offs, attw) * col
            tau_rev = tau_rev + _sigma_at(f_det_r, sigma0, offs, attw) * _col_back(
                pos[0, 0], pos[0, 1], pos[0, 2], cx, cy, cz, rx, ry, rz, n0
            )
            phase_rev = k_mm * (pos[i, 2] - (sin_t * pos[0, 0] - cos_t * pos[0, 2]))
            att_r = math.exp(-0.5 * tau_rev)
            pre_r = math.cos(phase_rev) * att_r
            pim_r = math.sin(phase_rev) * att_r

            dx = pos[0, 0] - pos[i, 0]
            dy = pos[0, 1] - pos[i, 1]
            rho = math.sqrt(dx * dx + dy * dy)
            for jt in range(n_theta):
                th = thetas[jt]
                if th == 0.0:
                    j0_fac[i, jt] = 1.0
                else:
                    j0_fac[i, jt] = bessel_j0(k_mm * th * rho)

            for ch in range(n_ch):
                a_d = (
                    analyzers[ch, 0].conjugate() * v_chain[i, 0]
                    + analyzers[ch, 1].conjugate() * v_chain[i, 1]
                    + analyzers[ch, 2].conjugate() * v_chain[i, 2]
                )
                ar = pre * a_d.real - pim * a_d.imag
                ai = pre * a_d.imag + pim * a_d.real
                a_r = (
                    analyzers[ch, 0].conjugate() * w_rev[0]
                    + analyzers[ch, 1].conjugate() * w_rev[1]
                    + analyzers[ch, 2].conjugate() * w_rev[2]
                )
                br = pre_r * a_r.real - pim_r * a_r.imag
                bi = pre_r * a_r.imag + pim_r * a_r.real
                l_i = 0.5 * w_tr * ((ar * ar + ai * ai) + (br * br + bi * bi))
                c_i = w_tr * (ar * br + ai * bi)
                if not (math.isfinite(l_i) and math.isfinite(c_i)):
                    ok[ch] = False
                l_terms[ch, i] = l_i
                c_terms[ch, i] = c_i

        # ---- commit, mirroring the reference accumulator ----------------
        for ch in range(n_ch):
            count[ch] += 1
            if not ok[ch]:
                rejected[ch] += 1
                continue
            events_n[ch] += order
            if order == max_order:
                cap_hits[ch] += 1
            lt = 0.0
            ct = 0.0
            for i in range(order):
                li = l_terms[ch, i]
                ci = c_terms[ch, i]
                ladder[ch] += li
                ladder_order[ch, i] += li
                crossed_order[ch, i] += ci
                for jt in range(n_theta):
                    crossed[ch, jt] += ci * j0_fac[i, jt]
                lt += li
                ct += ci
                if use_resp:
                    f = f_dets[i]
                    if f < resp_edges[0]:
                        bidx = nb
                    elif f >= resp_edges[nb]:
                        bidx = nb + 1
                    else:
                        step = (resp_edges[nb] - resp_edges[0]) / nb
                        bidx = int((f - resp_edges[0]) / step)
                        if bidx > nb - 1:
                            bidx = nb - 1
                    resp_total[ch, bidx] += li + ci
                    resp_inter[ch, bidx] += ci
            ladder_sq[ch] += lt * lt
            crossed_sq[ch] += ct * ct
            cross_lc[ch] += lt * ct

    return (
        count,
        rejected,
        events_n,
        cap_hits,
        ladder,
        crossed,
        ladder_sq,
        crossed_sq,
        cross_lc,
        ladder_order,
        crossed_order,
        resp_total,
        resp_inter,
    )


def simulate_point(
    cloud: CloudSpec,
    atom: AtomSpec,
    laser: LaserSpec,
    thermal: ThermalSpec,
    channels,
    *,
    seed: int,
    n_trajectories: int,
    point: int = 0,
    population: GroundPopulation | None = None,
    max_order: int = 30,
    roulette_threshold: float = 1e-4,
    attenuation_population: GroundPopulation | None = None,
    theta_grid=(0.0,),
    response_edges=None,
    workers: int = 1,
    meta: dict | None = None,
) -> dict:
    """Simulate one laser setting and return an accumulator per channel.

    All requested channels must share the incident polarization implied by
    `laser`; they reuse the same trajectories and scattering chains and
    differ only in the analyzer contraction, exactly like paired detection
    of one physical run.  Work is split into fixed-size chunks keyed by
    (seed, point, chunk index); totals do not depend on `workers`.
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    channels = [Channel(c) for c in channels]
    if not channels:
        raise ValueError("need at least one channel")
    if population is None:
        population = GroundPopulation.isotropic(atom.ground_F)
    if population.F != atom.ground_F:
        raise ValueError("population F does not match atom ground_F")

    e_in = np.asarray(laser_input_vector(laser), dtype=np.complex128)
    analyzers = np.array(
        [channel_analyzer(c, laser) for c in channels], dtype=np.complex128
    )
    F = int(atom.ground_F)
    cumw = np.cumsum(population.as_array())
    c_n = float(normalize_differential(atom, population))
    attw = np.asarray(
        attenuation_line_weights(atom, attenuation_population), dtype=np.float64
    )
    offs = np.asarray(atom.line_offsets_gamma(), dtype=np.float64)
    K = np.ascontiguousarray(_pole_tensors(atom))
    cx, cy, cz = (float(v) for v in cloud.center_mm)
    rx, ry, rz = (float(v) for v in cloud.radii_mm)
    thetas = np.asarray(theta_grid, dtype=np.float64)
    use_resp = response_edges is not None
    edges_arr = (
        np.asarray(response_edges, dtype=np.float64) if use_resp else np.zeros(1)
    )

    accs = {
        c: Accumulator(theta_grid, max_order, response_edges, meta) for c in channels
    }
    n_chunks = (n_trajectories + CHUNK_TRAJECTORIES - 1) // CHUNK_TRAJECTORIES
    lock = Lock()

    def work(ci: int) -> None:
        size = CHUNK_TRAJECTORIES
        if ci == n_chunks - 1:
            size = n_trajectories - CHUNK_TRAJECTORIES * (n_chunks - 1)
        draws = draw_chunk(seed, point, ci, max_order, size)
        out = _chunk_kernel(
            draws,
            float(cloud.n0_cm3),
            rx,
            ry,
            rz,
            cx,
            cy,
            cz,
            float(atom.sigma0_cm2),
            float(atom.k_per_mm),
            offs,
            attw,
            K,
            F,
            cumw,
            c_n,
            e_in,
            analyzers,
            float(laser.detuning),
            float(laser.bandwidth),
            float(thermal.kv0),
            int(max_order),
            float(roulette_threshold),
            thetas,
            edges_arr,
            use_resp,
        )
        with lock:
            for k, c in enumerate(channels):
                part = accs[c].partial(ci)
                part.count = int(out[0][k])
                part.rejected = int(out[1][k])
                part.events = int(out[2][k])
                part.cap_hits = int(out[3][k])
                part.ladder = float(out[4][k])
                part.crossed = out[5][k].copy()
                part.ladder_sq = float(out[6][k])
                part.crossed_sq = float(out[7][k])
                part.cross_lc = float(out[8][k])
                part.ladder_order = out[9][k].copy()
                part.crossed_order = out[10][k].copy()
                if use_resp:
                    part.resp_total = out[11][k].copy()
                    part.resp_inter = out[12][k].copy()

    if workers == 1:
        for ci in range(n_chunks):
            work(ci)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(work, range(n_chunks)))
    return accs
