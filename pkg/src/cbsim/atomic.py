"""Atomic structure and single-scattering amplitudes.

A near-resonant photon scatters off one ground hyperfine level (total angular
momentum F) through a multiplet of excited levels F'.  The elastic scattering
amplitude between Zeeman sublevels Mi -> Mf is a sum over excited poles,

    A = sum_F' g_F' / (delta_F' + i/2) * sum_M' <F Mf|d.e_out*|F' M'><F' M'|d.e_in|F Mi>

with delta_F' the rest-frame detuning from pole F' in units of the natural
width gamma, dipole elements built from Clebsch-Gordan coefficients, and
g_F' = sqrt(strength_F'/(2F'+1)) the Wigner-Eckart-normalized line weight.
Everything is expressed as Cartesian 3x3 tensors so polarization vectors and
transverse projectors compose by plain matrix algebra.

Frequencies are in units of gamma throughout; cross sections in cm^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import pi, sqrt

import numpy as np

from .angular import clebsch_gordan, wigner6j

# Peak cross section of the reference line, pinned by the optical-depth
# constraint sqrt(2*pi)*sigma0*n0*r0 = 6 at n0 = 1.6e10 cm^-3, r0 = 1.2 mm.
SIGMA0_CM2 = 6.0 / (sqrt(2.0 * pi) * 1.6e10 * 0.12)

_U_TO_KG = 1.66053906660e-27
_KB = 1.380649e-23


@dataclass(frozen=True)
class ZeemanState:
    """A |F, M> sublevel."""

    F: int
    M: int

    def __post_init__(self):
        if self.F < 0:
            raise ValueError("F must be non-negative")
        if abs(self.M) > self.F:
            raise ValueError(f"|M| = {abs(self.M)} exceeds F = {self.F}")


@dataclass(frozen=True)
class GroundPopulation:
    """Statistical weights of the ground sublevels M = -F..F (sum to 1)."""

    F: int
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (2 * self.F + 1,):
            raise ValueError(f"need {2 * self.F + 1} weights for F = {self.F}")
        if np.any(w < 0.0):
            raise ValueError("population weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("population weights must sum to 1")

    @classmethod
    def isotropic(cls, F: int) -> "GroundPopulation":
        n = 2 * F + 1
        return cls(F, tuple([1.0 / n] * n))

    @classmethod
    def stretched(cls, F: int, M: int | None = None) -> "GroundPopulation":
        """All atoms in a single sublevel (default M = +F)."""
        if M is None:
            M = F
        if abs(M) > F:
            raise ValueError("stretched M outside -F..F")
        w = [0.0] * (2 * F + 1)
        w[M + F] = 1.0
        return cls(F, tuple(w))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class AtomSpec:
    """Atomic parameters of the scatterer.

    lines: tuple of (F', offset_MHz, strength) for each excited level, offsets
    relative to the reference line, strengths relative to the reference line
    (= 1.0).  sigma0_cm2 is the peak total cross section of the reference
    line for an isotropic, unpolarized ensemble.
    """

    gamma_MHz: float = 5.9
    wavelength_nm: float = 780.0
    mass_u: float = 84.911789
    ground_F: int = 3
    lines: tuple = ((4, 0.0, 1.0),)
    sigma0_cm2: float = SIGMA0_CM2

    def __post_init__(self):
        if self.gamma_MHz <= 0 or self.wavelength_nm <= 0 or self.mass_u <= 0:
            raise ValueError("gamma, wavelength and mass must be positive")
        if self.ground_F < 0:
            raise ValueError("ground_F must be non-negative")
        if not self.lines:
            raise ValueError("need at least one excited line")
        for Fp, _off, s in self.lines:
            if s <= 0:
                raise ValueError("line strengths must be positive")
            if abs(Fp - self.ground_F) > 1:
                raise ValueError("dipole selection rule requires |F' - F| <= 1")

    @property
    def k_per_mm(self) -> float:
        """Optical wavenumber in mm^-1."""
        return 2.0e6 * pi / self.wavelength_nm

    def line_offsets_gamma(self) -> np.ndarray:
        return np.array([off / self.gamma_MHz for _, off, _ in self.lines])

    def line_strengths_rel(self) -> np.ndarray:
        return np.array([s for _, _, s in self.lines])


def line_strengths(J=0.5, Jp=1.5, I=2.5, F=3) -> dict:
    """Relative hyperfine line strengths F -> F' from 6j symbols.

    S_FF' = (2F'+1)(2J+1) {J Jp 1; F' F I}^2, renormalized so the strongest
    allowed line (F' = F+1 when present) equals 1.
    """
    out = {}
    Fp_min = int(abs(Jp - I))
    Fp_max = int(Jp + I)
    for Fp in range(Fp_min, Fp_max + 1):
        if abs(Fp - F) > 1:
            continue
        six = wigner6j(J, Jp, 1, Fp, F, I)
        s = (2 * Fp + 1) * (2 * J + 1) * six * six
        if s > 0:
            out[Fp] = s
    ref = out[max(out)]
    return {Fp: s / ref for Fp, s in out.items()}


def rb85(sigma0_cm2: float = SIGMA0_CM2) -> AtomSpec:
    """F = 3 ground level with the F' = 2, 3, 4 excited multiplet."""
    s = line_strengths(J=0.5, Jp=1.5, I=2.5, F=3)
    return AtomSpec(
        gamma_MHz=5.9,
        wavelength_nm=780.0,
        mass_u=84.911789,
        ground_F=3,
        lines=((4, 0.0, s[4]), (3, -120.6, s[3]), (2, -184.0, s[2])),
        sigma0_cm2=sigma0_cm2,
    )


def single_line(sigma0_cm2: float = SIGMA0_CM2) -> AtomSpec:
    """The F = 3 -> F' = 4 line alone (no off-resonant multiplet)."""
    return AtomSpec(
        ground_F=3,
        lines=((4, 0.0, 1.0),),
        sigma0_cm2=sigma0_cm2,
    )


def classical_dipole(sigma0_cm2: float = SIGMA0_CM2) -> AtomSpec:
    """Degenerate-free point dipole: F = 0 -> F' = 1, one line."""
    return AtomSpec(
        ground_F=0,
        lines=((1, 0.0, 1.0),),
        sigma0_cm2=sigma0_cm2,
    )


def _dipole_cartesian(F: int, Fp: int) -> np.ndarray:
    """D[alpha, M+F, M'+Fp] = <F' M'| d_alpha |F M> from CG coefficients.

    d_x = (d_-1 - d_+1)/sqrt(2), d_y = i(d_-1 + d_+1)/sqrt(2), d_z = d_0,
    with <F' M'|d_q|F M> = <F M; 1 q|F' M'>.
    """
    D = np.zeros((3, 2 * F + 1, 2 * Fp + 1), dtype=complex)
    for M in range(-F, F + 1):
        for q in (-1, 0, 1):
            Mp = M + q
            if abs(Mp) > Fp:
                continue
            cg = clebsch_gordan(F, M, 1, q, Fp, Mp)
            if cg == 0.0:
                continue
            if q == 0:
                D[2, M + F, Mp + Fp] += cg
            elif q == -1:
                D[0, M + F, Mp + Fp] += cg / sqrt(2.0)
                D[1, M + F, Mp + Fp] += 1j * cg / sqrt(2.0)
            else:
                D[0, M + F, Mp + Fp] += -cg / sqrt(2.0)
                D[1, M + F, Mp + Fp] += 1j * cg / sqrt(2.0)
    return D


@lru_cache(maxsize=None)
def _pole_tensors(atom: AtomSpec) -> np.ndarray:
    """K[pole, Mi+F, Mf+F, alpha, beta] = g^2-free CG bilinears per pole.

    K_ab = g_F' * sum_M' D_a(Mf, M')* D_b(Mi, M'); the frequency-dependent
    amplitude is T(Mi->Mf) = sum_poles K[pole, Mi, Mf] / (delta_pole + i/2).
    """
    F = atom.ground_F
    n = 2 * F + 1
    K = np.zeros((len(atom.lines), n, n, 3, 3), dtype=complex)
    for p, (Fp, _off, strength) in enumerate(atom.lines):
        D = _dipole_cartesian(F, Fp)
        g = sqrt(strength / (2 * Fp + 1))
        # K[Mi, Mf, a, b] = g * sum_M' conj(D[a, Mf, M']) D[b, Mi, M']
        K[p] = g * np.einsum("afm,bim->ifab", np.conj(D), D)
    return K


@lru_cache(maxsize=None)
def _beta_table(atom: AtomSpec) -> np.ndarray:
    """beta[pole, M+F] = sum_q <F M; 1 q|F' M+q>^2 (excitation strength sums)."""
    F = atom.ground_F
    out = np.zeros((len(atom.lines), 2 * F + 1))
    for p, (Fp, _off, _s) in enumerate(atom.lines):
        for M in range(-F, F + 1):
            out[p, M + F] = sum(
                clebsch_gordan(F, M, 1, q, Fp, M + q) ** 2
                for q in (-1, 0, 1)
                if abs(M + q) <= Fp
            )
    return out


def allowed_final_sublevels(F: int, Mi: int) -> list:
    """Final sublevels reachable by one absorption+emission (|dM| <= 2)."""
    return list(range(max(-F, Mi - 2), min(F, Mi + 2) + 1))


def scattering_tensors(atom: AtomSpec, omega_rest: float, Mi: int) -> dict:
    """Cartesian 3x3 amplitude tensors for each reachable Mf.

    omega_rest is the photon frequency in the scatterer's rest frame, offset
    from the reference line in units of gamma.
    """
    F = atom.ground_F
    if abs(Mi) > F:
        raise ValueError("Mi outside -F..F")
    K = _pole_tensors(atom)
    offs = atom.line_offsets_gamma()
    coeff = 1.0 / ((omega_rest - offs) + 0.5j)
    out = {}
    for Mf in allowed_final_sublevels(F, Mi):
        T = np.einsum("p,pab->ab", coeff, K[:, Mi + F, Mf + F])
        out[Mf] = T
    return out


def single_tensor(atom: AtomSpec, omega_rest: float, Mi: int, Mf: int) -> np.ndarray:
    """One Cartesian 3x3 amplitude tensor for the Mi -> Mf transition."""
    F = atom.ground_F
    if abs(Mi) > F or abs(Mf) > F or abs(Mf - Mi) > 2:
        return np.zeros((3, 3), dtype=complex)
    K = _pole_tensors(atom)
    offs = atom.line_offsets_gamma()
    coeff = 1.0 / ((omega_rest - offs) + 0.5j)
    return np.einsum("p,pab->ab", coeff, K[:, Mi + F, Mf + F])


def scattering_amplitude(
    atom: AtomSpec,
    omega_rest: float,
    Mi: int,
    Mf: int,
    e_in: np.ndarray,
    e_out: np.ndarray,
) -> complex:
    """Amplitude e_out* . T(Mi->Mf; omega_rest) . e_in.

    Zero whenever |Mf - Mi| > 2 or a sublevel lies outside the ground level.
    """
    F = atom.ground_F
    if abs(Mi) > F or abs(Mf) > F or abs(Mf - Mi) > 2:
        return 0.0 + 0.0j
    T = scattering_tensors(atom, omega_rest, Mi)[Mf]
    return complex(np.conj(np.asarray(e_out)) @ T @ np.asarray(e_in))


def attenuation_line_weights(
    atom: AtomSpec, population: GroundPopulation | None = None
) -> np.ndarray:
    """Per-line weights w_l with sigma(w) = sigma0 * sum_l w_l/(1+4(w-o_l)^2).

    None gives the unpolarized isotropic-population weights (the bare relative
    line strengths); a population weights each line by its polarization- and
    population-averaged excitation strength.
    """
    weights = atom.line_strengths_rel().copy()
    if population is not None:
        if population.F != atom.ground_F:
            raise ValueError("population F does not match atom ground_F")
        beta = _beta_table(atom)
        p = population.as_array()
        twoFp1 = np.array([2 * Fp + 1 for Fp, _o, _s in atom.lines], dtype=float)
        weights *= (2 * atom.ground_F + 1) / twoFp1 * (beta @ p)
    return weights


def total_cross_section(
    atom: AtomSpec, delta: float, population: GroundPopulation | None = None
) -> float:
    """Total cross section (cm^2) at laser detuning delta (units of gamma).

    Default is the unpolarized, isotropic-population value
    sigma0 * sum_F' S_F' / (1 + (2(delta - delta_F'))^2); with a population it
    is weighted by the sublevel excitation strengths (polarization-averaged).
    """
    offs = atom.line_offsets_gamma()
    weights = attenuation_line_weights(atom, population)
    lor = 1.0 / (1.0 + 4.0 * (delta - offs) ** 2)
    return float(atom.sigma0_cm2 * np.dot(weights, lor))


def _angular_quadrature(n_theta: int, n_phi: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * pi / n_phi
    us = []
    ws = []
    for ct, wt in zip(x, w):
        s = sqrt(1.0 - ct * ct)
        for p in phi:
            us.append((s * np.cos(p), s * np.sin(p), ct))
            ws.append(wt * wphi)
    return np.array(us), np.array(ws)


def _scattered_power_integral(
    atom: AtomSpec, population: GroundPopulation, delta: float, n_theta: int, n_phi: int
) -> float:
    """(1/3) sum_{e_in basis} int dOmega sum_pol sum_Mf <|A|^2>_pop."""
    F = atom.ground_F
    us, ws = _angular_quadrature(n_theta, n_phi)
    pw = population.as_array()
    total = 0.0
    for Mi in range(-F, F + 1):
        if pw[Mi + F] == 0.0:
            continue
        tensors = scattering_tensors(atom, delta, Mi)
        for T in tensors.values():
            # sum over an orthonormal e_in triad == trace over input index
            v = T.T  # v[b] rows: amplitude vectors for e_in = basis b
            # sum_pol |P(u) v|^2 = |v|^2 - |u.v|^2 for each direction u
            norm2 = np.sum(np.abs(v) ** 2)
            uv = us @ v.T  # (ndir, 3) complex
            integ = np.sum(ws * (norm2 - np.sum(np.abs(uv) ** 2, axis=1)))
            total += pw[Mi + F] * integ / 3.0
    return total


@lru_cache(maxsize=None)
def _normalize_cached(atom: AtomSpec, population: GroundPopulation) -> float:
    coarse = _scattered_power_integral(atom, population, 0.0, 8, 16)
    fine = _scattered_power_integral(atom, population, 0.0, 12, 24)
    if abs(fine - coarse) > 1e-6 * abs(fine):
        raise RuntimeError(
            "angular quadrature for the differential-cross-section "
            f"normalization did not converge: {coarse} vs {fine}"
        )
    sigma = total_cross_section(atom, 0.0, population)
    return sigma / fine


def normalize_differential(
    atom: AtomSpec, population: GroundPopulation | None = None
) -> float:
    """Constant c (cm^2) with c * |A|^2 = differential cross section.

    c satisfies c * int dOmega sum_pol sum_Mf <|A|^2>_pop = sigma(delta) at
    every detuning; it is evaluated once by angular quadrature (converged to
    1e-6) and cached per (atom, population).
    """
    if population is None:
        population = GroundPopulation.isotropic(atom.ground_F)
    return _normalize_cached(atom, population)


def kv0_from_temperature(atom: AtomSpec, temperature_K: float) -> float:
    """Doppler parameter k*v0 in units of gamma, v0 = sqrt(2 kB T / m)."""
    v0 = sqrt(2.0 * _KB * temperature_K / (atom.mass_u * _U_TO_KG))
    return v0 / (atom.wavelength_nm * 1e-9 * atom.gamma_MHz * 1e6)
