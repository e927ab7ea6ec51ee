"""Scalar numerical helpers shared by the reference path and the fused engine.

Everything here is written in numba-compatible style (plain floats, math
module) and decorated with @njit when numba is importable; the same functions
run un-jitted otherwise.  Keeping one implementation guarantees the reference
transport and the compiled engine evaluate identical arithmetic.
"""

from __future__ import annotations

import math

try:  # pragma: no cover - exercised implicitly everywhere
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


_SQRT_PI = math.sqrt(math.pi)


@njit(cache=True)
def ray_coeffs(ox, oy, oz, dx, dy, dz, cx, cy, cz, rx, ry, rz, n0):
    """Gaussian chord coefficients for a ray through an ellipsoidal cloud.

    Returns (alpha, s0, amp) such that the column density (cm^-2) between
    path lengths s1 and s2 (mm) is amp * (erf(alpha*(s2-s0)) - erf(alpha*(s1-s0))).
    """
    px = (ox - cx) / rx
    py = (oy - cy) / ry
    pz = (oz - cz) / rz
    qx = dx / rx
    qy = dy / ry
    qz = dz / rz
    a = qx * qx + qy * qy + qz * qz
    b = px * qx + py * qy + pz * qz
    g = px * px + py * py + pz * pz
    alpha = math.sqrt(0.5 * a)
    s0 = -b / a
    amp = 0.1 * n0 * math.exp(-0.5 * (g - b * b / a)) * math.sqrt(0.5 * math.pi / a)
    return alpha, s0, amp


@njit(cache=True)
def erf_between(alpha, s0, amp, s1, s2):
    """Column density between path lengths s1 <= s2 (either may be +-inf)."""
    if s1 == -math.inf:
        e1 = -1.0
    else:
        e1 = math.erf(alpha * (s1 - s0))
    if s2 == math.inf:
        e2 = 1.0
    else:
        e2 = math.erf(alpha * (s2 - s0))
    return amp * (e2 - e1)


@njit(cache=True)
def solve_erf(y, x_lo, tol):
    """Solve erf(x) = y for x > x_lo (y strictly below 1), Newton + bisection."""
    lo = max(x_lo, -6.75)
    hi = max(lo, 0.0) + 1.0
    while math.erf(hi) < y and hi < 6.75:
        hi += 1.5
    x = 0.5 * (lo + hi)
    for _ in range(100):
        f = math.erf(x) - y
        if abs(f) <= tol:
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        df = 2.0 / _SQRT_PI * math.exp(-x * x)
        if df > 1e-300:
            xn = x - f / df
        else:
            xn = 0.5 * (lo + hi)
        if xn <= lo or xn >= hi:
            xn = 0.5 * (lo + hi)
        x = xn
    return x


@njit(cache=True)
def invert_column(alpha, s0, amp, s_start, target, sigma):
    """Path length s with sigma * column(s_start, s) = target (optical depth).

    Caller guarantees target < sigma * column(s_start, inf).
    """
    if s_start == -math.inf:
        e1 = -1.0
        x_lo = -math.inf
    else:
        x_lo = alpha * (s_start - s0)
        e1 = math.erf(x_lo)
    y = e1 + target / (sigma * amp)
    tol = max(1e-16, 1e-13 / max(sigma * amp, 1e-300))
    x = solve_erf(y, x_lo, tol)
    return x / alpha + s0


@njit(cache=True)
def bessel_j0(x):
    """J0(x), double-precision rational/asymptotic fit (|err| < 1e-7)."""
    ax = abs(x)
    if ax < 8.0:
        y = x * x
        p1 = 57568490574.0 + y * (
            -13362590354.0
            + y * (651619640.7 + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456))))
        )
        p2 = 57568490411.0 + y * (
            1029532985.0 + y * (9494680.718 + y * (59272.64853 + y * (267.8532712 + y)))
        )
        return p1 / p2
    z = 8.0 / ax
    y = z * z
    xx = ax - 0.785398164
    p1 = 1.0 + y * (
        -0.1098628627e-2 + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6))
    )
    p2 = -0.1562499995e-1 + y * (
        0.1430488765e-3 + y * (-0.6911147651e-5 + y * (0.7621095161e-6 + y * (-0.934935152e-7)))
    )
    return math.sqrt(0.636619772 / ax) * (math.cos(xx) * p1 - z * math.sin(xx) * p2)


@njit(cache=True)
def box_muller(u1, u2):
    """Two standard normals from two uniforms in (0, 1)."""
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)


@njit(cache=True)
def truncated_cauchy(u, half_width, cut):
    """Cauchy(0, half_width) truncated to |x| <= cut, by inverse CDF."""
    if half_width <= 0.0:
        return 0.0
    tmax = math.atan(cut / half_width)
    return half_width * math.tan(tmax * (2.0 * u - 1.0))


@njit(cache=True)
def iso_direction(u1, u2):
    """Isotropic unit vector from two uniforms (uniform cos-polar, azimuth)."""
    w = 2.0 * u1 - 1.0
    s = math.sqrt(max(0.0, 1.0 - w * w))
    phi = 2.0 * math.pi * u2
    return s * math.cos(phi), s * math.sin(phi), w
