"""Polarization channels for backscattering detection.

The beam propagates along +z; the detector collects light near -z.  Four
standard channels: linear parallel (ll), linear perpendicular (lperp),
helicity preserving (hh) and helicity flipping (hperp).  Helicity is defined
about each beam's own propagation direction, so the detector frame for -z is
(x, -y, -z) to stay right-handed.
"""

from __future__ import annotations

from enum import Enum
from math import cos, radians, sin, sqrt

import numpy as np


class Channel(str, Enum):
    LL = "ll"
    LPERP = "lperp"
    HH = "hh"
    HPERP = "hperp"

    @property
    def helical(self) -> bool:
        return self in (Channel.HH, Channel.HPERP)


def transverse_projector(u) -> np.ndarray:
    """P = 1 - u u^T, projecting amplitudes onto the plane normal to u."""
    u = np.asarray(u, dtype=float)
    return np.eye(3) - np.outer(u, u)


def helicity_vector(h: int, frame_x, frame_y) -> np.ndarray:
    """Unit helicity vector -h(x + i h y)/sqrt(2) in the given transverse frame."""
    if h not in (1, -1):
        raise ValueError("helicity must be +1 or -1")
    ex = np.asarray(frame_x, dtype=float)
    ey = np.asarray(frame_y, dtype=float)
    return -h * (ex + 1j * h * ey) / sqrt(2.0)


def input_vector(channel: Channel, linear_angle_deg: float = 0.0, helicity: int = 1):
    """Incident polarization for the channel's input class (beam along +z)."""
    if channel.helical:
        return helicity_vector(helicity, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    a = radians(linear_angle_deg)
    return np.array([cos(a), sin(a), 0.0], dtype=complex)


def analyzer_vector(channel: Channel, linear_angle_deg: float = 0.0, helicity: int = 1):
    """Accepted polarization at the detector (collection along -z).

    The detector frame is (x, -y, -z); 'parallel'/'preserving' are defined
    with respect to the incident beam's linear axis or helicity.
    """
    if channel.helical:
        h_out = helicity if channel is Channel.HH else -helicity
        return helicity_vector(h_out, (1.0, 0.0, 0.0), (0.0, -1.0, 0.0))
    a = radians(linear_angle_deg)
    if channel is Channel.LL:
        return np.array([cos(a), sin(a), 0.0], dtype=complex)
    return np.array([-sin(a), cos(a), 0.0], dtype=complex)


def channel_vectors(channel: Channel, linear_angle_deg: float = 0.0, helicity: int = 1):
    """(e_in, e_analyzer) pair for a channel."""
    return (
        input_vector(channel, linear_angle_deg, helicity),
        analyzer_vector(channel, linear_angle_deg, helicity),
    )


def input_group(channels) -> dict:
    """Group channels by shared incident polarization ('linear' / 'helical')."""
    groups: dict = {}
    for ch in channels:
        key = "helical" if Channel(ch).helical else "linear"
        groups.setdefault(key, []).append(Channel(ch))
    return groups
