"""Deterministic per-trajectory tables of uniform random draws.

Every trajectory consumes one fixed-width row of uniforms with a fixed
semantic layout, independent of how the trajectory actually unfolds (slots
for draws that end up unused are still allocated).  Rows are produced in
fixed-size chunks by a counter-based generator keyed on
(seed, point index, chunk index), so any chunk can be regenerated
independently, in any order, on any worker, with identical bits.  This is
what makes results reproducible and independent of the worker count, and
makes physically equivalent configurations (for example zero laser
bandwidth requested through different scan drivers) consume identical
draws.
"""

from __future__ import annotations

import numpy as np

## Trajectories per chunk; a chunk is the unit of work distribution,
## accumulator partial sums, and jackknife batching.
CHUNK_TRAJECTORIES = 4096

## Row layout: ENTRY_WIDTH leading draws, then EVENT_WIDTH draws per
## scattering event up to the configured maximum order.
ENTRY_WIDTH = 4
EVENT_WIDTH = 10

## Entry slots.
E_POS1 = 0  # Box-Muller pair for the transverse entry position
E_POS2 = 1
E_LASER = 2  # laser-frequency draw (finite bandwidth)
E_PATH0 = 3  # forced first-interaction depth draw

## Per-event slots, relative to the event base offset.
V_BM1A = 0  # two Box-Muller pairs -> three velocity components
V_BM1B = 1  # (the fourth normal deviate is discarded)
V_BM2A = 2
V_BM2B = 3
S_MI = 4  # initial ground sublevel, inverse-CDF over the population
S_MF = 5  # final sublevel, uniform over the allowed set
D_COS = 6  # isotropic outgoing direction
D_PHI = 7
S_PATH = 8  # free path to the next scatterer
S_ROULETTE = 9  # Russian-roulette survival draw


def row_width(max_order: int) -> int:
    """Number of uniforms one trajectory consumes."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    return ENTRY_WIDTH + EVENT_WIDTH * max_order


def event_base(order_index: int) -> int:
    """Row offset of the draws for the 0-based `order_index`-th event."""
    return ENTRY_WIDTH + EVENT_WIDTH * order_index


def chunk_key(seed: int, point: int, chunk: int) -> tuple:
    """(128-bit Philox key, 256-bit counter) addressing one chunk's stream.

    The key combines the run seed and scan-point index; the chunk index sits
    in the top 64 bits of the counter, so streams of different chunks can
    never overlap (a chunk consumes far fewer than 2**192 counter values).
    """
    mask = (1 << 64) - 1
    if point < 0 or chunk < 0:
        raise ValueError("point and chunk indices must be >= 0")
    return (seed & mask) | ((point & mask) << 64), (chunk & mask) << 192


def draw_chunk(
    seed: int,
    point: int,
    chunk: int,
    max_order: int,
    n_trajectories: int = CHUNK_TRAJECTORIES,
) -> np.ndarray:
    """Uniform draws in [0, 1) for one chunk, shape (n_trajectories, width)."""
    key, counter = chunk_key(seed, point, chunk)
    gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
    return gen.random((n_trajectories, row_width(max_order)), dtype=np.float64)
