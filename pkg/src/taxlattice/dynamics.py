"""Heat-bath updates for the Ising model with site-dependent fields and temperatures.

The coupling between neighbours is the energy unit (J = 1).  Site energies are
``E(S_i) = -S_i * (h_i + B_i)`` with ``h_i`` the neighbour spin sum, so flipping
``S_i`` costs ``2 * S_i * (h_i + B_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .lattice import SpinGrid, neighbor_spin_sum
from .population import Society

COUPLING = 1.0


def flip_energy_delta(spin: int, neighbor_sum: float, field: float) -> float:
    """``E(-S_i) - E(S_i)``."""
    return 2.0 * spin * (COUPLING * neighbor_sum + field)


@numba.njit(cache=True, nogil=True)
def _logistic(x):
    # 1 / (1 + exp(-x)) without overflow for large |x|
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def heatbath_prob(target: int, neighbor_sum: float, field: float, temperature: float) -> float:
    """Probability that the heat-bath rule puts the spin in state ``target``."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if target not in (1, -1):
        raise ValueError(f"target spin must be +1 or -1, got {target}")
    return float(_logistic(flip_energy_delta(target, neighbor_sum, field) / temperature))


@numba.njit(cache=True, nogil=True)
def _sweep_kernel(spins, width, height, temperatures, fields, locked, draws):
    flips = 0
    for y in range(height):
        up = ((y - 1) % height) * width
        down = ((y + 1) % height) * width
        row = y * width
        for x in range(width):
            i = row + x
            if locked[i] > 0:
                continue
            left = row + (x - 1) % width
            right = row + (x + 1) % width
            h = spins[left] + spins[right] + spins[up + x] + spins[down + x]
            p_up = _logistic(2.0 * (COUPLING * h + fields[i]) / temperatures[i])
            new = 1 if draws[i] < p_up else -1
            if new != spins[i]:
                spins[i] = new
                flips += 1
    return flips


@dataclass
class SweepOutcome:
    flips: int
    grid: SpinGrid


def update_site(
    grid: SpinGrid,
    society: Society,
    penalties: np.ndarray | None,
    site: int,
    rng: np.random.Generator | None = None,
    draw: float | None = None,
) -> int:
    """Heat-bath update of a single site; returns the new spin.

    Consumes one uniform from ``rng`` unless ``draw`` is given.  Sites still
    serving a penalty are left alone.
    """
    if penalties is not None and penalties[site] > 0:
        return int(grid.spins[site])
    r = rng.random() if draw is None else draw
    h = neighbor_spin_sum(grid, site)
    p_up = heatbath_prob(1, h, society.fields[site], society.temperatures[site])
    grid.spins[site] = 1 if r < p_up else -1
    return int(grid.spins[site])


def sweep(
    grid: SpinGrid,
    society: Society,
    penalties: np.ndarray | None,
    rng: np.random.Generator,
) -> SweepOutcome:
    """One raster-order pass over the lattice, updating ``grid`` in place.

    Exactly ``N`` uniforms are drawn up front and site ``i`` uses draw ``i``;
    the draws of penalised sites are discarded, so the stream position after a
    sweep never depends on the enforcement state.
    """
    if (grid.width, grid.height) != society.dims:
        raise ValueError("grid and society dims differ")
    if penalties is None:
        penalties = np.zeros(grid.n_sites, dtype=np.int64)
    draws = rng.random(grid.n_sites)
    flips = _sweep_kernel(
        grid.spins, grid.width, grid.height, society.temperatures, society.fields, penalties, draws
    )
    return SweepOutcome(int(flips), grid)
