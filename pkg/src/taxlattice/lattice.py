"""Square lattice with periodic boundaries and the spin field living on it.

Sites are indexed row-major: ``site = y * width + x``.  Spins are stored as a
flat ``int8`` array holding +1 (compliant) or -1 (evading).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SpinGrid:
    width: int
    height: int
    spins: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"lattice dims must be positive, got {self.width}x{self.height}")
        self.spins = np.asarray(self.spins, dtype=np.int8).reshape(-1)
        if self.spins.size != self.width * self.height:
            raise ValueError("spin array size does not match lattice dims")
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must be +1 or -1")

    @classmethod
    def filled(cls, width: int, height: int, value: int = 1) -> "SpinGrid":
        return cls(width, height, np.full(width * height, value, dtype=np.int8))

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    def as_matrix(self) -> np.ndarray:
        """View of the spins shaped ``(height, width)``."""
        return self.spins.reshape(self.height, self.width)

    def copy(self) -> "SpinGrid":
        return SpinGrid(self.width, self.height, self.spins.copy())

    def to_text(self) -> str:
        rows = (" ".join(f"{int(s):d}" for s in row) for row in self.as_matrix())
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SpinGrid":
        rows = [line.split() for line in text.strip().splitlines() if line.strip()]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("grid text must be a non-empty rectangular matrix")
        spins = np.array([[int(v) for v in r] for r in rows], dtype=np.int8)
        return cls(spins.shape[1], spins.shape[0], spins)


def site_coords(site: int, width: int) -> tuple[int, int]:
    return site % width, site // width


def site_index(x: int, y: int, width: int) -> int:
    return y * width + x


def neighbor_sites(site: int, dims: tuple[int, int]) -> tuple[int, int, int, int]:
    """Left, right, up and down neighbours of ``site`` on a ``(width, height)`` torus.

    On lattices with a side shorter than 3 the same neighbour can appear more
    than once; on a 1x1 lattice all four are the site itself.
    """
    width, height = dims
    if not 0 <= site < width * height:
        raise IndexError(f"site {site} out of range for {width}x{height} lattice")
    x, y = site_coords(site, width)
    return (
        site_index((x - 1) % width, y, width),
        site_index((x + 1) % width, y, width),
        site_index(x, (y - 1) % height, width),
        site_index(x, (y + 1) % height, width),
    )


def neighbor_table(width: int, height: int) -> np.ndarray:
    """``(N, 4)`` array of neighbour indices, same order as :func:`neighbor_sites`."""
    ys, xs = np.divmod(np.arange(width * height), width)
    return np.stack(
        [
            ys * width + (xs - 1) % width,
            ys * width + (xs + 1) % width,
            ((ys - 1) % height) * width + xs,
            ((ys + 1) % height) * width + xs,
        ],
        axis=1,
    )


def neighbor_spin_sum(grid: SpinGrid, site: int) -> int:
    return int(sum(int(grid.spins[j]) for j in neighbor_sites(site, (grid.width, grid.height))))


def all_neighbor_sums(grid: SpinGrid) -> np.ndarray:
    m = grid.as_matrix().astype(np.int64)
    total = np.roll(m, 1, axis=1) + np.roll(m, -1, axis=1) + np.roll(m, 1, axis=0) + np.roll(m, -1, axis=0)
    return total.reshape(-1)


def energy_by_sites(grid: SpinGrid, fields: np.ndarray | float = 0.0, coupling: float = 1.0) -> float:
    """Hamiltonian from per-site neighbour sums; every bond is seen twice, hence the half."""
    s = grid.spins.astype(np.float64)
    sums = all_neighbor_sums(grid)
    return float(-0.5 * coupling * np.sum(s * sums) - np.sum(np.broadcast_to(fields, s.shape) * s))


def energy_by_bonds(grid: SpinGrid, fields: np.ndarray | float = 0.0, coupling: float = 1.0) -> float:
    """Hamiltonian summed over the right and down bond of each site."""
    total = 0.0
    s = grid.spins
    for site in range(grid.n_sites):
        _, right, _, down = neighbor_sites(site, (grid.width, grid.height))
        total -= coupling * (int(s[site]) * int(s[right]) + int(s[site]) * int(s[down]))
    b = np.broadcast_to(np.asarray(fields, dtype=np.float64), s.shape)
    return total - float(np.sum(b * s))
