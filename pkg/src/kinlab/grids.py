"""Periodic grids and Fourier conventions shared by all modules.

Conventions (d = 1 or 2, torus of side L = n*h):
  - inner product  <u, v> = h^d * sum(u * conj(v))
  - Fourier        f̂(p)  = h^d * sum_x f(x) e^{-ip.x}   (to_fourier)
  - inversion      f(x)  = (1/L^d) * sum_p f̂(p) e^{ip.x}  (from_fourier)
so momentum integrals carry dp/(2pi)^d <-> (1/L^d) sum_p, and Plancherel
||f||^2 = (1/L^d) sum_p |f̂(p)|^2 holds exactly on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Periodic spatial grid with its dual momentum lattice."""

    n: int
    dim: int = 1
    spacing: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"only d=1,2 supported, got d={self.dim}")
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("grid size must be even and >= 2")

    @property
    def length(self) -> float:
        return self.n * self.spacing

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def npoints(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def x1d(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)

    @property
    def p1d(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def x_mesh(self) -> tuple:
        """Tuple of dim coordinate arrays, each of shape `shape`."""
        return np.meshgrid(*([self.x1d] * self.dim), indexing="ij")

    def p_mesh(self) -> tuple:
        return np.meshgrid(*([self.p1d] * self.dim), indexing="ij")

    def p_squared(self) -> np.ndarray:
        ps = self.p_mesh()
        return sum(p**2 for p in ps)

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        return self.cell_volume * np.sum(u * np.conj(v))

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(np.real(self.inner(u, u))))

    def to_fourier(self, u: np.ndarray) -> np.ndarray:
        return np.fft.fftn(u) * self.cell_volume

    def from_fourier(self, uh: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(uh) / self.cell_volume

    def min_image(self, dx: np.ndarray) -> np.ndarray:
        """Torus-minimal displacement, componentwise."""
        L = self.length
        return dx - L * np.round(np.asarray(dx, dtype=float) / L)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        return np.mod(x, self.length)

    def nearest_index(self, x) -> tuple:
        """Index of the grid point nearest to x (componentwise, periodic)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.mod(np.round(x / self.spacing).astype(int), self.n)
        return tuple(int(i) for i in idx)

    def nearest_momentum(self, q) -> tuple:
        """Snap q to the momentum lattice; returns (q_snapped, off_lattice)."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        dp = 2.0 * np.pi / self.length
        k = np.round(q / dp)
        q_snap = k * dp
        off = bool(np.max(np.abs(q - q_snap)) > 1e-9 * max(dp, 1.0))
        return q_snap, off


def torus_distance(grid: Grid, x, y) -> float:
    """Euclidean distance on the torus."""
    d = grid.min_image(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return float(np.linalg.norm(d))
