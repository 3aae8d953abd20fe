"""Square-tile domain lattice and per-domain anisotropy sampling.

Domains are indexed row-major on an n_x * n_y periodic grid. The domain-wall
coupling uses the 4-connected von Neumann neighborhood with periodic
wraparound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import FtjError

# Nominal HZO anisotropy constants (alpha [m/F], beta [m^5/F/C^2], gamma [m^9/F/C^4]).
NOMINAL_ANISOTROPY = (-5.8e8, 2.9e9, 6.5e10)


@dataclass(frozen=True)
class GridSpec:
    """Domain lattice: counts, tile side d [m], wall width w [m], wall
    coupling k/w [m^2/F]. Boundary is periodic."""

    n_x: int
    n_y: int
    d: float = 5e-9
    w: float = 0.5e-9
    k_over_w: float = 2e-3

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise FtjError("grid must have at least one domain")
        if self.d <= 0:
            raise FtjError("domain side must be > 0")
        if not 0 < self.w < self.d:
            raise FtjError("wall width must satisfy 0 < w < d")

    @property
    def n_d(self) -> int:
        return self.n_x * self.n_y

    @property
    def k(self) -> float:
        """Wall coupling constant k [m^3/F]."""
        return self.k_over_w * self.w

    @property
    def area(self) -> float:
        """Total simulated lattice area [m^2]."""
        return self.n_d * self.d ** 2


@dataclass(frozen=True)
class VariationSpec:
    """Relative standard deviations of the anisotropy constants plus RNG seed."""

    sigma_alpha: float = 0.0
    sigma_beta: float = 0.0
    sigma_gamma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for s in (self.sigma_alpha, self.sigma_beta, self.sigma_gamma):
            if s < 0:
                raise FtjError("relative standard deviations must be >= 0")


@dataclass(frozen=True)
class DomainParams:
    """Per-domain anisotropy constant arrays (length n_d)."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    @property
    def mean_alpha(self) -> float:
        return float(np.mean(self.alpha))


def neighbors(i: int, grid: GridSpec) -> list[int]:
    """4-connected periodic neighbors of domain i (with multiplicity on
    degenerate grids; a 1x1 grid returns the domain itself 4 times)."""
    if not 0 <= i < grid.n_d:
        raise IndexError(f"domain index {i} out of range for n_d={grid.n_d}")
    iy, ix = divmod(i, grid.n_x)
    out = []
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        jy = (iy + dy) % grid.n_y
        jx = (ix + dx) % grid.n_x
        out.append(jy * grid.n_x + jx)
    return out


def wall_laplacian(grid: GridSpec) -> sp.csr_matrix:
    """Graph Laplacian L with (L P)_i = sum_n (P_i - P_n) over the periodic
    4-neighborhood. Rows sum to zero."""
    n = grid.n_d
    rows, cols, vals = [], [], []
    for i in range(n):
        rows.append(i)
        cols.append(i)
        vals.append(4.0)
        for j in neighbors(i, grid):
            rows.append(i)
            cols.append(j)
            vals.append(-1.0)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def sample_anisotropy(nominal: tuple[float, float, float],
                      variation: VariationSpec,
                      grid: GridSpec) -> DomainParams:
    """Draw per-domain anisotropy constants from independent normals with the
    given relative sigmas. Deterministic for a fixed seed (Philox counter-based
    generator). Draws that flip the sign of any constant are rejected and
    redrawn, keeping every domain a double-well ferroelectric.
    """
    a0, b0, g0 = nominal
    rng = np.random.Generator(np.random.Philox(variation.seed))
    n = grid.n_d

    def draw(mean, sigma_rel):
        if sigma_rel == 0.0:
            return np.full(n, mean)
        vals = rng.normal(mean, abs(sigma_rel * mean), size=n)
        bad = np.sign(vals) != np.sign(mean)
        while np.any(bad):
            vals[bad] = rng.normal(mean, abs(sigma_rel * mean), size=int(bad.sum()))
            bad = np.sign(vals) != np.sign(mean)
        return vals

    return DomainParams(
        alpha=draw(a0, variation.sigma_alpha),
        beta=draw(b0, variation.sigma_beta),
        gamma=draw(g0, variation.sigma_gamma),
    )
