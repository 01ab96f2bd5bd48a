"""Tensor phase-space grid over (x, p, mu) with p^2-weighted cell volumes."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class PhaseMesh:
    """Edges of the tensor grid; x in [0, L], p in [0, p_max], mu in [-1, 1]."""

    x_edges: np.ndarray
    p_edges: np.ndarray
    mu_edges: np.ndarray

    def __post_init__(self):
        for name, edges in (("x", self.x_edges), ("p", self.p_edges), ("mu", self.mu_edges)):
            edges = np.asarray(edges, dtype=np.float64)
            object.__setattr__(self, f"{name}_edges", edges)
            if edges.ndim != 1 or edges.size < 2:
                raise ConfigError(f"{name}_edges needs at least two entries")
            if np.any(np.diff(edges) <= 0.0):
                raise ConfigError(f"{name}_edges must be strictly increasing")
        if self.x_edges[0] != 0.0:
            raise ConfigError("x_edges must start at 0")
        if self.p_edges[0] != 0.0:
            raise ConfigError("p_edges must start at 0")
        if self.mu_edges[0] != -1.0 or self.mu_edges[-1] != 1.0:
            raise ConfigError("mu_edges must span [-1, 1]")

    @property
    def nx(self):
        return self.x_edges.size - 1

    @property
    def np_(self):
        return self.p_edges.size - 1

    @property
    def nmu(self):
        return self.mu_edges.size - 1

    @property
    def length(self):
        return float(self.x_edges[-1])

    @property
    def p_max(self):
        return float(self.p_edges[-1])

    @property
    def dx(self):
        return np.diff(self.x_edges)

    @property
    def dp(self):
        return np.diff(self.p_edges)

    @property
    def dmu(self):
        return np.diff(self.mu_edges)

    def shape(self):
        return (self.nx, self.np_, self.nmu)


def build_uniform(length, p_max, nx, np_, nmu):
    """Uniform mesh over [0, L] x [0, p_max] x [-1, 1]."""
    if nx < 1 or np_ < 1 or nmu < 1:
        raise ConfigError("cell counts must be >= 1")
    if length <= 0.0 or p_max <= 0.0:
        raise ConfigError("domain extents must be positive")
    return PhaseMesh(
        x_edges=np.linspace(0.0, length, nx + 1),
        p_edges=np.linspace(0.0, p_max, np_ + 1),
        mu_edges=np.linspace(-1.0, 1.0, nmu + 1),
    )


def cell_volume(mesh, i, k, m):
    """p^2-weighted volume: dx_i * dmu_m * (p_{k+}^3 - p_{k-}^3) / 3."""
    if not (0 <= i < mesh.nx and 0 <= k < mesh.np_ and 0 <= m < mesh.nmu):
        raise IndexError(f"cell index ({i}, {k}, {m}) out of range for {mesh.shape()}")
    pe = mesh.p_edges
    return float(mesh.dx[i] * mesh.dmu[m] * (pe[k + 1] ** 3 - pe[k] ** 3) / 3.0)


def cell_volumes(mesh):
    """All cell volumes as an (nx, np, nmu) array."""
    pe = mesh.p_edges
    p3 = (pe[1:] ** 3 - pe[:-1] ** 3) / 3.0
    return mesh.dx[:, None, None] * p3[None, :, None] * mesh.dmu[None, None, :]
