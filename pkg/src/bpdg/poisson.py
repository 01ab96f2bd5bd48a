"""Self-consistent 1D Poisson solve by exact polynomial double integration.

The charge density is piecewise polynomial (doping is piecewise constant per
cell, the electron density per x-cell is a degree-k polynomial), so the
two-point boundary value problem has an exact piecewise-polynomial solution;
no linear solve or tolerance is involved and the result is deterministic.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .quadrature import legendre_to_monomial


@dataclass(frozen=True)
class DopingProfile:
    """Piecewise-constant background density N(x) >= 0.

    ``breakpoints`` are the interior region boundaries (ascending);
    ``values`` has one more entry than ``breakpoints``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if vals.size != bp.size + 1:
            raise ConfigError("doping needs len(values) == len(breakpoints) + 1")
        if bp.size and np.any(np.diff(bp) <= 0.0):
            raise ConfigError("doping breakpoints must be strictly increasing")
        if np.any(vals < 0.0):
            raise ConfigError("doping must be nonnegative")

    @classmethod
    def uniform(cls, value):
        return cls(np.array([]), np.array([float(value)]))

    def at(self, x):
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=np.float64), side="right")
        return self.values[idx]

    def per_cell(self, mesh):
        """Cell-center sample; region boundaries should align with cell edges."""
        centers = 0.5 * (mesh.x_edges[:-1] + mesh.x_edges[1:])
        return self.at(centers)


@dataclass
class PotentialState:
    """Piecewise-polynomial V(x) and E(x) = -V'(x) in local cell coordinates.

    ``vmon[i, d]`` and ``emon[i, d]`` are monomial coefficients in the
    reference coordinate of cell i.
    """

    x_edges: np.ndarray
    vmon: np.ndarray
    emon: np.ndarray
    bias: float

    def _locate(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any((x < self.x_edges[0]) | (x > self.x_edges[-1])):
            raise DomainError("x outside the device")
        idx = np.searchsorted(self.x_edges, x, side="left") - 1
        idx = np.clip(idx, 0, self.x_edges.size - 2)
        xi = (x - self.x_edges[idx]) / (self.x_edges[idx + 1] - self.x_edges[idx])
        return idx, xi

    def _eval(self, mon, x):
        idx, xi = self._locate(x)
        out = np.zeros_like(np.asarray(xi, dtype=np.float64))
        for d in range(mon.shape[1] - 1, -1, -1):
            out = out * xi + mon[idx, d]
        return out

    def potential_at(self, x):
        res = self._eval(self.vmon, x)
        return float(res) if np.isscalar(x) else res

    def efield_at(self, x):
        res = self._eval(self.emon, x)
        return float(res) if np.isscalar(x) else res

    def efield_nodes(self, ref_nodes):
        """E at fixed reference nodes in every cell; shape (nx, len(ref_nodes))."""
        powers = np.vander(np.asarray(ref_nodes), self.emon.shape[1], increasing=True)
        return self.emon @ powers.T

    def potential_nodes(self, ref_nodes):
        powers = np.vander(np.asarray(ref_nodes), self.vmon.shape[1], increasing=True)
        return self.vmon @ powers.T

    def min_potential(self):
        # V is piecewise polynomial of low degree; sampling edges plus a fine
        # reference grid is accurate enough for the overflow guard.
        grid = np.linspace(0.0, 1.0, 9)
        return float(self.potential_nodes(grid).min())


def zero_potential(mesh):
    nx = mesh.nx
    return PotentialState(mesh.x_edges, np.zeros((nx, 1)), np.zeros((nx, 1)), 0.0)


def electron_density(field, tables):
    """Per-x-cell Legendre coefficients of n(x) = 2*pi * iint f p^2 dp dmu.

    Exact: the p and mu integrals of the tensor basis reduce to the stored
    weighted moments, so no quadrature error is introduced.
    """
    t = tables
    mesh = field.mesh
    dpdmu = t.dp[:, None] * t.dmu[None, :]
    # coeffs[i, k, m, a, b, 0] enters; mu-modes c >= 1 integrate to zero.
    d = np.einsum("IKMab,Kb,KM->Ia", field.coeffs[:, :, :, :, :, 0], t.w2, dpdmu, optimize=True)
    return 2.0 * np.pi * d


def solve_potential(density_coeffs, doping_cell, mesh, permittivity, bias, charge=1.0):
    """Integrate -eps V'' = q (N - n) with V(0) = 0, V(L) = bias exactly."""
    nx = mesh.nx
    nb1 = density_coeffs.shape[1]
    if density_coeffs.shape[0] != nx:
        raise ConfigError("density has wrong cell count")
    h = mesh.dx
    scale = charge / permittivity

    rho_leg = -density_coeffs.copy()
    rho_leg[:, 0] += np.asarray(doping_cell, dtype=np.float64)
    rho_leg *= scale
    rho = legendre_to_monomial(rho_leg)              # (nx, nb1), powers of xi

    # W(x) = int_0^x rho, per cell in local coordinates.
    wmon = np.zeros((nx, nb1 + 1))
    wmon[:, 1:] = h[:, None] * rho / np.arange(1, nb1 + 1)[None, :]
    wmon[:, 0] = np.concatenate(([0.0], np.cumsum(wmon.sum(axis=1))))[:-1]

    # U(x) = int_0^x W.
    umon = np.zeros((nx, nb1 + 2))
    umon[:, 1:] = h[:, None] * wmon / np.arange(1, nb1 + 2)[None, :]
    ucells = umon.sum(axis=1)
    uacc = np.concatenate(([0.0], np.cumsum(ucells)))
    umon[:, 0] = uacc[:-1]
    u_total = uacc[-1]

    length = mesh.length
    slope = (bias + u_total) / length

    vmon = -umon
    vmon[:, 0] += slope * mesh.x_edges[:-1]
    vmon[:, 1] += slope * h

    emon = wmon.copy()
    emon[:, 0] -= slope
    return PotentialState(mesh.x_edges, vmon, emon, float(bias))


def solve_for_field(field, doping, tables, permittivity, bias, charge=1.0):
    """Density extraction plus BVP solve in one call."""
    dens = electron_density(field, tables)
    ncell = doping.per_cell(field.mesh)
    return solve_potential(dens, ncell, field.mesh, permittivity, bias, charge)


def write_poisson_csv(path, potential, field, doping, tables):
    """Per-cell Gauss-node samples of (x, V, E, n, N)."""
    mesh = field.mesh
    dens = electron_density(field, tables)
    from .quadrature import legendre_vals

    B = legendre_vals(tables.degree, tables.xg)
    nvals = dens @ B
    vv = potential.potential_nodes(tables.xg)
    ee = potential.efield_nodes(tables.xg)
    ncell = doping.per_cell(mesh)
    with open(path, "w", newline="") as fh:
        fh.write("x_node,V,E,n,N\n")
        for i in range(mesh.nx):
            for q in range(tables.xg.size):
                fh.write("%.17g,%.17g,%.17g,%.17g,%.17g\n" % (
                    tables.xG_nodes[i, q], vv[i, q], ee[i, q], nvals[i, q], ncell[i]))
