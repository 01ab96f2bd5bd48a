"""Semi-discrete DG transport operator: volume terms and upwind surface fluxes.

The advection factors are ``mu * d(energy)/dp`` in x, ``-q E mu`` in p and
``-q E`` in mu; every face uses the upwind rule.  Geometric factors (p^2 on
p-faces, 1 - mu^2 on mu-faces) vanish at p = 0 and mu = +-1, so only the
x-boundary and the p_max face need closure: periodic or diode inflow in x,
zero inflow at p_max.
"""

from dataclasses import dataclass

import numpy as np

from . import band as band_mod
from . import kernels
from .errors import ConfigError
from .mesh import cell_volume

BC_PERIODIC = "periodic"
BC_DIODE = "diode"


@dataclass
class BoundarySpec:
    """Boundary closure for the x-direction.

    For the diode case, ``fin_left``/``fin_right`` hold the inflow
    distribution sampled at the (p-Lobatto) face nodes; the values are
    mu-independent (isotropic contacts).
    """

    mode: str
    fin_left: np.ndarray = None
    fin_right: np.ndarray = None

    def code(self):
        if self.mode == BC_PERIODIC:
            return kernels.BC_PERIODIC
        if self.mode == BC_DIODE:
            return kernels.BC_DIODE
        raise ConfigError(f"unknown bc mode {self.mode!r}")


def periodic_bc():
    return BoundarySpec(BC_PERIODIC)


def diode_bc(tables, density_left, density_right):
    """Maxwellian contact inflow scaled to the requested edge densities."""
    from scipy.integrate import quad

    band = tables.band
    mesh = tables.mesh
    norm, _ = quad(lambda p: np.exp(-band_mod.energy(band, p)) * p * p, 0.0, mesh.p_max,
                   limit=200)
    ref = np.exp(-band_mod.energy(band, tables.pL))
    return BoundarySpec(
        BC_DIODE,
        fin_left=density_left / (4.0 * np.pi * norm) * ref,
        fin_right=density_right / (4.0 * np.pi * norm) * ref,
    )


def upwind_flux_x(mu, vel, f_minus, f_plus):
    """vel * ((mu+|mu|)/2 f^- + (mu-|mu|)/2 f^+), vel >= 0."""
    return vel * (0.5 * (mu + abs(mu)) * f_minus + 0.5 * (mu - abs(mu)) * f_plus)


def upwind_flux_p(efield, mu, f_minus, f_plus, charge=1.0):
    """Sign split on the p-advection factor -q E mu."""
    h = -charge * efield * mu
    return 0.5 * (h + abs(h)) * f_minus + 0.5 * (h - abs(h)) * f_plus


def upwind_flux_mu(efield, f_minus, f_plus, charge=1.0):
    """Sign split on the mu-advection factor -q E."""
    h = -charge * efield
    return 0.5 * (h + abs(h)) * f_minus + 0.5 * (h - abs(h)) * f_plus


def _fin_arrays(bc, tables):
    if bc.mode == BC_DIODE:
        return bc.fin_left, bc.fin_right
    z = np.zeros_like(tables.p2L)
    return z, z


def assemble_transport(field, potential, tables, bc, charge=1.0):
    """Coefficient-space rate of change from transport only.

    Returns (rate, boundary_mass_rate); the inverse weighted mass matrix is
    already applied.
    """
    t = tables
    EL = potential.efield_nodes(t.xl)
    fl, fr = _fin_arrays(bc, t)
    rows, bflux = kernels.transport_rows(
        field.coeffs, EL, bc.code(), fl, fr, charge,
        t.dx, t.dp, t.dmu,
        t.BG, t.dBG, t.BL, t.B0, t.B1, t.wg, t.wl,
        t.p2G, t.p2L, t.pL, t.velL, t.muL, t.om2G,
        t.mu_plus, t.mu_minus, t.p2_edges, t.om2_edges)
    return t.rate_from_rows(rows), bflux


def transport_rows_raw(field, potential, tables, bc, charge=1.0):
    """Weak-form rows before the mass-matrix solve (used by diagnostics)."""
    t = tables
    EL = potential.efield_nodes(t.xl)
    fl, fr = _fin_arrays(bc, t)
    return kernels.transport_rows(
        field.coeffs, EL, bc.code(), fl, fr, charge,
        t.dx, t.dp, t.dmu,
        t.BG, t.dBG, t.BL, t.B0, t.B1, t.wg, t.wl,
        t.p2G, t.p2L, t.pL, t.velL, t.muL, t.om2G,
        t.mu_plus, t.mu_minus, t.p2_edges, t.om2_edges)


def transport_average_rate(field, potential, tables, bc, cell, charge=1.0):
    """Flux-difference rate of the p^2-weighted cell average (per unit time).

    Equals the constant-test-function row of the weak form divided by the
    cell volume; multiplying by a time step gives the cell-average increment.
    """
    rows, _ = transport_rows_raw(field, potential, tables, bc, charge)
    i, k, m = cell
    return float(rows[i, k, m, 0, 0, 0] / cell_volume(field.mesh, i, k, m))


def transport_average_rates(field, potential, tables, bc, charge=1.0):
    """All cell-average transport rates at once."""
    rows, bflux = transport_rows_raw(field, potential, tables, bc, charge)
    return rows[:, :, :, 0, 0, 0] / tables.cellvol, bflux
